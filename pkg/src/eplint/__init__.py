"""Equivalence-principle linter and finite-model laboratory."""

__version__ = "0.1.0"
