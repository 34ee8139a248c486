"""Syntactic check that a formula stays inside the invariant fragment.

Under ``equivalence`` only equality at the sorts of maximal height is
allowed (for categories: arrows in a common hom-set), and function symbols
returning a base-level element are disallowed.  Label atoms are never
allowed.  The check is conservative: a rejected formula may still happen to
be invariant, so messages say "not expressible in the invariant fragment".
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

from .syntax import (
    App,
    Atom,
    Binary,
    EplintError,
    Equal,
    Formula,
    Not,
    Quant,
    Signature,
    SortApp,
    SortedFormula,
    SourceSpan,
    Term,
    Truth,
    format_formula,
    format_sort,
)


class Sameness(enum.Enum):
    ISOMORPHISM = "isomorphism"
    EQUIVALENCE = "equivalence"

    @classmethod
    def parse(cls, text: str | Sameness) -> Sameness:
        if isinstance(text, cls):
            return text
        aliases = {"iso": cls.ISOMORPHISM, "equiv": cls.EQUIVALENCE}
        key = str(text).strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown sameness notion {text!r} (use iso or equiv)") from None


class LintError(EplintError):
    pass


def admissible_sorts(sig: Signature, sameness: Sameness | str) -> frozenset[str]:
    s = Sameness.parse(sameness)
    if s.value not in sig.eq_admissible:
        raise LintError("equivalence sameness undefined for this signature")
    return sig.eq_admissible[s.value]


KINDS = ("object-equality", "label-atom", "object-valued-function")
_KIND_RANK = {k: i for i, k in enumerate(KINDS)}


@dataclass(frozen=True)
class Violation:
    kind: str
    span: SourceSpan | None
    message: str

    def sort_key(self) -> tuple:
        start = self.span.start if self.span else -1
        return (start, _KIND_RANK[self.kind], self.message)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "span": self.span.to_json() if self.span else None,
            "message": self.message,
        }


@dataclass(frozen=True)
class LintReport:
    violations: tuple[Violation, ...] = ()
    sameness: Sameness = Sameness.ISOMORPHISM
    formula: str = field(default="", compare=False)

    @property
    def verdict(self) -> str:
        return "fail" if self.violations else "pass"

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "violations": [v.to_json() for v in self.violations]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=False)

    def render(self, filename: str = "<formula>") -> str:
        if not self.violations:
            return f"{filename}: pass ({self.sameness.value})"
        lines = []
        for v in self.violations:
            where = f"{filename}:{v.span}" if v.span else filename
            lines.append(f"{where}: {v.kind}: {v.message}")
        n = len(self.violations)
        lines.append(f"{filename}: fail ({n} violation{'s' if n != 1 else ''}, {self.sameness.value})")
        return "\n".join(lines)


def lint(sf: SortedFormula, sig: Signature | None = None, sameness: Sameness | str = "equivalence") -> LintReport:
    """Collect every violation in ``sf`` under ``sameness``."""
    sig = sig or sf.signature
    s = Sameness.parse(sameness)
    allowed = admissible_sorts(sig, s)
    found: list[Violation] = []
    _walk_formula(sf.formula, sig, s, allowed, found)
    found.sort(key=Violation.sort_key)
    return LintReport(tuple(found), s, format_formula(sf.formula))


def _walk_formula(f: Formula, sig, s, allowed, out) -> None:
    if isinstance(f, Truth):
        return
    if isinstance(f, Equal):
        sort = f.sort
        if sort is None:
            raise LintError("formula has not been sort-checked", f.span)
        if sort.name not in allowed:
            out.append(
                Violation(
                    "object-equality",
                    f.span,
                    f"equality at sort {format_sort(sort)} is not expressible in the "
                    f"invariant fragment for {s.value}",
                )
            )
        _walk_term(f.left, sig, s, out)
        _walk_term(f.right, sig, s, out)
        return
    if isinstance(f, Atom):
        if sig.label(f.name) is not None:
            out.append(
                Violation(
                    "label-atom",
                    f.span,
                    f"label atom {f.name}(...) names a specific element; not expressible "
                    f"in the invariant fragment",
                )
            )
        for a in f.args:
            _walk_term(a, sig, s, out)
        return
    if isinstance(f, Not):
        _walk_formula(f.body, sig, s, allowed, out)
        return
    if isinstance(f, Binary):
        _walk_formula(f.left, sig, s, allowed, out)
        _walk_formula(f.right, sig, s, allowed, out)
        return
    if isinstance(f, Quant):
        _walk_sort(f.sort, sig, s, out)
        _walk_formula(f.body, sig, s, allowed, out)
        return
    raise TypeError(f"not a formula node: {f!r}")


def _walk_sort(sort: SortApp, sig, s, out) -> None:
    for a in sort.args:
        _walk_term(a, sig, s, out)


def _walk_term(t: Term, sig, s, out) -> None:
    if not isinstance(t, App):
        return
    fn = sig.function(t.name)
    if s is Sameness.EQUIVALENCE and fn is not None and sig.is_object_valued(fn):
        out.append(
            Violation(
                "object-valued-function",
                t.span,
                f"function {t.name} returns an element of base sort "
                f"{fn.result.name}; not expressible in the invariant fragment for equivalence",
            )
        )
    for a in t.args:
        _walk_term(a, sig, s, out)
