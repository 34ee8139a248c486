"""Moving structure along bijections by conjugation.

Given a structure on ``{0..n-1}`` and a bijection ``sigma`` onto another
carrier, the transported structure is ``op'(a1..ak) = sigma(op(sigma^-1 a1 ..
sigma^-1 ak))``.  Every function here checks its own postcondition and
raises :class:`TransportError` if it fails.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

from .models import (
    FinAlgebra,
    FinMonoid,
    ModelError,
    Operation,
    Validation,
    VALID,
    _fail,
    validate_monoid,
)
from .morphisms import Bijection, is_monoid_iso
from .semantics import evaluate
from .syntax import EplintError, parse_sorted


class TransportError(EplintError):
    pass


def _check_size(n: int, sigma: Bijection) -> None:
    if sigma.size != n:
        raise TransportError(f"bijection has {sigma.size} points but the carrier has {n}")


def transport_monoid(m: FinMonoid, sigma: Bijection) -> FinMonoid:
    _check_size(m.size, sigma)
    f, g = sigma.forward, sigma.inverse
    n = m.size
    table = tuple(tuple(f[m.table[g[a]][g[b]]] for b in range(n)) for a in range(n))
    out = FinMonoid(n, f[m.unit], table)
    v = validate_monoid(out)
    if not v:
        raise TransportError(f"transported table is not a monoid: {v.law} at {v.witness}")
    if not is_monoid_iso(m, out, sigma):
        raise TransportError("bijection is not an isomorphism onto the transported monoid")
    return out


def axiom_status(alg: FinAlgebra) -> tuple[bool, ...]:
    sig = alg.signature
    return tuple(evaluate(parse_sorted(ax, sig), alg) for ax in alg.axioms)


def transport_algebra(alg: FinAlgebra, sigma: Bijection) -> FinAlgebra:
    _check_size(alg.size, sigma)
    f, g = sigma.forward, sigma.inverse
    n = alg.size
    ops = []
    for op in alg.operations:
        k = op.arity
        table = []
        for args in itertools.product(range(n), repeat=k):
            src = tuple(g[a] for a in args)
            table.append(f[op(*src)])
        ops.append(Operation(op.name, k, tuple(table)))
    out = FinAlgebra(n, tuple(ops), alg.axioms, alg.name)
    if axiom_status(out) != axiom_status(alg):
        raise TransportError("axiom status changed under transport")
    return out


def algebra_iso(a: FinAlgebra, b: FinAlgebra, sigma: Bijection) -> bool:
    """Does ``sigma`` commute with every operation?"""
    if a.size != b.size or sigma.size != a.size:
        return False
    f = sigma.forward
    for op in a.operations:
        try:
            op2 = b.op(op.name)
        except KeyError:
            return False
        if op2.arity != op.arity:
            return False
        for args in itertools.product(range(a.size), repeat=op.arity):
            if f[op(*args)] != op2(*(f[x] for x in args)):
                return False
    return True


# -- monoid actions ---------------------------------------------------------------


@dataclass(frozen=True)
class MonoidAction:
    """Left action ``act(m, x) = table[m][x]`` of a monoid on ``{0..carrier-1}``."""

    monoid: FinMonoid
    carrier: int
    table: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(tuple(r) for r in self.table))
        if len(self.table) != self.monoid.size or any(len(r) != self.carrier for r in self.table):
            raise ModelError("action table must be |M| rows of |X| entries")
        if any(not 0 <= v < self.carrier for r in self.table for v in r):
            raise ModelError("action table entry outside the carrier")

    def act(self, m: int, x: int) -> int:
        return self.table[m][x]


def validate_action(act: MonoidAction) -> Validation:
    m = act.monoid
    for x in range(act.carrier):
        if act.act(m.unit, x) != x:
            return _fail("unit", (x,), f"the unit moves {x}")
    for a in range(m.size):
        for b in range(m.size):
            for x in range(act.carrier):
                if act.act(m.table[a][b], x) != act.act(a, act.act(b, x)):
                    return _fail("compatibility", (a, b, x), f"({a}{b})x differs from {a}({b}x) at x={x}")
    return VALID


def enumerate_actions(m: FinMonoid, carrier: int) -> Iterator[MonoidAction]:
    """Every action of ``m`` on a ``carrier``-element set, lexicographically."""
    maps = list(itertools.product(range(carrier), repeat=carrier))
    others = [a for a in range(m.size) if a != m.unit]
    ident = tuple(range(carrier))
    for rows in itertools.product(maps, repeat=len(others)):
        table = [ident] * m.size
        for a, r in zip(others, rows):
            table[a] = r
        act = MonoidAction(m, carrier, tuple(table))
        if validate_action(act):
            yield act


def transport_action(act: MonoidAction, phi: Bijection, target: FinMonoid) -> MonoidAction:
    """The action of ``target`` on the same carrier: ``act'(m', x) = act(phi^-1 m', x)``."""
    if not is_monoid_iso(act.monoid, target, phi):
        raise TransportError("phi is not a monoid isomorphism onto the target")
    table = tuple(act.table[phi.inverse[b]] for b in range(target.size))
    out = MonoidAction(target, act.carrier, table)
    v = validate_action(out)
    if not v:
        raise TransportError(f"transported action fails {v.law} at {v.witness}")
    return out


@dataclass(frozen=True)
class ActionBijectionCheck:
    source_count: int
    target_count: int
    ok: bool
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_action_bijection(m: FinMonoid, m2: FinMonoid, phi: Bijection, carrier: int) -> ActionBijectionCheck:
    """Check that transport along ``phi`` is a bijection between action sets."""
    src = [a.table for a in enumerate_actions(m, carrier)]
    dst = [a.table for a in enumerate_actions(m2, carrier)]
    dst_set = set(dst)
    images = [transport_action(MonoidAction(m, carrier, t), phi, m2).table for t in src]
    if any(t not in dst_set for t in images):
        return ActionBijectionCheck(len(src), len(dst), False, "an image is not an action of the target")
    if len(set(images)) != len(images):
        return ActionBijectionCheck(len(src), len(dst), False, "transport is not injective")
    if set(images) != dst_set:
        return ActionBijectionCheck(len(src), len(dst), False, "transport is not surjective")
    back = phi.inverted()
    for t, img in zip(src, images):
        if transport_action(MonoidAction(m2, carrier, img), back, m).table != t:
            return ActionBijectionCheck(len(src), len(dst), False, "phi^-1 does not invert transport")
    return ActionBijectionCheck(len(src), len(dst), True)
