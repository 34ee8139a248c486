"""Brute-force invariance checking over every model within bounds.

A formula is evaluated on each model once; pairs of models related by the
chosen sameness then disagree exactly when their cached truth values
differ.  "No counterexample within bounds" is a finite observation, not a
proof of invariance.
"""

from __future__ import annotations

import functools
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .lint import Sameness, lint
from .models import (
    FinCategory,
    FinMonoid,
    FinSet,
    GuardError,
    ModelClass,
    category_guard,
    enumerate_categories,
    enumerate_monoids,
    enumerate_sets,
    model_to_json,
)
from .morphisms import (
    Bijection,
    enumerate_monoid_isos,
    find_equivalence,
    find_isomorphism,
    skeletonize,
)
from .semantics import SemanticsError, compile_formula
from .syntax import (
    App,
    Atom,
    Binary,
    Equal,
    Formula,
    Not,
    Quant,
    Signature,
    SortApp,
    SortedFormula,
    Truth,
    Var,
    builtin_signature,
    format_formula,
    parse_sorted,
)

NO_COUNTEREXAMPLE = "no-counterexample-within-bounds"
COUNTEREXAMPLE = "counterexample"

MONOID_SIZE_LIMIT = 5
SET_SIZE_LIMIT = 8


@dataclass(frozen=True)
class Bounds:
    """Model sizes ``min_size..max_size``; for categories the size is the
    object count and ``max_arrows`` caps the total arrow count."""

    max_size: int
    max_arrows: int | None = None
    min_size: int = 0

    def arrows_for(self) -> int:
        return self.max_size + 2 if self.max_arrows is None else self.max_arrows

    def to_json(self, cls: ModelClass) -> dict:
        out = {"min_size": self.min_size, "max_size": self.max_size}
        if cls is ModelClass.CATEGORY:
            out["max_arrows"] = self.arrows_for()
        return out


# -- model universes -------------------------------------------------------------


def _size(m) -> tuple:
    if isinstance(m, FinCategory):
        return m.size
    return (m.size,)


@dataclass
class Universe:
    """Models in canonical order, partitioned into sameness classes."""

    cls: ModelClass
    sameness: Sameness
    bounds: Bounds
    models: list
    classes: list[list[int]]
    labels: tuple[str, ...] = ()
    keys: list[tuple] = field(default_factory=list)

    @property
    def pair_count(self) -> int:
        return sum(len(c) * len(c) for c in self.classes)

    def witness(self, i: int, j: int):
        a, b = self.models[i], self.models[j]
        if self.cls is ModelClass.SET:
            return Bijection.identity(a.size)
        if self.cls is ModelClass.MONOID:
            return next(enumerate_monoid_isos(a, b))
        if self.sameness is Sameness.ISOMORPHISM:
            return find_isomorphism(a, b)
        return find_equivalence(a, b)


def _guard_bounds(cls: ModelClass, bounds: Bounds) -> None:
    if bounds.min_size < 0 or bounds.max_size < bounds.min_size:
        raise GuardError(f"bad size bounds {bounds.min_size}..{bounds.max_size}")
    if cls is ModelClass.MONOID and bounds.max_size > MONOID_SIZE_LIMIT:
        raise GuardError(
            f"refusing monoids of size {bounds.max_size}: safety limit is {MONOID_SIZE_LIMIT}"
        )
    if cls is ModelClass.SET and bounds.max_size > SET_SIZE_LIMIT:
        raise GuardError(f"refusing sets of size {bounds.max_size}: safety limit is {SET_SIZE_LIMIT}")
    if cls is ModelClass.CATEGORY:
        for n in range(bounds.min_size, min(bounds.max_size, bounds.arrows_for()) + 1):
            category_guard(n, bounds.arrows_for())


def _group_by_key(models: list, keys: list[tuple]) -> list[list[int]]:
    classes: dict[tuple, list[int]] = {}
    for i, k in enumerate(keys):
        classes.setdefault(k, []).append(i)
    return list(classes.values())


@functools.lru_cache(maxsize=32)
def build_universe(
    cls: ModelClass, sameness: Sameness, bounds: Bounds, labels: tuple[str, ...] = ("one",)
) -> Universe:
    cls = ModelClass(cls)
    sameness = Sameness.parse(sameness)
    _guard_bounds(cls, bounds)
    if cls is ModelClass.SET:
        models = [
            s
            for n in range(bounds.min_size, bounds.max_size + 1)
            for s in enumerate_sets(n, labels, up_to_iso=True)
        ]
        models.sort(key=lambda s: (_size(s), s.canonical_key(labels)))
        keys = [(s.size,) for s in models]
        return Universe(cls, sameness, bounds, models, _group_by_key(models, keys), labels, keys)
    if cls is ModelClass.MONOID:
        models = [
            m
            for n in range(max(1, bounds.min_size), bounds.max_size + 1)
            for m in enumerate_monoids(n, up_to_iso=False)
        ]
        models.sort(key=lambda m: (_size(m), m.canonical_key(), m.sort_key()))
        keys = [m.canonical_key() for m in models]
        return Universe(cls, sameness, bounds, models, _group_by_key(models, keys), (), keys)
    arrows = bounds.arrows_for()
    if sameness is Sameness.ISOMORPHISM:
        models = [
            c
            for n in range(bounds.min_size, bounds.max_size + 1)
            if arrows >= n
            for c in enumerate_categories(n, arrows, up_to_iso=False)
        ]
        models.sort(key=lambda c: (_size(c), c.canonical_key(), c.sort_key()))
        keys = [c.canonical_key() for c in models]
        return Universe(cls, sameness, bounds, models, _group_by_key(models, keys), (), keys)
    models = [
        c
        for n in range(bounds.min_size, bounds.max_size + 1)
        if arrows >= n
        for c in enumerate_categories(n, arrows, up_to_iso=True)
    ]
    models.sort(key=lambda c: (_size(c), c.canonical_key()))
    keys = [c.canonical_key() for c in models]
    return Universe(cls, sameness, bounds, models, _equivalence_classes(models), (), keys)


def _equivalence_classes(models: list[FinCategory]) -> list[list[int]]:
    """Partition by find_equivalence against the first member of each class.

    Skeleton sizes are equivalence invariants, so they bucket the search.
    """
    buckets: dict[tuple, list[list[int]]] = {}
    order: list[list[int]] = []
    for i, c in enumerate(models):
        bucket = buckets.setdefault(skeletonize(c).size, [])
        for cl in bucket:
            if find_equivalence(models[cl[0]], c) is not None:
                cl.append(i)
                break
        else:
            cl = [i]
            bucket.append(cl)
            order.append(cl)
    return order


# -- reports -----------------------------------------------------------------------


def _witness_json(w):
    if w is None:
        return None
    if isinstance(w, Bijection):
        return {"bijection": list(w.forward)}
    return w.to_json()


@dataclass
class Counterexample:
    model_a: object
    model_b: object
    witness: object
    truth_a: bool
    truth_b: bool

    def to_json(self) -> dict:
        return {
            "model_a": model_to_json(self.model_a),
            "model_b": model_to_json(self.model_b),
            "witness": _witness_json(self.witness),
            "truth_a": self.truth_a,
            "truth_b": self.truth_b,
        }


@dataclass
class InvarianceReport:
    formula: str
    cls: ModelClass
    sameness: Sameness
    bounds: Bounds
    pairs_checked: int
    counterexample: Counterexample | None = None

    @property
    def verdict(self) -> str:
        return COUNTEREXAMPLE if self.counterexample else NO_COUNTEREXAMPLE

    def to_json(self) -> dict:
        return {
            "formula": self.formula,
            "class": self.cls.value,
            "sameness": self.sameness.value,
            "verdict": self.verdict,
            "bounds": self.bounds.to_json(self.cls),
            "pairs_checked": self.pairs_checked,
            "counterexample": self.counterexample.to_json() if self.counterexample else None,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    def render(self, verbose: bool = False) -> str:
        b = self.bounds.to_json(self.cls)
        bounds = ", ".join(f"{k}={v}" for k, v in b.items())
        lines = [
            f"formula: {self.formula}",
            f"class: {self.cls.value}  sameness: {self.sameness.value}  bounds: {bounds}",
            f"pairs checked: {self.pairs_checked}",
            f"verdict: {self.verdict}",
        ]
        cx = self.counterexample
        if cx is None:
            lines.append("(no counterexample among the models within bounds; this is not a proof)")
            return "\n".join(lines)
        lines.append(f"  A ({str(cx.truth_a).lower()}): {_describe(cx.model_a)}")
        lines.append(f"  B ({str(cx.truth_b).lower()}): {_describe(cx.model_b)}")
        wj = json.dumps(_witness_json(cx.witness), separators=(",", ":"))
        if len(wj) > 120 and not verbose:
            wj = wj[:117] + "..."
        lines.append(f"  witness: {wj}")
        return "\n".join(lines)


def _describe(m) -> str:
    if isinstance(m, FinSet):
        labels = ", ".join(f"{k}={v}" for k, v in m.labels) or "no labels"
        return f"set of size {m.size} ({labels})"
    if isinstance(m, FinMonoid):
        return f"monoid of order {m.size}, unit {m.unit}, table {[list(r) for r in m.table]}"
    arrows = " ".join(f"{a.name}:{a.src}->{a.dst}" for a in m.arrows)
    comp = " ".join(f"{m.arrows[f].name}.{m.arrows[g].name}={m.arrows[k].name}"
                    for (f, g), k in m.compose
                    if f not in m.identities and g not in m.identities)
    text = f"category with {m.objects} objects; arrows {arrows or '(none)'}"
    if comp:
        text += f"; composites {comp}"
    return text


# -- evaluation ----------------------------------------------------------------------


def _truths_chunk(args) -> list[bool]:
    formula, models = args
    fn = compile_formula(formula)
    return [bool(fn(m, {})) for m in models]


def _truths(formula: Formula, models: list, jobs: int) -> list[bool]:
    if jobs <= 1 or len(models) < 2:
        return _truths_chunk((formula, models))
    size = max(1, -(-len(models) // (jobs * 4)))
    chunks = [models[i : i + size] for i in range(0, len(models), size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_truths_chunk, [(formula, c) for c in chunks]))
    return [t for part in parts for t in part]


def _check_signature(sf: SortedFormula, cls: ModelClass) -> None:
    want = builtin_signature(cls.value)
    if sf.signature != want:
        have = {s.name for s in want.sorts}
        if any(s.name not in have for s in sf.signature.sorts) or any(
            want.function(f.name) is None for f in sf.signature.functions
        ) or any(want.label(lb.name) is None for lb in sf.signature.labels):
            raise SemanticsError(
                f"formula over signature {sf.signature.name!r} does not fit {cls.value} models"
            )
    if sf.context:
        raise SemanticsError("invariance checks need a closed formula")


def check_invariance(
    sf: SortedFormula,
    cls: ModelClass | str,
    sameness: Sameness | str,
    bounds: Bounds,
    *,
    jobs: int = 1,
    universe: Universe | None = None,
) -> InvarianceReport:
    """First disagreeing related pair in canonical order, if any."""
    cls = ModelClass(cls)
    sameness = Sameness.parse(sameness)
    _check_signature(sf, cls)
    if cls is ModelClass.SET:
        labels = tuple(sorted(lb.name for lb in builtin_signature("set").labels))
    else:
        labels = ()
    u = universe or build_universe(cls, sameness, bounds, labels)
    truths = _truths(sf.formula, u.models, jobs)
    best: tuple[int, int] | None = None
    for members in u.classes:
        for i in members:
            j = next((j for j in members if truths[j] != truths[i]), None)
            if j is not None:
                if best is None or (i, j) < best:
                    best = (i, j)
                break
    cx = None
    if best is not None:
        i, j = best
        cx = Counterexample(u.models[i], u.models[j], u.witness(i, j), truths[i], truths[j])
    return InvarianceReport(format_formula(sf.formula), cls, sameness, bounds, u.pair_count, cx)


# -- corpus and cross-check --------------------------------------------------------------


@dataclass(frozen=True)
class CrosscheckRow:
    formula: str
    lint_verdict: str
    oracle_verdict: str


@dataclass
class CrosscheckSummary:
    rows: list[CrosscheckRow]

    @property
    def unsound(self) -> list[CrosscheckRow]:
        return [r for r in self.rows if r.lint_verdict == "pass" and r.oracle_verdict == COUNTEREXAMPLE]

    @property
    def conservative(self) -> list[CrosscheckRow]:
        return [r for r in self.rows if r.lint_verdict == "fail" and r.oracle_verdict == NO_COUNTEREXAMPLE]

    def counts(self) -> dict[tuple[str, str], int]:
        out: dict[tuple[str, str], int] = {}
        for r in self.rows:
            out[(r.lint_verdict, r.oracle_verdict)] = out.get((r.lint_verdict, r.oracle_verdict), 0) + 1
        return out


def crosscheck_lint(
    corpus: Iterable[SortedFormula],
    cls: ModelClass | str,
    sameness: Sameness | str,
    bounds: Bounds,
    *,
    jobs: int = 1,
) -> CrosscheckSummary:
    cls = ModelClass(cls)
    sameness = Sameness.parse(sameness)
    u = None
    rows = []
    for sf in corpus:
        if u is None:
            labels = tuple(sorted(lb.name for lb in sf.signature.labels))
            u = build_universe(cls, sameness, bounds, labels)
        verdict = lint(sf, sf.signature, sameness).verdict
        rep = check_invariance(sf, cls, sameness, bounds, jobs=jobs, universe=u)
        rows.append(CrosscheckRow(format_formula(sf.formula), verdict, rep.verdict))
    return CrosscheckSummary(rows)


class _Gen:
    """Random well-sorted closed formulas over a builtin signature."""

    def __init__(self, sig: Signature, rng: random.Random, fragment_only: bool):
        self.sig = sig
        self.rng = rng
        self.fragment_only = fragment_only
        self.counter = 0

    def fresh(self, sort: str) -> str:
        self.counter += 1
        stem = {"O": "x", "A": "f", "U": "u"}.get(sort, "v")
        return f"{stem}{self.counter}"

    # context entries: (name, SortApp)
    def terms_at(self, ctx, sort: SortApp, depth: int):
        """Candidate terms of exactly ``sort``."""
        out = [Var(n) for n, s in ctx if s == sort]
        name = self.sig.name
        if name == "category" and sort.name == "A":
            x, y = sort.args
            if x == y:
                out.append(App("id", (x,)))
            if depth > 0:
                mids = [Var(n) for n, s in ctx if s.name == "O"]
                for z in mids:
                    left = self.terms_at(ctx, SortApp("A", (x, z)), 0)
                    right = self.terms_at(ctx, SortApp("A", (z, y)), 0)
                    for lt in left:
                        for rt in right:
                            out.append(App("comp", (lt, rt)))
        if name == "monoid":
            out.append(App("unit"))
            if depth > 0:
                base = self.terms_at(ctx, sort, 0)
                out.extend(App("mul", (a, b)) for a in base for b in base)
        return out

    def atom(self, ctx) -> Formula:
        rng = self.rng
        choices = []
        sorts = sorted({s for _, s in ctx}, key=lambda s: repr(s))
        for s in sorts:
            if self.fragment_only and self.sig.name == "category" and s.name == "O":
                continue
            ts = self.terms_at(ctx, s, 1)
            if ts:
                choices.append((s, ts))
        if self.sig.labels and not self.fragment_only:
            us = [n for n, s in ctx if s.name == "U"]
            if us and rng.random() < 0.3:
                return Atom(self.sig.labels[0].name, (Var(rng.choice(us)),))
        if not choices or rng.random() < 0.08:
            return Truth(rng.random() < 0.5)
        # favour the higher sorts and distinct sides
        weights = [self.sig.height(s.name) ** 2 * len(ts) for s, ts in choices]
        s, ts = rng.choices(choices, weights=weights)[0]
        left = rng.choice(ts)
        others = [t for t in ts if t != left]
        right = rng.choice(others) if others and rng.random() < 0.85 else left
        return Equal(left, right)

    def quant(self, ctx, depth) -> Formula:
        rng = self.rng
        q = rng.choice(("forall", "exists"))
        if self.sig.name == "category":
            objs = [n for n, s in ctx if s.name == "O"]
            if objs and rng.random() < 0.6:
                s = SortApp("A", (Var(rng.choice(objs)), Var(rng.choice(objs))))
            else:
                s = SortApp("O")
        else:
            s = SortApp("U")
        v = self.fresh(s.name)
        body = self.formula(ctx + [(v, s)], depth - 1)
        return Quant(q, v, s, body)

    def formula(self, ctx, depth) -> Formula:
        rng = self.rng
        if depth <= 1:
            return self.atom(ctx)
        r = rng.random()
        if not ctx or r < 0.45:
            return self.quant(ctx, depth)
        if r < 0.55:
            return Not(self.formula(ctx, depth - 1))
        if r < 0.8:
            op = rng.choice(("&", "|", "->", "<->"))
            return Binary(op, self.formula(ctx, depth - 1), self.formula(ctx, depth - 1))
        return self.atom(ctx)


def generate_corpus(
    sig: Signature | str,
    count: int,
    *,
    depth: int = 4,
    seed: int = 0,
    fragment_only: bool = False,
) -> list[SortedFormula]:
    """``count`` distinct closed well-sorted formulas of depth at most ``depth``.

    Formulas are built from the active signature's symbols; unless
    ``fragment_only`` they include equalities at every sort (and label atoms
    when the signature has labels), so both lint verdicts occur.
    """
    if isinstance(sig, str):
        sig = builtin_signature(sig)
    rng = random.Random(seed)
    seen: set[str] = set()
    out: list[SortedFormula] = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > count * 200:
            raise RuntimeError(f"corpus generator stalled after {len(out)} formulas")
        gen = _Gen(sig, rng, fragment_only)
        f = gen.formula([], rng.randint(2, depth))
        text = format_formula(f)
        if text in seen:
            continue
        seen.add(text)
        out.append(parse_sorted(text, sig))
    return out
