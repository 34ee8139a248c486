"""Finite sets, monoids, categories and single-sorted algebras.

Composition in categories is written in diagrammatic order throughout:
for ``f: a -> b`` and ``g: b -> c`` the key ``(f, g)`` of the composition
table holds ``f.g : a -> c``.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping, Sequence

from .syntax import EplintError, Signature, builtin_signature, parse_signature


class ModelError(EplintError):
    """A model is malformed (wrong shape, index out of range, bad JSON)."""


class GuardError(EplintError):
    """Requested bounds exceed a configured combinatorial safety limit."""


class ModelClass(enum.Enum):
    SET = "set"
    MONOID = "monoid"
    CATEGORY = "category"


@dataclass(frozen=True)
class Validation:
    """Outcome of an axiom check; falsy when some law fails."""

    ok: bool
    law: str | None = None
    witness: tuple = ()
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


VALID = Validation(True)


def _fail(law: str, witness: tuple, message: str) -> Validation:
    return Validation(False, law, tuple(witness), message)


# -- sets ---------------------------------------------------------------------


@dataclass(frozen=True)
class FinSet:
    """The set {0..size-1}, optionally naming some elements.

    A label names an element the way ``1`` names an element of the natural
    numbers.  Labels are names, not structure: bijections between sets do
    not have to respect them.
    """

    size: int
    labels: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        pairs = list(self.labels.items() if isinstance(self.labels, Mapping) else self.labels)
        items = dict(pairs)
        if len(items) != len(pairs):
            raise ModelError("label names must be distinct")
        object.__setattr__(self, "labels", tuple(sorted(items.items())))
        if self.size < 0:
            raise ModelError("set size must be non-negative")
        for name, idx in self.labels:
            if not 0 <= idx < self.size:
                raise ModelError(f"label {name!r} points at {idx}, outside 0..{self.size - 1}")

    kind = "set"

    @property
    def label_map(self) -> dict[str, int]:
        return dict(self.labels)

    @property
    def signature(self) -> Signature:
        return builtin_signature("set")

    def domain(self, sort: str, index: tuple) -> Sequence[int]:
        return range(self.size)

    def apply(self, name: str, args: tuple) -> int:
        raise KeyError(name)

    def holds(self, name: str, args: tuple) -> bool:
        return self.label_map.get(name) == args[0]

    def apply_bijection(self, perm: Sequence[int]) -> FinSet:
        """Move the carrier along ``perm``; labels follow their elements."""
        return FinSet(self.size, tuple((n, perm[i]) for n, i in self.labels))

    def relabel(self, labels: Mapping[str, int]) -> FinSet:
        """Same carrier, new names for its elements."""
        return FinSet(self.size, tuple(labels.items()))

    def canonical_key(self, label_names: Sequence[str] | None = None) -> tuple:
        names = sorted(label_names if label_names is not None else self.label_map)
        lm = self.label_map
        order: dict[int, int] = {}
        enc = []
        for name in names:
            if name in lm:
                enc.append(order.setdefault(lm[name], len(order)))
            else:
                enc.append(self.size)
        return (self.size, tuple(enc))

    def sort_key(self) -> tuple:
        """Labelled presentation as data; labels sort before absent ones."""
        lm = self.label_map
        return (self.size, tuple((n, lm[n]) for n in sorted(lm)))


def enumerate_sets(n: int, labels: Sequence[str] = ("one",), up_to_iso: bool = False) -> Iterator[FinSet]:
    """Every set of size n with each label either pinned or absent."""
    names = sorted(labels)
    seen = set()
    for choice in itertools.product([*range(n), None], repeat=len(names)):
        s = FinSet(n, tuple((nm, i) for nm, i in zip(names, choice) if i is not None))
        if up_to_iso:
            key = s.canonical_key(names)
            if key in seen:
                continue
            seen.add(key)
        yield s


# -- monoids ------------------------------------------------------------------


@dataclass(frozen=True)
class FinMonoid:
    size: int
    unit: int
    table: tuple[tuple[int, ...], ...]

    kind = "monoid"

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(tuple(row) for row in self.table))
        n = self.size
        if n < 1:
            raise ModelError("a monoid needs at least one element")
        if len(self.table) != n or any(len(row) != n for row in self.table):
            raise ModelError(f"multiplication table must be {n}x{n}")
        if not 0 <= self.unit < n:
            raise ModelError(f"unit {self.unit} out of range")
        for row in self.table:
            for v in row:
                if not 0 <= v < n:
                    raise ModelError(f"table entry {v} out of range 0..{n - 1}")

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    @property
    def signature(self) -> Signature:
        return builtin_signature("monoid")

    def domain(self, sort: str, index: tuple) -> Sequence[int]:
        return range(self.size)

    def apply(self, name: str, args: tuple) -> int:
        if name == "mul":
            return self.table[args[0]][args[1]]
        if name == "unit":
            return self.unit
        raise KeyError(name)

    def holds(self, name: str, args: tuple) -> bool:
        raise KeyError(name)

    def apply_bijection(self, perm: Sequence[int]) -> FinMonoid:
        n = self.size
        inv = [0] * n
        for i, p in enumerate(perm):
            inv[p] = i
        table = tuple(
            tuple(perm[self.table[inv[a]][inv[b]]] for b in range(n)) for a in range(n)
        )
        return FinMonoid(n, perm[self.unit], table)

    def canonical(self) -> FinMonoid:
        """Lexicographically least copy with unit 0 (unit-preserving relabelings)."""
        n = self.size
        others = [i for i in range(n) if i != self.unit]
        best = None
        for rest in itertools.permutations(range(1, n)):
            perm = [0] * n
            perm[self.unit] = 0
            for src, dst in zip(others, rest):
                perm[src] = dst
            cand = self.apply_bijection(perm)
            if best is None or cand.table < best.table:
                best = cand
        return best

    def canonical_key(self) -> tuple:
        c = self.canonical()
        return (c.size, c.table)

    def sort_key(self) -> tuple:
        return (self.size, self.unit, self.table)


def validate_monoid(m: FinMonoid) -> Validation:
    """Check associativity, then left and right neutrality."""
    n, t, e = m.size, m.table, m.unit
    for a in range(n):
        for b in range(n):
            ab = t[a][b]
            for c in range(n):
                if t[ab][c] != t[a][t[b][c]]:
                    return _fail("assoc", (a, b, c), f"({a}*{b})*{c} != {a}*({b}*{c})")
    for a in range(n):
        if t[e][a] != a:
            return _fail("left-unit", (a,), f"e*{a} != {a}")
    for a in range(n):
        if t[a][e] != a:
            return _fail("right-unit", (a,), f"{a}*e != {a}")
    return VALID


def enumerate_monoids(n: int, up_to_iso: bool = False) -> Iterator[FinMonoid]:
    """All monoids on {0..n-1} with unit 0, in lexicographic table order.

    With ``up_to_iso`` only the canonical representative of each class is
    produced.
    """
    if n < 1:
        raise ModelError("monoid enumeration needs n >= 1")
    t = [[None] * n for _ in range(n)]
    for a in range(n):
        t[0][a] = a
        t[a][0] = a
    cells = [(a, b) for a in range(1, n) for b in range(1, n)]
    rng = range(1, n)

    def consistent() -> bool:
        for a in rng:
            for b in rng:
                ab = t[a][b]
                if ab is None:
                    continue
                for c in rng:
                    bc = t[b][c]
                    if bc is None:
                        continue
                    left, right = t[ab][c], t[a][bc]
                    if left is not None and right is not None and left != right:
                        return False
        return True

    def search(k: int):
        if k == len(cells):
            yield FinMonoid(n, 0, tuple(tuple(row) for row in t))
            return
        a, b = cells[k]
        for v in range(n):
            t[a][b] = v
            if consistent():
                yield from search(k + 1)
        t[a][b] = None

    for m in search(0):
        if up_to_iso and m.canonical().table != m.table:
            continue
        yield m


# -- categories ---------------------------------------------------------------


@dataclass(frozen=True)
class Arrow:
    name: str
    src: int
    dst: int


@dataclass(frozen=True)
class FinCategory:
    """Objects 0..objects-1, arrows by index, composition in diagrammatic order."""

    objects: int
    arrows: tuple[Arrow, ...]
    identities: tuple[int, ...]
    compose: tuple[tuple[tuple[int, int], int], ...]

    kind = "category"

    def __post_init__(self):
        object.__setattr__(self, "arrows", tuple(self.arrows))
        object.__setattr__(self, "identities", tuple(self.identities))
        items = self.compose.items() if isinstance(self.compose, Mapping) else self.compose
        object.__setattr__(self, "compose", tuple(sorted((tuple(k), v) for k, v in items)))
        self._check_shape()

    def _check_shape(self):
        n, m = self.objects, len(self.arrows)
        if n < 0:
            raise ModelError("object count must be non-negative")
        names = [a.name for a in self.arrows]
        if len(set(names)) != len(names):
            raise ModelError("arrow names must be distinct")
        for i, a in enumerate(self.arrows):
            if not (0 <= a.src < n and 0 <= a.dst < n):
                raise ModelError(f"arrow {a.name!r} has an endpoint outside 0..{n - 1}")
        if len(self.identities) != n:
            raise ModelError(f"need one identity per object, got {len(self.identities)}")
        for i in self.identities:
            if not 0 <= i < m:
                raise ModelError(f"identity arrow index {i} out of range")
        seen = set()
        for (f, g), k in self.compose:
            if not (0 <= f < m and 0 <= g < m and 0 <= k < m):
                raise ModelError(f"composition entry ({f}, {g}) -> {k} out of range")
            if (f, g) in seen:
                raise ModelError(f"duplicate composition entry for ({f}, {g})")
            seen.add((f, g))
            if self.arrows[f].dst != self.arrows[g].src:
                raise ModelError(
                    f"composition defined on non-composable pair "
                    f"({self.arrows[f].name}, {self.arrows[g].name})"
                )
        for f in range(m):
            for g in range(m):
                if self.arrows[f].dst == self.arrows[g].src and (f, g) not in seen:
                    raise ModelError(
                        f"missing composition for composable pair "
                        f"({self.arrows[f].name}, {self.arrows[g].name})"
                    )

    @cached_property
    def table(self) -> dict[tuple[int, int], int]:
        return dict(self.compose)

    @cached_property
    def homs(self) -> dict[tuple[int, int], tuple[int, ...]]:
        out: dict[tuple[int, int], list[int]] = {}
        for i, a in enumerate(self.arrows):
            out.setdefault((a.src, a.dst), []).append(i)
        return {k: tuple(v) for k, v in out.items()}

    def hom(self, a: int, b: int) -> tuple[int, ...]:
        return self.homs.get((a, b), ())

    def hom_from(self, a: int) -> tuple[int, ...]:
        return tuple(j for j, arr in enumerate(self.arrows) if arr.src == a)

    def comp(self, f: int, g: int) -> int:
        return self.table[(f, g)]

    def src(self, f: int) -> int:
        return self.arrows[f].src

    def dst(self, f: int) -> int:
        return self.arrows[f].dst

    @property
    def size(self) -> tuple[int, int]:
        return (self.objects, len(self.arrows))

    @property
    def signature(self) -> Signature:
        return builtin_signature("category")

    def domain(self, sort: str, index: tuple) -> Sequence[int]:
        if sort == "O":
            return range(self.objects)
        return self.hom(index[0], index[1])

    def apply(self, name: str, args: tuple) -> int:
        if name == "comp":
            return self.table[args]
        if name == "id":
            return self.identities[args[0]]
        raise KeyError(name)

    def holds(self, name: str, args: tuple) -> bool:
        raise KeyError(name)

    def relabel(self, obj_perm: Sequence[int], arrow_perm: Sequence[int]) -> FinCategory:
        """Isomorphic copy: object i becomes obj_perm[i], arrow j becomes arrow_perm[j]."""
        m = len(self.arrows)
        arrows: list[Arrow | None] = [None] * m
        for j, a in enumerate(self.arrows):
            arrows[arrow_perm[j]] = Arrow(a.name, obj_perm[a.src], obj_perm[a.dst])
        idents = [0] * self.objects
        for x, i in enumerate(self.identities):
            idents[obj_perm[x]] = arrow_perm[i]
        comp = {(arrow_perm[f], arrow_perm[g]): arrow_perm[k] for (f, g), k in self.compose}
        return FinCategory(self.objects, tuple(arrows), tuple(idents), comp)

    def layout_perm(self) -> list[int]:
        """Arrow permutation putting arrows hom by hom, identity first."""
        idset = set(self.identities)
        order = sorted(
            range(len(self.arrows)),
            key=lambda j: (self.arrows[j].src, self.arrows[j].dst, j not in idset, j),
        )
        perm = [0] * len(order)
        for new, old in enumerate(order):
            perm[old] = new
        return perm

    def normalized(self) -> FinCategory:
        return self.relabel(range(self.objects), self.layout_perm())

    def renamed(self) -> FinCategory:
        """Replace arrow names by ``id<x>`` / ``f<j>`` (layout-independent)."""
        idx = {i: x for x, i in enumerate(self.identities)}
        arrows = tuple(
            Arrow(f"id{idx[j]}" if j in idx else f"f{j}", a.src, a.dst)
            for j, a in enumerate(self.arrows)
        )
        return FinCategory(self.objects, arrows, self.identities, self.compose)

    def encoding(self) -> tuple:
        """Name-free encoding; only meaningful for normalized layouts."""
        n = self.objects
        h = tuple(len(self.hom(a, b)) for a in range(n) for b in range(n))
        return (n, h, self.compose)

    def canonical_key(self) -> tuple:
        return _canonical(self)[1]

    def canonical(self) -> FinCategory:
        return _canonical(self)[0]

    def sort_key(self) -> tuple:
        return (self.objects, len(self.arrows), self.normalized().encoding())


def _canonical(c: FinCategory) -> tuple[FinCategory, tuple]:
    """Least encoding over object permutations and per-hom arrow shuffles.

    Candidates are compared on the hom-size matrix first, then on the
    results of all non-identity composites listed in layout order.
    """
    cached = c.__dict__.get("_canon")
    if cached is not None:
        return cached
    base = c.normalized()
    n = base.objects
    idset = set(base.identities)
    table = base.table
    best_mat = None
    candidates = []
    for op in itertools.permutations(range(n)):
        inv = [0] * n
        for i, p in enumerate(op):
            inv[p] = i
        mat = tuple(len(base.hom(inv[a], inv[b])) for a in range(n) for b in range(n))
        if best_mat is None or mat < best_mat:
            best_mat, candidates = mat, [inv]
        elif mat == best_mat:
            candidates.append(inv)
    if best_mat is None:
        result = (base, (0, (), ()))
        c.__dict__["_canon"] = result
        return result
    starts = []
    pos = 0
    for cell in range(n * n):
        starts.append(pos)
        pos += best_mat[cell]
    new_src = [0] * pos
    new_dst = [0] * pos
    for cell in range(n * n):
        a, b = divmod(cell, n)
        for k in range(best_mat[cell]):
            new_src[starts[cell] + k] = a
            new_dst[starts[cell] + k] = b
    new_ids = {starts[a * n + a] for a in range(n)}
    slots = [
        (F, G)
        for F in range(pos)
        if F not in new_ids
        for G in range(pos)
        if G not in new_ids and new_dst[F] == new_src[G]
    ]
    profile = _arrow_profiles(base)
    best_enc = None
    best_perm = None
    best_op = None
    for inv in candidates:
        blocks = []
        for cell in range(n * n):
            a, b = divmod(cell, n)
            members = sorted(
                (j for j in base.hom(inv[a], inv[b]) if j not in idset),
                key=lambda j: profile[j],
            )
            groups = [list(g) for _, g in itertools.groupby(members, key=lambda j: profile[j])]
            blocks.append(_ordered_shuffles(groups))
        for shuffles in itertools.product(*blocks):
            perm = [0] * pos
            back = [0] * pos
            for a in range(n):
                perm[base.identities[inv[a]]] = starts[a * n + a]
            for cell, shuffled in enumerate(shuffles):
                a, b = divmod(cell, n)
                offset = starts[cell] + (1 if a == b else 0)
                for k, j in enumerate(shuffled):
                    perm[j] = offset + k
            for j, q in enumerate(perm):
                back[q] = j
            enc = tuple(perm[table[(back[F], back[G])]] for F, G in slots)
            if best_enc is None or enc < best_enc:
                best_enc, best_perm, best_op = enc, perm, inv
    op = [0] * n
    for new, old in enumerate(best_op):
        op[old] = new
    canon = base.relabel(op, best_perm).renamed()
    result = (canon, (n, best_mat, best_enc))
    c.__dict__["_canon"] = result
    return result


def _arrow_profiles(c: FinCategory) -> list[tuple]:
    """Isomorphism-invariant summary of each arrow.

    The canonical labelling only permutes arrows of equal profile, with
    profiles ascending inside every hom-set.
    """
    m = len(c.arrows)
    table = c.table
    left = [0] * m
    right = [0] * m
    hits = [0] * m
    for (f, g), k in c.compose:
        hits[k] += 1
        if k == g:
            left[g] += 1
        if k == f:
            right[f] += 1
    idset = set(c.identities)
    out = []
    for j, a in enumerate(c.arrows):
        sq: tuple = ()
        if a.src == a.dst:
            powers = [j]
            while True:
                nxt = table[(powers[-1], j)]
                if nxt in powers:
                    sq = (len(powers), powers.index(nxt), nxt in idset)
                    break
                powers.append(nxt)
        out.append((left[j], right[j], hits[j], sq))
    return out


def _ordered_shuffles(groups: list[list[int]]) -> list[tuple[int, ...]]:
    return [
        tuple(itertools.chain.from_iterable(parts))
        for parts in itertools.product(*[itertools.permutations(g) for g in groups])
    ]


def validate_category(c: FinCategory) -> Validation:
    """Identity typing, composite typing, unit laws, associativity."""
    for x, i in enumerate(c.identities):
        a = c.arrows[i]
        if a.src != x or a.dst != x:
            return _fail("identity-typing", (x, i), f"identity of {x} is {a.name}: {a.src}->{a.dst}")
    for (f, g), k in c.compose:
        if c.src(k) != c.src(f) or c.dst(k) != c.dst(g):
            return _fail(
                "typing",
                (f, g),
                f"{c.arrows[f].name}.{c.arrows[g].name} = {c.arrows[k].name} "
                f"has the wrong endpoints",
            )
    t = c.table
    for f, a in enumerate(c.arrows):
        if t[(c.identities[a.src], f)] != f:
            return _fail("left-unit", (f,), f"1.{a.name} != {a.name}")
        if t[(f, c.identities[a.dst])] != f:
            return _fail("right-unit", (f,), f"{a.name}.1 != {a.name}")
    for (f, g), fg in c.compose:
        for h in c.hom_from(c.dst(g)):
            if t[(fg, h)] != t[(f, t[(g, h)])]:
                names = tuple(c.arrows[i].name for i in (f, g, h))
                return _fail("assoc", (f, g, h), "(%s.%s).%s != %s.(%s.%s)" % (names * 2))
    return VALID


# -- category enumeration -----------------------------------------------------

#: Most non-identity arrows enumerate_categories accepts without an override.
#: The search space grows with the non-identity arrows, not the objects.
CATEGORY_EXTRA_ARROW_LIMIT = 4
#: Largest object count enumerate_categories accepts without an override.
CATEGORY_OBJECT_LIMIT = 4


def category_guard(
    objects: int,
    max_arrows: int,
    extra_arrow_limit: int | None = None,
    object_limit: int | None = None,
) -> None:
    """Raise :class:`GuardError` if the bounds are past the safety limits."""
    if objects == 0:
        return  # only the empty category
    extra = CATEGORY_EXTRA_ARROW_LIMIT if extra_arrow_limit is None else extra_arrow_limit
    olim = CATEGORY_OBJECT_LIMIT if object_limit is None else object_limit
    if objects > olim or max_arrows - objects > extra:
        raise GuardError(
            f"refusing to enumerate categories with {objects} objects and up to "
            f"{max_arrows} arrows: safety limit is {olim} objects and "
            f"{extra} non-identity arrows"
        )


def _hom_matrices(n: int, max_arrows: int, canonical_only: bool) -> Iterator[tuple[int, ...]]:
    cells = n * n
    perms = list(itertools.permutations(range(n)))

    def rec(k, remaining, acc):
        if k == cells:
            yield tuple(acc)
            return
        a, b = divmod(k, n)
        lo = 1 if a == b else 0
        # reserve one identity for each later diagonal cell
        later_diag = sum(1 for d in range(n) if d * n + d > k)
        for v in range(lo, remaining - later_diag + 1):
            acc.append(v)
            yield from rec(k + 1, remaining - v, acc)
            acc.pop()

    for mat in rec(0, max_arrows, []):
        ok = True
        for a in range(n):
            for b in range(n):
                if mat[a * n + b] == 0:
                    continue
                for c in range(n):
                    if mat[b * n + c] and not mat[a * n + c]:
                        ok = False
        if not ok:
            continue
        if canonical_only:
            if any(
                tuple(mat[p[a] * n + p[b]] for a in range(n) for b in range(n)) < mat
                for p in perms
            ):
                continue
        yield mat


def _categories_with_matrix(n: int, mat: tuple[int, ...]) -> Iterator[FinCategory]:
    arrows: list[Arrow] = []
    identities = [0] * n
    for a in range(n):
        for b in range(n):
            for k in range(mat[a * n + b]):
                j = len(arrows)
                if a == b and k == 0:
                    identities[a] = j
                    arrows.append(Arrow(f"id{a}", a, b))
                else:
                    arrows.append(Arrow(f"f{j}", a, b))
    m = len(arrows)
    idset = set(identities)
    homs: dict[tuple[int, int], list[int]] = {}
    for j, arr in enumerate(arrows):
        homs.setdefault((arr.src, arr.dst), []).append(j)
    comp = [[None] * m for _ in range(m)]
    unknown = []
    for f in range(m):
        for g in range(m):
            if arrows[f].dst != arrows[g].src:
                continue
            if f in idset:
                comp[f][g] = g
            elif g in idset:
                comp[f][g] = f
            else:
                unknown.append((f, g, homs[(arrows[f].src, arrows[g].dst)]))
    nonid = [j for j in range(m) if j not in idset]
    after = [[h for h in nonid if arrows[h].src == arrows[q].dst] for q in range(m)]
    before = [[f for f in nonid if arrows[f].dst == arrows[p].src] for p in range(m)]
    # non-identity pairs currently composing to k
    pre: list[list[tuple[int, int]]] = [[] for _ in range(m)]

    def consistent(p: int, q: int, v: int) -> bool:
        # (p, q) as the inner pair (f, g) of a triple (f, g, h)
        for h in after[q]:
            gh = comp[q][h]
            if gh is not None:
                left, right = comp[v][h], comp[p][gh]
                if left is not None and right is not None and left != right:
                    return False
        # (p, q) as the inner pair (g, h)
        for f in before[p]:
            fg = comp[f][p]
            if fg is not None:
                left, right = comp[fg][q], comp[f][v]
                if left is not None and right is not None and left != right:
                    return False
        # (p, q) as the outer product ((f.g), h) with f.g = p
        for f, g in pre[p]:
            gq = comp[g][q]
            if gq is not None:
                right = comp[f][gq]
                if right is not None and right != v:
                    return False
        # (p, q) as the outer product (f, (g.h)) with g.h = q
        for g, h in pre[q]:
            pg = comp[p][g]
            if pg is not None:
                left = comp[pg][h]
                if left is not None and left != v:
                    return False
        return True

    def search(k):
        if k == len(unknown):
            table = {(f, g): comp[f][g] for f in range(m) for g in range(m) if comp[f][g] is not None}
            yield FinCategory(n, tuple(arrows), tuple(identities), table)
            return
        p, q, choices = unknown[k]
        for v in choices:
            comp[p][q] = v
            pre[v].append((p, q))
            if consistent(p, q, v):
                yield from search(k + 1)
            pre[v].pop()
        comp[p][q] = None

    yield from search(0)


def enumerate_categories(
    max_objects: int,
    max_arrows: int,
    up_to_iso: bool = False,
    *,
    extra_arrow_limit: int | None = None,
    object_limit: int | None = None,
) -> Iterator[FinCategory]:
    """Categories with exactly ``max_objects`` objects and at most ``max_arrows`` arrows.

    Arrows come hom by hom with the identity first, so distinct yields are
    distinct labelled structures.  With ``up_to_iso`` one canonical
    representative per isomorphism class is produced, ordered by canonical
    key.  Bounds beyond the safety limits raise :class:`GuardError`.
    """
    if max_objects < 0:
        raise ModelError("object count must be non-negative")
    if max_arrows < max_objects:
        raise ModelError("max_arrows must be at least the object count (identities are arrows)")
    category_guard(max_objects, max_arrows, extra_arrow_limit, object_limit)
    n = max_objects
    if not up_to_iso:
        for mat in _hom_matrices(n, max_arrows, canonical_only=False):
            yield from _categories_with_matrix(n, mat)
        return
    found: dict[tuple, FinCategory] = {}
    for mat in _hom_matrices(n, max_arrows, canonical_only=True):
        for c in _categories_with_matrix(n, mat):
            key = c.canonical_key()
            if key not in found:
                found[key] = c.canonical()
    for key in sorted(found):
        yield found[key]


# -- fixtures -----------------------------------------------------------------


def category_from_lists(objects: int, arrows, identities, compose) -> FinCategory:
    """Build from ``[(name, src, dst), ...]`` and ``{(f, g): k}`` by name or index."""
    arrs = tuple(Arrow(*a) if not isinstance(a, Arrow) else a for a in arrows)
    index = {a.name: i for i, a in enumerate(arrs)}
    resolve = lambda v: index[v] if isinstance(v, str) else v
    comp = {(resolve(f), resolve(g)): resolve(k) for (f, g), k in dict(compose).items()}
    return FinCategory(objects, arrs, tuple(resolve(i) for i in identities), comp)


def _complete_with_units(objects, arrows, identities, products):
    """Fill in identity compositions around the given non-trivial products."""
    comp = dict(products)
    names = [a[0] for a in arrows]
    ids = list(identities)
    for i, (name, s, t) in enumerate(arrows):
        comp[(ids[s], name)] = name
        comp[(name, ids[t])] = name
    return category_from_lists(objects, arrows, ids, comp)


def empty_category() -> FinCategory:
    return FinCategory(0, (), (), {})


def terminal_category() -> FinCategory:
    return _complete_with_units(1, [("id0", 0, 0)], ["id0"], {})


def discrete_category(n: int) -> FinCategory:
    arrows = [(f"id{x}", x, x) for x in range(n)]
    return _complete_with_units(n, arrows, [a[0] for a in arrows], {})


def walking_arrow() -> FinCategory:
    arrows = [("id0", 0, 0), ("f", 0, 1), ("id1", 1, 1)]
    return _complete_with_units(2, arrows, ["id0", "id1"], {})


def walking_iso() -> FinCategory:
    """Two objects and a mutually inverse pair f: 0 -> 1, g: 1 -> 0."""
    arrows = [("id0", 0, 0), ("f", 0, 1), ("g", 1, 0), ("id1", 1, 1)]
    return _complete_with_units(
        2, arrows, ["id0", "id1"], {("f", "g"): "id0", ("g", "f"): "id1"}
    )


def monoid_category(m: FinMonoid) -> FinCategory:
    """One-object category whose arrows are the monoid elements; f.g = f*g."""
    names = ["id0" if a == m.unit else f"m{a}" for a in range(m.size)]
    arrows = tuple(Arrow(names[a], 0, 0) for a in range(m.size))
    comp = {(a, b): m.table[a][b] for a in range(m.size) for b in range(m.size)}
    return FinCategory(1, arrows, (m.unit,), comp)


def z2() -> FinMonoid:
    return FinMonoid(2, 0, ((0, 1), (1, 0)))


def semilattice2() -> FinMonoid:
    return FinMonoid(2, 0, ((0, 1), (1, 1)))


def trivial_monoid() -> FinMonoid:
    return FinMonoid(1, 0, ((0,),))


# -- generic single-sorted algebras ------------------------------------------


@dataclass(frozen=True)
class Operation:
    name: str
    arity: int
    table: tuple[int, ...]  # row-major over argument tuples

    def __call__(self, *args: int) -> int:
        return self.table[self.index(args)]

    def index(self, args: Sequence[int]) -> int:
        n = round(len(self.table) ** (1 / self.arity)) if self.arity else 1
        i = 0
        for a in args:
            i = i * n + a
        return i


@dataclass(frozen=True)
class FinAlgebra:
    """Carrier {0..size-1} with named operation tables and equational axioms.

    ``axioms`` are closed formulas over :attr:`signature` (one sort ``U``, one
    function symbol per operation).
    """

    size: int
    operations: tuple[Operation, ...]
    axioms: tuple[str, ...] = ()
    name: str = "algebra"

    kind = "algebra"

    def __post_init__(self):
        object.__setattr__(self, "operations", tuple(self.operations))
        object.__setattr__(self, "axioms", tuple(self.axioms))
        names = [op.name for op in self.operations]
        if len(set(names)) != len(names):
            raise ModelError("operation names must be distinct")
        for op in self.operations:
            if op.arity < 0:
                raise ModelError(f"operation {op.name} has negative arity")
            if len(op.table) != self.size ** op.arity:
                raise ModelError(
                    f"operation {op.name} of arity {op.arity} needs "
                    f"{self.size ** op.arity} entries, got {len(op.table)}"
                )
            if any(not 0 <= v < self.size for v in op.table):
                raise ModelError(f"operation {op.name} has an entry out of range")

    def op(self, name: str) -> Operation:
        for o in self.operations:
            if o.name == name:
                return o
        raise KeyError(name)

    @cached_property
    def signature(self) -> Signature:
        lines = [f"signature {self.name};", "sort U;"]
        for o in self.operations:
            params = ", ".join(f"a{i}:U" for i in range(o.arity))
            lines.append(f"fun {o.name}({params}) : U;")
        return parse_signature("\n".join(lines))

    def domain(self, sort: str, index: tuple) -> Sequence[int]:
        return range(self.size)

    def apply(self, name: str, args: tuple) -> int:
        return self.op(name)(*args)

    def holds(self, name: str, args: tuple) -> bool:
        raise KeyError(name)


def algebra_from_monoid(m: FinMonoid, axioms: Sequence[str] = ()) -> FinAlgebra:
    n = m.size
    ops = (
        Operation("unit", 0, (m.unit,)),
        Operation("mul", 2, tuple(m.table[a][b] for a in range(n) for b in range(n))),
    )
    return FinAlgebra(n, ops, tuple(axioms), "monoid")


# -- JSON ---------------------------------------------------------------------

_KEYS = {
    "set": {"kind", "size", "labels"},
    "monoid": {"kind", "size", "unit", "table"},
    "category": {"kind", "objects", "arrows", "identities", "compose"},
}


def model_to_json(model) -> dict:
    if isinstance(model, FinSet):
        return {"kind": "set", "size": model.size, "labels": model.label_map}
    if isinstance(model, FinMonoid):
        return {
            "kind": "monoid",
            "size": model.size,
            "unit": model.unit,
            "table": [list(r) for r in model.table],
        }
    if isinstance(model, FinCategory):
        return {
            "kind": "category",
            "objects": model.objects,
            "arrows": [{"name": a.name, "src": a.src, "dst": a.dst} for a in model.arrows],
            "identities": list(model.identities),
            "compose": [{"first": f, "then": g, "result": k} for (f, g), k in model.compose],
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def _expect(cond: bool, message: str):
    if not cond:
        raise ModelError(message)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def model_from_json(data) -> FinSet | FinMonoid | FinCategory:
    """Decode and validate; unknown keys and failed axioms raise ModelError."""
    _expect(isinstance(data, dict), "model must be a JSON object")
    kind = data.get("kind")
    _expect(kind in _KEYS, f"unknown model kind {kind!r}")
    extra = set(data) - _KEYS[kind]
    _expect(not extra, f"unknown key(s) for {kind}: {', '.join(sorted(extra))}")
    missing = _KEYS[kind] - set(data) - ({"labels"} if kind == "set" else set())
    _expect(not missing, f"missing key(s) for {kind}: {', '.join(sorted(missing))}")
    if kind == "set":
        labels = data.get("labels", {})
        _expect(_is_int(data["size"]), "size must be an integer")
        _expect(isinstance(labels, dict), "labels must be an object")
        _expect(all(_is_int(v) for v in labels.values()), "label indices must be integers")
        return FinSet(data["size"], tuple(labels.items()))
    if kind == "monoid":
        _expect(_is_int(data["size"]) and _is_int(data["unit"]), "size and unit must be integers")
        table = data["table"]
        _expect(
            isinstance(table, list) and all(isinstance(r, list) and all(_is_int(v) for v in r) for r in table),
            "table must be a list of integer rows",
        )
        m = FinMonoid(data["size"], data["unit"], tuple(tuple(r) for r in table))
        v = validate_monoid(m)
        _expect(v.ok, f"not a monoid: {v.law} fails at {v.witness}")
        return m
    _expect(_is_int(data["objects"]), "objects must be an integer")
    arrows = data["arrows"]
    _expect(isinstance(arrows, list), "arrows must be a list")
    arrs = []
    for a in arrows:
        _expect(isinstance(a, dict) and set(a) == {"name", "src", "dst"}, "arrow entries need exactly name, src, dst")
        _expect(isinstance(a["name"], str) and _is_int(a["src"]) and _is_int(a["dst"]), "bad arrow entry")
        arrs.append(Arrow(a["name"], a["src"], a["dst"]))
    ids = data["identities"]
    _expect(isinstance(ids, list) and all(_is_int(i) for i in ids), "identities must be integers")
    comp = {}
    for e in data["compose"]:
        _expect(isinstance(e, dict) and set(e) == {"first", "then", "result"}, "compose entries need exactly first, then, result")
        _expect(all(_is_int(e[k]) for k in e), "compose entries must be integers")
        _expect((e["first"], e["then"]) not in comp, f"duplicate compose entry ({e['first']}, {e['then']})")
        comp[(e["first"], e["then"])] = e["result"]
    c = FinCategory(data["objects"], tuple(arrs), tuple(ids), comp)
    v = validate_category(c)
    _expect(v.ok, f"not a category: {v.law} fails: {v.message}")
    return c


def dumps_model(model) -> str:
    return json.dumps(model_to_json(model), sort_keys=False, separators=(",", ":"))


def load_model(path) -> FinSet | FinMonoid | FinCategory:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as e:
        raise ModelError(f"{path}: invalid JSON: {e}") from None
    return model_from_json(data)
