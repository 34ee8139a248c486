"""Bijections, monoid isomorphisms, functors, natural isomorphisms and
equivalences between finite categories.

Composition is diagrammatic throughout: ``comp(f, g)`` is "f then g".  A
natural transformation ``c: F => G`` has components ``c[x]: F x -> G x`` and
is natural when ``F f . c[y] == c[x] . G f`` for every ``f: x -> y``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterator, Sequence

from .models import (
    VALID,
    Arrow,
    FinCategory,
    FinMonoid,
    GuardError,
    ModelError,
    Validation,
    _fail,
)

FUNCTOR_OBJECT_LIMIT = 4
FUNCTOR_ARROW_LIMIT = 12


# -- bijections ------------------------------------------------------------------


@dataclass(frozen=True)
class Bijection:
    forward: tuple[int, ...]
    inverse: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "forward", tuple(self.forward))
        object.__setattr__(self, "inverse", tuple(self.inverse))
        n = len(self.forward)
        if len(self.inverse) != n:
            raise ModelError("bijection arrays differ in length")
        for i, j in enumerate(self.forward):
            if not 0 <= j < n or self.inverse[j] != i:
                raise ModelError(f"not a bijection: {list(self.forward)}")

    @classmethod
    def from_images(cls, images: Sequence[int]) -> Bijection:
        images = tuple(images)
        n = len(images)
        if sorted(images) != list(range(n)):
            raise ModelError(f"not a permutation of 0..{n - 1}: {list(images)}")
        inv = [0] * n
        for i, j in enumerate(images):
            inv[j] = i
        return cls(images, tuple(inv))

    @classmethod
    def identity(cls, n: int) -> Bijection:
        return cls(tuple(range(n)), tuple(range(n)))

    @property
    def size(self) -> int:
        return len(self.forward)

    def __call__(self, i: int) -> int:
        return self.forward[i]

    def inverted(self) -> Bijection:
        return Bijection(self.inverse, self.forward)

    def then(self, other: Bijection) -> Bijection:
        """First ``self``, then ``other``."""
        if other.size != self.size:
            raise ModelError("cannot compose bijections of different sizes")
        return Bijection.from_images(other.forward[i] for i in self.forward)


def all_bijections(n: int) -> Iterator[Bijection]:
    for p in itertools.permutations(range(n)):
        yield Bijection.from_images(p)


# -- monoids -----------------------------------------------------------------------


def is_monoid_iso(m: FinMonoid, m2: FinMonoid, sigma: Bijection) -> bool:
    if m.size != m2.size or sigma.size != m.size:
        return False
    if sigma(m.unit) != m2.unit:
        return False
    f = sigma.forward
    return all(
        f[m.table[a][b]] == m2.table[f[a]][f[b]] for a in range(m.size) for b in range(m.size)
    )


def enumerate_monoid_isos(m: FinMonoid, m2: FinMonoid) -> Iterator[Bijection]:
    """Every unit- and multiplication-preserving bijection, lexicographically."""
    if m.size != m2.size:
        return
    n = m.size
    rest = [a for a in range(n) if a != m.unit]
    targets = [b for b in range(n) if b != m2.unit]
    for p in itertools.permutations(targets):
        images = [0] * n
        images[m.unit] = m2.unit
        for a, b in zip(rest, p):
            images[a] = b
        sigma = Bijection.from_images(images)
        if is_monoid_iso(m, m2, sigma):
            yield sigma


# -- isomorphisms inside a category ------------------------------------------------------


def arrow_isos(c: FinCategory) -> tuple[int | None, ...]:
    """Inverse of each arrow, or ``None`` when it has none."""
    cached = c.__dict__.get("_isos")
    if cached is not None:
        return cached
    out: list[int | None] = []
    for f, a in enumerate(c.arrows):
        inv = None
        for g in c.hom(a.dst, a.src):
            if c.comp(f, g) == c.identities[a.src] and c.comp(g, f) == c.identities[a.dst]:
                inv = g
                break
        out.append(inv)
    c.__dict__["_isos"] = result = tuple(out)
    return result


def iso_classes(c: FinCategory) -> list[list[int]]:
    """Objects grouped by isomorphism, each group ascending, groups by least member."""
    inverses = arrow_isos(c)
    seen: set[int] = set()
    classes = []
    for x in range(c.objects):
        if x in seen:
            continue
        group = [y for y in range(c.objects) if y == x or _has_iso(c, inverses, x, y)]
        seen.update(group)
        classes.append(group)
    return classes


def _has_iso(c: FinCategory, inverses, x: int, y: int) -> bool:
    return any(inverses[f] is not None for f in c.hom(x, y))


# -- functors -------------------------------------------------------------------------


@dataclass(frozen=True)
class Functor:
    source: FinCategory
    target: FinCategory
    objects: tuple[int, ...]
    arrows: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "arrows", tuple(self.arrows))

    def obj(self, x: int) -> int:
        return self.objects[x]

    def arr(self, f: int) -> int:
        return self.arrows[f]

    def then(self, other: Functor) -> Functor:
        return Functor(
            self.source,
            other.target,
            tuple(other.objects[x] for x in self.objects),
            tuple(other.arrows[f] for f in self.arrows),
        )

    def to_json(self) -> dict:
        return {"objects": list(self.objects), "arrows": list(self.arrows)}


def identity_functor(c: FinCategory) -> Functor:
    return Functor(c, c, tuple(range(c.objects)), tuple(range(len(c.arrows))))


def validate_functor(F: Functor) -> Validation:
    a, b = F.source, F.target
    if len(F.objects) != a.objects or len(F.arrows) != len(a.arrows):
        return _fail("shape", (), "object or arrow map has the wrong length")
    if any(not 0 <= y < b.objects for y in F.objects):
        return _fail("shape", (), "object map leaves the target")
    if any(not 0 <= g < len(b.arrows) for g in F.arrows):
        return _fail("shape", (), "arrow map leaves the target")
    for f, arr in enumerate(a.arrows):
        img = b.arrows[F.arrows[f]]
        if (img.src, img.dst) != (F.objects[arr.src], F.objects[arr.dst]):
            return _fail("typing", (f,), f"{arr.name} is sent outside B(F {arr.src}, F {arr.dst})")
    for x, i in enumerate(a.identities):
        if F.arrows[i] != b.identities[F.objects[x]]:
            return _fail("identity", (x,), f"F does not send the identity of {x} to an identity")
    for (f, g), k in a.compose:
        if b.comp(F.arrows[f], F.arrows[g]) != F.arrows[k]:
            return _fail("composition", (f, g), f"F({f}.{g}) differs from F{f}.F{g}")
    return VALID


def _guard(c: FinCategory, object_limit: int | None, arrow_limit: int | None) -> None:
    ol = FUNCTOR_OBJECT_LIMIT if object_limit is None else object_limit
    al = FUNCTOR_ARROW_LIMIT if arrow_limit is None else arrow_limit
    if c.objects > ol or len(c.arrows) > al:
        raise GuardError(
            f"functor search refused: category with {c.objects} objects and "
            f"{len(c.arrows)} arrows exceeds the limit of {ol} objects / {al} arrows"
        )


def _arrow_search(a: FinCategory, b: FinCategory, om: Sequence[int], candidates):
    """Backtrack over arrow maps given an object map.

    ``candidates(f, hom)`` restricts the images of arrow ``f`` inside ``hom``.
    Each composition constraint is checked as soon as its three arrows are
    assigned.
    """
    m = len(a.arrows)
    order = list(range(m))
    checks: list[list[tuple[int, int, int]]] = [[] for _ in range(m)]
    for (f, g), k in a.compose:
        checks[max(f, g, k)].append((f, g, k))
    fixed = {i: b.identities[om[x]] for x, i in enumerate(a.identities)}
    image = [-1] * m
    btable = b.table

    def rec(pos: int):
        if pos == m:
            yield tuple(image)
            return
        f = order[pos]
        arr = a.arrows[f]
        hom = b.hom(om[arr.src], om[arr.dst])
        opts = (fixed[f],) if f in fixed else candidates(f, hom)
        for g in opts:
            image[f] = g
            if all(btable[(image[p], image[q])] == image[r] for p, q, r in checks[f]):
                yield from rec(pos + 1)
        image[f] = -1

    yield from rec(0)


def enumerate_functors(
    a: FinCategory,
    b: FinCategory,
    *,
    object_limit: int | None = None,
    arrow_limit: int | None = None,
) -> Iterator[Functor]:
    """All functors ``a -> b`` in lexicographic order of (object map, arrow map)."""
    _guard(a, object_limit, arrow_limit)
    _guard(b, object_limit, arrow_limit)
    for om in itertools.product(range(b.objects), repeat=a.objects):
        for am in _arrow_search(a, b, om, lambda f, hom: hom):
            yield Functor(a, b, om, am)


def is_fully_faithful(F: Functor) -> bool:
    a, b = F.source, F.target
    for x in range(a.objects):
        for y in range(a.objects):
            images = sorted(F.arrows[f] for f in a.hom(x, y))
            if images != sorted(b.hom(F.objects[x], F.objects[y])):
                return False
    return True


def is_essentially_surjective(F: Functor) -> bool:
    b = F.target
    inverses = arrow_isos(b)
    hit = set(F.objects)
    return all(any(y == x or _has_iso(b, inverses, x, y) for x in hit) for y in range(b.objects))


def functor_properties(F: Functor) -> tuple[bool, bool]:
    """(fully faithful, essentially surjective)."""
    return is_fully_faithful(F), is_essentially_surjective(F)


# -- natural isomorphisms and equivalences --------------------------------------------


@dataclass(frozen=True)
class NatIso:
    """Components ``c[x]: F x -> G x``."""

    source: Functor
    target: Functor
    components: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))


def validate_natiso(t: NatIso, name: str = "natural isomorphism") -> Validation:
    F, G = t.source, t.target
    a, b = F.source, F.target
    if G.source != a or G.target != b:
        return _fail(f"{name}-shape", (), "functors are not parallel")
    if len(t.components) != a.objects:
        return _fail(f"{name}-shape", (), "one component per object is required")
    inverses = arrow_isos(b)
    for x, c in enumerate(t.components):
        if not 0 <= c < len(b.arrows):
            return _fail(f"{name}-shape", (x,), f"component at {x} is not an arrow")
        arr = b.arrows[c]
        if (arr.src, arr.dst) != (F.objects[x], G.objects[x]):
            return _fail(f"{name}-typing", (x,), f"component at {x} is not an arrow F {x} -> G {x}")
    for f, arr in enumerate(a.arrows):
        lhs = b.comp(F.arrows[f], t.components[arr.dst])
        rhs = b.comp(t.components[arr.src], G.arrows[f])
        if lhs != rhs:
            return _fail(
                f"{name}-naturality",
                (f,),
                f"square at arrow {a.arrows[f].name} ({arr.src} -> {arr.dst}) does not commute",
            )
    for x, c in enumerate(t.components):
        if inverses[c] is None:
            return _fail(f"{name}-iso", (x,), f"component at {x} is not an isomorphism")
    return VALID


@dataclass(frozen=True)
class EquivalenceWitness:
    """``F: A -> B``, ``G: B -> A``, ``eta[a]: a -> G(F a)``, ``epsilon[b]: b -> F(G b)``."""

    F: Functor
    G: Functor
    eta: tuple[int, ...]
    epsilon: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "eta", tuple(self.eta))
        object.__setattr__(self, "epsilon", tuple(self.epsilon))

    @property
    def source(self) -> FinCategory:
        return self.F.source

    @property
    def target(self) -> FinCategory:
        return self.F.target

    def eta_iso(self) -> NatIso:
        return NatIso(identity_functor(self.source), self.F.then(self.G), self.eta)

    def epsilon_iso(self) -> NatIso:
        return NatIso(identity_functor(self.target), self.G.then(self.F), self.epsilon)

    def to_json(self) -> dict:
        return {
            "F": self.F.to_json(),
            "G": self.G.to_json(),
            "eta": list(self.eta),
            "epsilon": list(self.epsilon),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))


def validate_witness(w: EquivalenceWitness) -> Validation:
    if w.G.source != w.F.target or w.G.target != w.F.source:
        return _fail("shape", (), "G does not go back from the target of F to its source")
    for label, fn in (("F", w.F), ("G", w.G)):
        v = validate_functor(fn)
        if not v:
            return Validation(False, f"{label}-{v.law}", v.witness, f"{label}: {v.message}")
    v = validate_natiso(w.eta_iso(), "eta")
    if not v:
        return v
    return validate_natiso(w.epsilon_iso(), "epsilon")


def identity_witness(c: FinCategory) -> EquivalenceWitness:
    one = identity_functor(c)
    return EquivalenceWitness(one, one, c.identities, c.identities)


def swap_witness(w: EquivalenceWitness) -> EquivalenceWitness:
    """The same equivalence read from B to A.

    With F and G exchanged, eta of the swap is a transformation
    1_B => G then F, which is exactly epsilon, and vice versa.
    """
    return EquivalenceWitness(w.G, w.F, w.epsilon, w.eta)


def compose_witnesses(w1: EquivalenceWitness, w2: EquivalenceWitness) -> EquivalenceWitness:
    """Witness for A ~ C from A ~ B and B ~ C."""
    a, c = w1.source, w2.target
    F = w1.F.then(w2.F)
    G = w2.G.then(w1.G)
    eta = tuple(a.comp(w1.eta[x], w1.G.arrows[w2.eta[w1.F.objects[x]]]) for x in range(a.objects))
    epsilon = tuple(
        c.comp(w2.epsilon[z], w2.F.arrows[w1.epsilon[w2.G.objects[z]]]) for z in range(c.objects)
    )
    return EquivalenceWitness(F, G, eta, epsilon)


def _class_profile(c: FinCategory) -> tuple:
    """Hom-set sizes between isomorphism classes, as a sorted multiset.

    Equivalent categories have equal profiles, so a mismatch ends the
    search early.
    """
    cached = c.__dict__.get("_class_profile")
    if cached is None:
        reps = [grp[0] for grp in iso_classes(c)]
        cached = (len(reps), tuple(sorted(len(c.hom(x, y)) for x in reps for y in reps)))
        c.__dict__["_class_profile"] = cached
    return cached


def _hom_profile(c: FinCategory) -> list[list[int]]:
    return [[len(c.hom(x, y)) for y in range(c.objects)] for x in range(c.objects)]


def _ff_es_functors(a: FinCategory, b: FinCategory) -> Iterator[Functor]:
    """Fully faithful, essentially surjective functors in enumeration order."""
    pa, pb = _hom_profile(a), _hom_profile(b)
    classes_b = iso_classes(b)
    cls_of = {y: i for i, grp in enumerate(classes_b) for y in grp}
    for om in itertools.product(range(b.objects), repeat=a.objects):
        if any(
            pa[x][y] != pb[om[x]][om[y]] for x in range(a.objects) for y in range(a.objects)
        ):
            continue
        if len({cls_of[y] for y in om}) != len(classes_b):
            continue
        # injectivity is needed per source hom-set
        used: list[set[int]] = [set() for _ in range(a.objects * a.objects)]
        for x, i in enumerate(a.identities):
            used[x * a.objects + x].add(b.identities[om[x]])

        def injective(f, hom, used=used):
            arr = a.arrows[f]
            slot = used[arr.src * a.objects + arr.dst]
            for g in hom:
                if g in slot:
                    continue
                slot.add(g)
                yield g
                slot.discard(g)

        for am in _arrow_search(a, b, om, injective):
            yield Functor(a, b, om, am)


def _quasi_inverse(F: Functor) -> EquivalenceWitness:
    a, b = F.source, F.target
    inverses = arrow_isos(b)
    rep: list[int] = []
    chosen: list[int] = []
    for y in range(b.objects):
        found = None
        for x in range(a.objects):
            for e in b.hom(F.objects[x], y):
                if inverses[e] is not None:
                    found = (x, e)
                    break
            if found:
                break
        if found is None:
            raise ValueError("functor is not essentially surjective")
        rep.append(found[0])
        chosen.append(found[1])
    preimage: dict[int, int] = {}
    for f in range(len(a.arrows)):
        preimage.setdefault(F.arrows[f], f)
    g_arrows = []
    for beta, arr in enumerate(b.arrows):
        target = b.comp(b.comp(chosen[arr.src], beta), inverses[chosen[arr.dst]])
        g_arrows.append(_preimage_in(a, F, rep[arr.src], rep[arr.dst], target))
    G = Functor(b, a, tuple(rep), tuple(g_arrows))
    epsilon = tuple(inverses[e] for e in chosen)
    eta = tuple(
        _preimage_in(a, F, x, rep[F.objects[x]], inverses[chosen[F.objects[x]]])
        for x in range(a.objects)
    )
    return EquivalenceWitness(F, G, eta, epsilon)


def _preimage_in(a: FinCategory, F: Functor, x: int, y: int, target: int) -> int:
    for f in a.hom(x, y):
        if F.arrows[f] == target:
            return f
    raise ValueError("functor is not full")


def find_equivalence(
    a: FinCategory,
    b: FinCategory,
    *,
    object_limit: int | None = None,
    arrow_limit: int | None = None,
) -> EquivalenceWitness | None:
    """First equivalence witness in enumeration order, or ``None``.

    The functor ``F`` is the lexicographically first fully faithful,
    essentially surjective functor.  ``G`` sends each object ``y`` of B to
    the least object ``x`` with an isomorphism ``e_y: F x -> y`` (least
    arrow index among those), and an arrow ``beta: y -> y'`` to the unique
    ``alpha`` with ``F alpha = e_y . beta . e_y'^-1``.
    """
    _guard(a, object_limit, arrow_limit)
    _guard(b, object_limit, arrow_limit)
    if _class_profile(a) != _class_profile(b):
        return None
    for F in _ff_es_functors(a, b):
        w = _quasi_inverse(F)
        v = validate_witness(w)
        if not v:
            raise AssertionError(f"constructed witness failed validation: {v.law}: {v.message}")
        return w
    return None


def skeletonize(c: FinCategory) -> FinCategory:
    """Full subcategory on the least object of each isomorphism class."""
    reps = [grp[0] for grp in iso_classes(c)]
    new_obj = {x: i for i, x in enumerate(reps)}
    keep = [f for f, arr in enumerate(c.arrows) if arr.src in new_obj and arr.dst in new_obj]
    new_arrow = {f: i for i, f in enumerate(keep)}
    arrows = tuple(
        Arrow(c.arrows[f].name, new_obj[c.arrows[f].src], new_obj[c.arrows[f].dst]) for f in keep
    )
    identities = tuple(new_arrow[c.identities[x]] for x in reps)
    compose = {
        (new_arrow[f], new_arrow[g]): new_arrow[k]
        for (f, g), k in c.compose
        if f in new_arrow and g in new_arrow
    }
    return FinCategory(len(reps), arrows, identities, compose)


def is_skeletal(c: FinCategory) -> bool:
    return all(len(grp) == 1 for grp in iso_classes(c))


def find_isomorphism(a: FinCategory, b: FinCategory) -> Functor | None:
    """A functor bijective on objects and arrows, if the categories are isomorphic."""
    if a.objects != b.objects or len(a.arrows) != len(b.arrows):
        return None
    for F in _ff_es_functors(a, b):
        if len(set(F.objects)) == a.objects:
            return F
    return None


def witness_from_json(data: dict, a: FinCategory, b: FinCategory) -> EquivalenceWitness:
    if not isinstance(data, dict) or set(data) != {"F", "G", "eta", "epsilon"}:
        raise ModelError("witness needs exactly the keys F, G, eta, epsilon")

    def functor(d, src, dst):
        if not isinstance(d, dict) or set(d) != {"objects", "arrows"}:
            raise ModelError("functor needs exactly the keys objects, arrows")
        return Functor(src, dst, tuple(d["objects"]), tuple(d["arrows"]))

    return EquivalenceWitness(
        functor(data["F"], a, b), functor(data["G"], b, a), tuple(data["eta"]), tuple(data["epsilon"])
    )
