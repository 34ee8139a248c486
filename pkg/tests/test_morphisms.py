from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from eplint.models import (
    GuardError,
    discrete_category,
    enumerate_categories,
    enumerate_monoids,
    monoid_category,
    semilattice2,
    terminal_category,
    trivial_monoid,
    validate_category,
    walking_arrow,
    walking_iso,
    z2,
)
from eplint.morphisms import (
    Bijection,
    EquivalenceWitness,
    Functor,
    arrow_isos,
    compose_witnesses,
    enumerate_functors,
    enumerate_monoid_isos,
    find_equivalence,
    find_isomorphism,
    functor_properties,
    identity_functor,
    identity_witness,
    is_skeletal,
    skeletonize,
    swap_witness,
    validate_functor,
    validate_witness,
    witness_from_json,
)
from tests.oracles import skeleton as sk
from tests.oracles.brute import WALKING_ARROW
from tests.oracles.frozen import WALKING_ARROW_ENDOFUNCTORS


def _arrow(c, name):
    return next(i for i, a in enumerate(c.arrows) if a.name == name)


# -- bijections and isos ----------------------------------------------------------


def test_bijection_rejects_non_permutations():
    with pytest.raises(Exception):
        Bijection.from_images([0, 0])
    b = Bijection.from_images([2, 0, 1])
    assert b.then(b.inverted()) == Bijection.identity(3)


def test_identities_are_self_inverse():
    for c in (walking_iso(), walking_arrow(), discrete_category(3)):
        inv = arrow_isos(c)
        assert all(inv[i] == i for i in c.identities)


def test_walking_iso_arrows_are_mutually_inverse():
    c = walking_iso()
    inv = arrow_isos(c)
    f, g = _arrow(c, "f"), _arrow(c, "g")
    assert inv[f] == g and inv[g] == f


def test_walking_arrow_is_not_invertible():
    c = walking_arrow()
    assert arrow_isos(c)[_arrow(c, "f")] is None


def test_monoid_isos():
    assert [b.forward for b in enumerate_monoid_isos(z2(), z2())] == [(0, 1)]
    assert list(enumerate_monoid_isos(z2(), semilattice2())) == []
    assert list(enumerate_monoid_isos(z2(), trivial_monoid())) == []
    for m in enumerate_monoids(3):
        assert Bijection.identity(3) in list(enumerate_monoid_isos(m, m))


# -- functors -----------------------------------------------------------------------


def test_functors_from_terminal_pick_objects():
    for c in (walking_iso(), walking_arrow(), discrete_category(3)):
        fs = list(enumerate_functors(terminal_category(), c))
        assert sorted(F.objects[0] for F in fs) == list(range(c.objects))


def test_one_functor_to_terminal():
    assert len(list(enumerate_functors(walking_iso(), terminal_category()))) == 1


def test_walking_arrow_endofunctors_match_oracle():
    fs = list(enumerate_functors(walking_arrow(), walking_arrow()))
    assert len(fs) == WALKING_ARROW_ENDOFUNCTORS
    # the brute-force oracle uses the same layout
    assert [(a.src, a.dst) for a in walking_arrow().arrows] == WALKING_ARROW[1]


SMALL = [c for n in range(3) for c in enumerate_categories(n, n + 2, up_to_iso=True)]


def test_enumerated_functors_are_functors():
    for a in SMALL[:12]:
        for b in SMALL[:12]:
            for F in enumerate_functors(a, b):
                assert validate_functor(F).ok


def test_functor_guard():
    big = discrete_category(5)
    with pytest.raises(GuardError):
        next(enumerate_functors(big, terminal_category()))


def test_functor_properties():
    (F,) = enumerate_functors(walking_iso(), terminal_category())
    assert functor_properties(F) == (True, True)
    (G,) = enumerate_functors(discrete_category(2), terminal_category())
    assert functor_properties(G) == (False, True)
    for c in SMALL:
        assert functor_properties(identity_functor(c)) == (True, True)


def test_broken_functor_is_caught():
    c = walking_iso()
    F = Functor(c, c, (0, 1), (0, 1, 1, 3))  # g sent to f: wrong endpoints
    v = validate_functor(F)
    assert not v.ok and v.law == "typing"


# -- equivalences ----------------------------------------------------------------------


def test_walking_iso_equivalent_to_terminal():
    w = find_equivalence(walking_iso(), terminal_category())
    assert w is not None and validate_witness(w).ok


def test_discrete_two_not_equivalent_to_terminal():
    assert find_equivalence(discrete_category(2), terminal_category()) is None


def test_z2_not_equivalent_to_trivial():
    assert find_equivalence(monoid_category(z2()), monoid_category(trivial_monoid())) is None


def test_identity_witness_validates():
    for c in SMALL:
        assert validate_witness(identity_witness(c)).ok


def test_broken_naturality_square():
    w = find_equivalence(walking_iso(), terminal_category())
    c = walking_iso()
    # eta must send object 1 to an iso 1 -> 0; use the identity of 0 instead
    bad = EquivalenceWitness(w.F, w.G, (w.eta[0], c.identities[1]), w.epsilon)
    v = validate_witness(bad)
    assert not v.ok and v.law.startswith("eta")


def test_swap_and_compose():
    a, b = walking_iso(), terminal_category()
    w = find_equivalence(a, b)
    back = swap_witness(w)
    assert validate_witness(back).ok
    assert validate_witness(compose_witnesses(w, back)).ok
    assert validate_witness(compose_witnesses(back, w)).ok


EQUIV_CORPUS = [c for n in range(4) for c in enumerate_categories(n, min(n + 2, 5), up_to_iso=True)]


@given(st.sampled_from(EQUIV_CORPUS), st.sampled_from(EQUIV_CORPUS), st.sampled_from(EQUIV_CORPUS))
def test_equivalence_is_an_equivalence_relation(a, b, c):
    w_ab = find_equivalence(a, b)
    assert validate_witness(identity_witness(a)).ok
    if w_ab is None:
        assert find_equivalence(b, a) is None
        return
    assert validate_witness(swap_witness(w_ab)).ok
    w_bc = find_equivalence(b, c)
    if w_bc is not None:
        w_ac = compose_witnesses(w_ab, w_bc)
        assert validate_witness(w_ac).ok


def test_witness_json_round_trip():
    a, b = walking_iso(), terminal_category()
    w = find_equivalence(a, b)
    data = json.loads(w.dumps())
    assert set(data) == {"F", "G", "eta", "epsilon"}
    assert witness_from_json(data, a, b) == w


# -- skeletons ------------------------------------------------------------------------


def test_skeletons():
    t = terminal_category()
    assert skeletonize(walking_iso()).canonical_key() == t.canonical_key()
    assert skeletonize(t) == t
    d = discrete_category(2)
    assert skeletonize(d) == d


def test_skeleton_is_skeletal_and_equivalent():
    for c in EQUIV_CORPUS:
        s = skeletonize(c)
        assert validate_category(s).ok and is_skeletal(s)
        assert find_equivalence(c, s) is not None


def test_find_isomorphism():
    a = walking_iso()
    b = a.relabel([1, 0], [3, 2, 1, 0])
    F = find_isomorphism(a, b)
    assert F is not None and validate_functor(F).ok
    assert find_isomorphism(a, discrete_category(2)) is None


def test_decision_agreement_small():
    """find_equivalence vs the brute skeleton oracle, every ordered pair
    with at most 3 objects and object count + 2 arrows (at most 5)."""
    keys = [sk.skeleton_key(sk.from_model(c)) for c in EQUIV_CORPUS]
    for i, a in enumerate(EQUIV_CORPUS):
        for j, b in enumerate(EQUIV_CORPUS):
            assert (find_equivalence(a, b) is not None) == (keys[i] == keys[j])


WIDE_CORPUS = [c for n in range(4) for c in enumerate_categories(n, 5, up_to_iso=True)]


def test_decision_agreement_five_arrows():
    """Same agreement over every category with at most 3 objects and at
    most 5 arrows (one-object ones are monoids of order up to 5)."""
    assert len(WIDE_CORPUS) == 395
    keys = [sk.skeleton_key(sk.from_model(c)) for c in WIDE_CORPUS]
    disagreements = [
        (i, j)
        for i, a in enumerate(WIDE_CORPUS)
        for j, b in enumerate(WIDE_CORPUS)
        if (find_equivalence(a, b) is not None) != (keys[i] == keys[j])
    ]
    assert disagreements == []
