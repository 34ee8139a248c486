from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, strategies as st

from eplint.models import (
    FinAlgebra,
    FinMonoid,
    Operation,
    enumerate_monoids,
    validate_monoid,
    z2,
)
from eplint.morphisms import Bijection, all_bijections, enumerate_monoid_isos, is_monoid_iso
from eplint.oracle import generate_corpus
from eplint.semantics import evaluate
from eplint.transport import (
    MonoidAction,
    TransportError,
    algebra_iso,
    axiom_status,
    enumerate_actions,
    transport_action,
    transport_algebra,
    transport_monoid,
    validate_action,
    verify_action_bijection,
)

ASSOC = "forall a,b,c:U. mul(mul(a,b),c) = mul(a,mul(b,c))"
GROUP = "forall a:U. mul(e,a) = a & mul(a,e) = a & mul(a,inv(a)) = e & mul(inv(a),a) = e"


def z3() -> FinAlgebra:
    return FinAlgebra(
        3,
        (
            Operation("mul", 2, tuple((a + b) % 3 for a in range(3) for b in range(3))),
            Operation("e", 0, (0,)),
            Operation("inv", 1, (0, 2, 1)),
        ),
        (ASSOC, GROUP),
        "z3",
    )


def magma() -> FinAlgebra:
    # a*b = a - b mod 3 is not associative
    return FinAlgebra(3, (Operation("mul", 2, tuple((a - b) % 3 for a in range(3) for b in range(3))),), (ASSOC,))


def test_identity_transport():
    for m in enumerate_monoids(3):
        assert transport_monoid(m, Bijection.identity(3)) == m


def test_swap_on_z2():
    t = transport_monoid(z2(), Bijection.from_images([1, 0]))
    assert t.unit == 1
    assert t.table == ((1, 0), (0, 1))


def test_size_mismatch():
    with pytest.raises(TransportError):
        transport_monoid(z2(), Bijection.identity(3))


MONOIDS_4 = [m for n in range(1, 5) for m in enumerate_monoids(n)]


@given(st.sampled_from(MONOIDS_4), st.data())
def test_functoriality_and_round_trip(m, data):
    s = Bijection.from_images(data.draw(st.permutations(range(m.size))))
    t = Bijection.from_images(data.draw(st.permutations(range(m.size))))
    once = transport_monoid(m, s)
    assert transport_monoid(once, t) == transport_monoid(m, s.then(t))
    assert transport_monoid(once, s.inverted()) == m


def test_group_transport_stays_a_group():
    g = z3()
    assert axiom_status(g) == (True, True)
    t = transport_algebra(g, Bijection.from_images([1, 2, 0]))
    assert axiom_status(t) == (True, True)
    assert algebra_iso(g, t, Bijection.from_images([1, 2, 0]))


def test_identity_on_algebras():
    assert transport_algebra(z3(), Bijection.identity(3)) == z3()


def test_non_associative_magma_stays_non_associative():
    mg = magma()
    assert axiom_status(mg) == (False,)
    for s in all_bijections(3):
        assert axiom_status(transport_algebra(mg, s)) == (False,)


def test_algebra_functoriality():
    g = z3()
    for s, t in itertools.product(all_bijections(3), repeat=2):
        assert transport_algebra(transport_algebra(g, s), t) == transport_algebra(g, s.then(t))
        assert transport_algebra(transport_algebra(g, s), s.inverted()) == g


def test_truth_is_transported():
    rng = random.Random(1)
    corpus = generate_corpus("monoid", 60, seed=8)
    for m in enumerate_monoids(3):
        s = Bijection.from_images(rng.sample(range(3), 3))
        t = transport_monoid(m, s)
        for sf in corpus:
            assert evaluate(sf, m) == evaluate(sf, t)


# -- actions -------------------------------------------------------------------------


def test_z2_actions_on_two_points():
    acts = list(enumerate_actions(z2(), 2))
    assert [a.table for a in acts] == [((0, 1), (0, 1)), ((0, 1), (1, 0))]
    check = verify_action_bijection(z2(), z2(), Bijection.identity(2), 2)
    assert check.ok and check.source_count == check.target_count == 2


def test_identity_iso_fixes_actions():
    for act in enumerate_actions(z2(), 2):
        assert transport_action(act, Bijection.identity(2), z2()) == act


def test_invalid_action_detected():
    bad = MonoidAction(z2(), 2, ((0, 1), (0, 0)))
    assert not validate_action(bad).ok


def test_transport_action_needs_an_iso():
    act = next(enumerate_actions(z2(), 2))
    with pytest.raises(TransportError):
        transport_action(act, Bijection.from_images([1, 0]), z2())


def test_action_counts_agree_for_isomorphic_monoids():
    for n in (1, 2, 3):
        ms = list(enumerate_monoids(n))
        for m, m2 in itertools.product(ms, repeat=2):
            for phi in enumerate_monoid_isos(m, m2):
                for x in (0, 1, 2):
                    assert verify_action_bijection(m, m2, phi, x).ok
