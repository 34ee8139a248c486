from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from eplint.models import (
    FinSet,
    discrete_category,
    empty_category,
    enumerate_categories,
    enumerate_monoids,
    terminal_category,
    walking_arrow,
    walking_iso,
    z2,
)
from eplint.oracle import generate_corpus
from eplint.semantics import SemanticsError, evaluate, interpret_term
from eplint.syntax import (
    App,
    Not,
    Quant,
    SortApp,
    Var,
    builtin_signature,
    parse_formula,
    parse_sorted,
    sort_check,
)
from tests.oracles import refeval

CAT = builtin_signature("category")
MON = builtin_signature("monoid")
SET = builtin_signature("set")

ONE_OBJECT = "exists x:O. forall y:O. x = y"


def test_id_term():
    c = walking_iso()
    assert interpret_term(App("id", (Var("x"),)), c, {"x": 0}) == c.identities[0]


def test_composite_in_walking_iso_is_identity():
    c = walking_iso()
    f = next(i for i, a in enumerate(c.arrows) if a.name == "f")
    g = next(i for i, a in enumerate(c.arrows) if a.name == "g")
    assert interpret_term(App("comp", (Var("f"), Var("g"))), c, {"f": f, "g": g}) == c.identities[0]


def test_mul_in_z2():
    assert interpret_term(App("mul", (Var("a"), Var("a"))), z2(), {"a": 1}) == 0


def test_exactly_one_object():
    sf = parse_sorted(ONE_OBJECT, CAT)
    assert evaluate(sf, terminal_category()) is True
    assert evaluate(sf, walking_iso()) is False


def test_empty_domains():
    assert evaluate(parse_sorted("exists x:O. true", CAT), empty_category()) is False
    assert evaluate(parse_sorted("forall x:O. false", CAT), empty_category()) is True
    # no arrows 1 -> 0 in the walking arrow
    sf = parse_sorted("forall x,y:O. exists f:A(x,y). true", CAT)
    assert evaluate(sf, walking_arrow()) is False
    assert evaluate(sf, walking_iso()) is True


def test_endo_arrows_of_walking_iso_are_identities():
    sf = parse_sorted("forall x:O. forall f:A(x,x). f = id(x)", CAT)
    assert evaluate(sf, walking_iso()) is True
    assert evaluate(sf, discrete_category(3)) is True


def test_biconditional_and_implication():
    assert evaluate(parse_sorted("false <-> false", CAT), terminal_category())
    assert evaluate(parse_sorted("false -> false", CAT), terminal_category())
    assert not evaluate(parse_sorted("true -> false", CAT), terminal_category())


def test_label_atom():
    sf = parse_sorted("exists x:U. one(x)", SET)
    assert evaluate(sf, FinSet(3, {"one": 1}))
    assert not evaluate(sf, FinSet(3))


def test_free_variables_via_environment():
    ctx = {"x": SortApp("O"), "f": SortApp("A", (Var("x"), Var("x")))}
    sf = sort_check(parse_formula("f = id(x)"), CAT, ctx)
    c = walking_iso()
    assert evaluate(sf, c, {"x": 1, "f": c.identities[1]})
    with pytest.raises(SemanticsError):
        evaluate(sf, c, {"x": 1})
    with pytest.raises(SemanticsError):
        evaluate(sf, c, {"x": 1, "f": c.identities[0]})


def test_signature_mismatch():
    with pytest.raises(SemanticsError):
        evaluate(parse_sorted(ONE_OBJECT, CAT), z2())
    with pytest.raises(SemanticsError):
        evaluate(parse_sorted("forall a:U. mul(a,a) = a", MON), FinSet(2))


CAT_CORPUS = generate_corpus("category", 150, seed=11)
MON_CORPUS = generate_corpus("monoid", 100, seed=11)
SET_CORPUS = generate_corpus("set", 40, seed=11)
CATS = [c for n in range(4) for c in enumerate_categories(n, min(n + 2, 5), up_to_iso=True)]
MONS = [m for n in (1, 2, 3) for m in enumerate_monoids(n, up_to_iso=True)]
SETS = [FinSet(0)] + [FinSet(n, lb) for n in range(1, 4) for lb in ({}, {"one": n - 1})]


@pytest.mark.parametrize(
    "corpus,models",
    [(CAT_CORPUS, CATS), (MON_CORPUS, MONS), (SET_CORPUS, SETS)],
    ids=["category", "monoid", "set"],
)
def test_agrees_with_reference_evaluator(corpus, models):
    for sf in corpus:
        for m in models:
            assert evaluate(sf, m) == refeval.holds(m, sf.formula, {}), (str(sf), m)


@given(st.sampled_from(CAT_CORPUS), st.sampled_from(CATS))
def test_quantifier_duality(sf, model):
    f = sf.formula
    if not isinstance(f, Quant):
        return
    dual = "exists" if f.quantifier == "forall" else "forall"
    lhs = Not(f)
    rhs = Quant(dual, f.var, f.sort, Not(f.body))
    left = evaluate(sort_check(lhs, CAT), model)
    right = evaluate(sort_check(rhs, CAT), model)
    assert left == right


@given(st.sampled_from(MON_CORPUS + CAT_CORPUS), st.data())
def test_total_on_well_sorted_inputs(sf, data):
    models = CATS if sf.signature.name == "category" else MONS
    m = data.draw(st.sampled_from(models))
    assert evaluate(sf, m) in (True, False)
