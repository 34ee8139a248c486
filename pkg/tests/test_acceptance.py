"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL ...`` line to the
terminal (also when pytest captures output).  Run the file directly with
``python3 -m tests.test_acceptance`` to get only those lines.
"""

from __future__ import annotations

import itertools
import os
import subprocess
import sys
import time

import pytest

from eplint.lint import lint
from eplint.models import (
    GuardError,
    enumerate_categories,
    enumerate_monoids,
    terminal_category,
    validate_monoid,
    walking_iso,
)
from eplint.morphisms import (
    all_bijections,
    enumerate_monoid_isos,
    find_equivalence,
    find_isomorphism,
    is_monoid_iso,
    validate_witness,
)
from eplint.oracle import COUNTEREXAMPLE, Bounds, build_universe, check_invariance, crosscheck_lint, generate_corpus
from eplint.semantics import compile_sorted
from eplint.syntax import builtin_signature, formula_depth, parse_sorted
from eplint.transport import transport_monoid, verify_action_bijection
from tests.cli_cases import CASES, FIXTURES
from tests.oracles import brute, skeleton as sk
from tests.oracles.frozen import MONOID_CLASSES

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


class Result:
    def __init__(self, number: int):
        self.number = number
        self.problems: list[str] = []
        self.notes: list[str] = []

    def fail(self, text: str) -> None:
        self.problems.append(text)

    def note(self, text: str) -> None:
        self.notes.append(text)

    @property
    def ok(self) -> bool:
        return not self.problems

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        detail = "; ".join(self.problems + self.notes)
        return f"criterion {self.number}: {status}" + (f" ({detail})" if detail else "")


@pytest.fixture
def report(capsys):
    results: list[Result] = []

    def make(n: int) -> Result:
        r = Result(n)
        results.append(r)
        return r

    yield make
    with capsys.disabled():
        for r in results:
            print("\n" + r.line())


# -- 1 ---------------------------------------------------------------------------------


def criterion_1(r: Result) -> None:
    build_universe.cache_clear()
    start = time.perf_counter()
    sig = builtin_signature("category")
    sf = parse_sorted("exists x:O. forall y:O. x = y", sig)
    rep = lint(sf, sig, "equivalence")
    kinds = [v.kind for v in rep.violations]
    if rep.verdict != "fail" or kinds != ["object-equality"]:
        r.fail(f"lint gave {rep.verdict} with {kinds}")
    inv = check_invariance(sf, "category", "equivalence", Bounds(2))
    elapsed = time.perf_counter() - start
    cx = inv.counterexample
    if cx is None:
        r.fail("oracle found no counterexample")
    else:
        if find_isomorphism(cx.model_a, terminal_category()) is None:
            r.fail("first model is not the terminal category")
        if find_isomorphism(cx.model_b, walking_iso()) is None:
            r.fail("second model is not the free-standing isomorphism")
        if not validate_witness(cx.witness):
            r.fail("witness does not validate")
    if elapsed >= 1.0:
        r.fail(f"took {elapsed:.2f}s")
    r.note(f"{elapsed:.3f}s")


# -- 2 ---------------------------------------------------------------------------------


def criterion_2(r: Result) -> None:
    build_universe.cache_clear()
    start = time.perf_counter()
    sig = builtin_signature("set")
    sf = parse_sorted("exists x:U. one(x)", sig)
    rep = lint(sf, sig, "isomorphism")
    kinds = [v.kind for v in rep.violations]
    if rep.verdict != "fail" or kinds != ["label-atom"]:
        r.fail(f"lint gave {rep.verdict} with {kinds}")
    inv = check_invariance(sf, "set", "isomorphism", Bounds(3, min_size=3))
    elapsed = time.perf_counter() - start
    cx = inv.counterexample
    if cx is None:
        r.fail("oracle found no counterexample")
    else:
        a, b, sigma = cx.model_a, cx.model_b, cx.witness
        if a.size != 3 or b.size != 3 or not dict(a.labels):
            r.fail(f"pair is {a} / {b}")
        if sigma.size != 3 or cx.truth_a == cx.truth_b:
            r.fail("pair is not related by a bijection with differing truth")
    if elapsed >= 1.0:
        r.fail(f"took {elapsed:.2f}s")
    r.note(f"{elapsed:.3f}s")


# -- 3 ---------------------------------------------------------------------------------


def criterion_3(r: Result) -> None:
    start = time.perf_counter()
    corpus = generate_corpus("category", 500, depth=4, seed=0)
    if any(formula_depth(sf.formula) > 4 for sf in corpus):
        r.fail("corpus formula deeper than 4")
    try:
        s = crosscheck_lint(corpus, "category", "equivalence", Bounds(3, max_arrows=8))
    except GuardError as e:
        r.fail(f"bounds 3 objects / 8 arrows refused: {e.message}")
        return
    elapsed = time.perf_counter() - start
    if s.unsound:
        r.fail(f"{len(s.unsound)} lint-passing formulas have counterexamples, first {s.unsound[0].formula}")
    if elapsed >= 600:
        r.fail(f"took {elapsed:.0f}s")
    r.note(f"{len(corpus)} formulas, {elapsed:.1f}s")


def every_monoid(n: int) -> list:
    """All monoid tables on {0..n-1} whatever the unit: the orbits of the
    unit-0 tables under relabeling."""
    seen = {transport_monoid(m, s) for m in enumerate_monoids(n) for s in all_bijections(n)}
    return sorted(seen, key=lambda m: (m.unit, m.table))


# -- 4 ---------------------------------------------------------------------------------


def criterion_4(r: Result) -> None:
    corpus = [compile_sorted(sf) for sf in generate_corpus("monoid", 100, depth=4, seed=0)]
    if any(sf.signature.labels for sf in (c.source for c in corpus)):
        r.fail("corpus uses labels")
    monoids = transports = 0
    for n in range(1, 5):
        for m in every_monoid(n):
            monoids += 1
            truth = [c(m) for c in corpus]
            for sigma in all_bijections(n):
                transports += 1
                t = transport_monoid(m, sigma)
                if not validate_monoid(t):
                    r.fail(f"invalid transport of {m.table} along {sigma.forward}")
                if not is_monoid_iso(m, t, sigma):
                    r.fail(f"{sigma.forward} is not an iso for {m.table}")
                if transport_monoid(t, sigma.inverted()) != m:
                    r.fail(f"round trip of {m.table} along {sigma.forward}")
                if [c(t) for c in corpus] != truth:
                    r.fail(f"truth changed for {m.table} along {sigma.forward}")
    r.note(f"{monoids} monoids, {transports} transports, {len(corpus)} formulas")


# -- 5 ---------------------------------------------------------------------------------


def criterion_5(r: Result) -> None:
    pairs = checks = 0
    for n in range(1, 4):
        ms = every_monoid(n)
        for m, m2 in itertools.product(ms, repeat=2):
            isos = list(enumerate_monoid_isos(m, m2))
            if isos:
                pairs += 1
            for phi in isos:
                for x in range(3):
                    checks += 1
                    c = verify_action_bijection(m, m2, phi, x)
                    if not c.ok or c.source_count != c.target_count:
                        r.fail(f"{m.table} -> {m2.table} along {phi.forward}, |X|={x}: {c.message}")
    r.note(f"{pairs} isomorphic pairs, {checks} checks")


# -- 6 ---------------------------------------------------------------------------------


def criterion_6(r: Result) -> None:
    try:
        cats = [c for n in range(4) for c in enumerate_categories(n, 8, up_to_iso=True)]
    except GuardError as e:
        r.fail(f"bounds 3 objects / 8 arrows refused: {e.message}")
        return
    keys = [sk.skeleton_key(sk.from_model(c)) for c in cats]
    bad = 0
    for i, a in enumerate(cats):
        for j, b in enumerate(cats):
            if (find_equivalence(a, b) is not None) != (keys[i] == keys[j]):
                bad += 1
    if bad:
        r.fail(f"{bad} disagreements")
    r.note(f"{len(cats)} categories, {len(cats) ** 2} pairs")


# -- 7 ---------------------------------------------------------------------------------


def _first_commit(path: str) -> str | None:
    out = subprocess.run(
        ["git", "log", "--diff-filter=A", "--format=%H", "--", path],
        cwd=ROOT, capture_output=True, text=True,
    )
    lines = out.stdout.split()
    return lines[-1] if out.returncode == 0 and lines else None


def criterion_7(r: Result) -> None:
    for n in (1, 2, 3):
        got = sum(1 for _ in enumerate_monoids(n, up_to_iso=True))
        live = brute.monoid_class_count(n)
        if not got == live == MONOID_CLASSES[n]:
            r.fail(f"n={n}: enumerator {got}, brute {live}, frozen {MONOID_CLASSES[n]}")
    oracle = _first_commit("tests/oracles/brute.py")
    enum = _first_commit("src/eplint/models.py")
    if oracle is None or enum is None:
        r.fail("git history unavailable, commit order not verified")
        return
    before = subprocess.run(["git", "merge-base", "--is-ancestor", oracle, enum], cwd=ROOT)
    if before.returncode != 0 or oracle == enum:
        r.fail("oracle was not committed before the enumerator")
    r.note(f"oracle {oracle[:7]} precedes enumerator {enum[:7]}")


# -- 8 ---------------------------------------------------------------------------------


def _cli(argv: list[str], seed: str) -> tuple[int, bytes, bytes]:
    env = dict(os.environ, PYTHONHASHSEED=seed)
    p = subprocess.run(
        [sys.executable, "-c", "from eplint.cli import main; main()", *argv],
        cwd=FIXTURES, capture_output=True, env=env,
    )
    return p.returncode, p.stdout, p.stderr


def criterion_8(r: Result) -> None:
    runs = 0
    for argv, expected in CASES:
        first = _cli(argv, "1")
        second = _cli(argv, "2")
        runs += 2
        if first != second:
            r.fail(f"differs across runs: {' '.join(argv)}")
        if first[0] != expected:
            r.fail(f"exit {first[0]} != {expected}: {' '.join(argv)}")
        if argv[0] == "check":
            one = _cli(argv + ["--jobs", "1"], "3")
            eight = _cli(argv + ["--jobs", "8"], "4")
            runs += 2
            if not first == one == eight:
                r.fail(f"differs across --jobs: {' '.join(argv)}")
    r.note(f"{len(CASES)} invocations, {runs} runs")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


@pytest.mark.parametrize("number", range(1, 9), ids=[f"criterion_{n}" for n in range(1, 9)])
def test_criterion(number, report):
    r = report(number)
    CRITERIA[number - 1](r)
    assert r.ok, r.line()


if __name__ == "__main__":
    for n, crit in enumerate(CRITERIA, 1):
        res = Result(n)
        crit(res)
        print(res.line(), flush=True)
