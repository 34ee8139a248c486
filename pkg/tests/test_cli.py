from __future__ import annotations

import io
import json
import os
import subprocess
import sys

import pytest

from eplint.cli import run
from eplint.models import model_from_json, z2
from tests.cli_cases import CASES, CHECK_CASES, FIXTURES


def invoke(argv, cwd=FIXTURES):
    out, err = io.StringIO(), io.StringIO()
    old = os.getcwd()
    os.chdir(cwd)
    try:
        code = run(argv, out, err)
    finally:
        os.chdir(old)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("argv,expected", CASES, ids=[" ".join(a) for a, _ in CASES])
def test_exit_codes(argv, expected):
    code, out, err = invoke(argv)
    assert code == expected, err
    if expected in (2, 3):
        assert err and not out
    else:
        assert out


def test_lint_span_and_json():
    code, out, _ = invoke(["lint", "one_object.fol", "--sig", "category", "--sameness", "equiv"])
    assert "one_object.fol:1:25: object-equality" in out
    _, out, _ = invoke(["lint", "one_object.fol", "--sig", "category", "--sameness", "equiv", "--json"])
    data = json.loads(out)
    assert data["verdict"] == "fail"
    assert [v["kind"] for v in data["violations"]] == ["object-equality"]


def test_eval_output():
    assert invoke(["eval", "true.fol", "empty_category.json"])[1] == "true\n"
    assert invoke(["eval", "one_object.fol", "walking_iso.json"])[1] == "false\n"
    assert json.loads(invoke(["eval", "one_object.fol", "terminal.json", "--json"])[1]) == {"value": True}


def test_check_json_fields():
    _, out, _ = invoke(["check", "one_object.fol", "--class", "category", "--sameness", "equiv", "--max-size", "2", "--json"])
    data = json.loads(out)
    assert data["verdict"] == "counterexample"
    ce = data["counterexample"]
    assert ce["truth_a"] is True and ce["truth_b"] is False
    assert model_from_json(ce["model_a"]).objects == 1
    assert model_from_json(ce["model_b"]).objects == 2
    assert set(ce["witness"]) == {"F", "G", "eta", "epsilon"}


def test_equiv_prints_witness():
    code, out, _ = invoke(["equiv", "walking_iso.json", "terminal.json"])
    assert code == 0 and out.startswith("equivalent\n") and "eta:" in out
    _, out, _ = invoke(["equiv", "discrete2.json", "walking_iso.json", "--json"])
    assert json.loads(out) == {"equivalent": False, "witness": None}


def test_transport_round_trip():
    _, out, _ = invoke(["transport", "z2.json", "--bijection", "1,0", "--json"])
    moved = model_from_json(json.loads(out))
    assert moved.unit == 1 and moved.table == ((1, 0), (0, 1))
    _, pretty, _ = invoke(["transport", "z2.json", "--bijection", "1,0"])
    assert json.loads(pretty) == json.loads(out)
    with open(os.path.join(FIXTURES, "moved.json"), "w") as fh:
        fh.write(out)
    try:
        _, back, _ = invoke(["transport", "moved.json", "--bijection", "1,0", "--json"])
    finally:
        os.remove(os.path.join(FIXTURES, "moved.json"))
    assert model_from_json(json.loads(back)) == z2()


def test_transport_labels_follow_points():
    _, out, _ = invoke(["transport", "labeled3.json", "--bijection", "2,0,1", "--json"])
    assert json.loads(out)["labels"] == {"one": 2}


def test_enumerate_lines_are_models():
    _, out, _ = invoke(["enumerate", "--class", "monoid", "--size", "2"])
    lines = out.splitlines()
    assert len(lines) == 2
    assert all(model_from_json(json.loads(l)).size == 2 for l in lines)
    assert invoke(["enumerate", "--class", "monoid", "--size", "3", "--up-to-iso", "--count-only"])[1] == "7\n"


def test_usage_errors():
    assert invoke([])[0] == 2
    assert invoke(["lint", "one_object.fol", "--sig", "category", "--sameness", "bogus"])[0] == 2
    assert invoke(["check", "one_object.fol", "--class", "category", "--sameness", "iso", "--max-size", "2", "--jobs", "0"])[0] == 2


def test_guard_message():
    code, _, err = invoke(["check", "one_object.fol", "--class", "category", "--sameness", "equiv", "--max-size", "3", "--max-arrows", "8"])
    assert code == 2 and "safety limit" in err


@pytest.mark.parametrize("argv", CHECK_CASES, ids=[" ".join(a) for a in CHECK_CASES])
def test_jobs_do_not_change_output(argv):
    one = invoke(argv + ["--jobs", "1"])
    eight = invoke(argv + ["--jobs", "8"])
    assert one == eight


def test_console_script_matches_in_process():
    argv = ["lint", "one_object.fol", "--sig", "category", "--sameness", "equiv"]
    proc = subprocess.run([sys.executable, "-c", "from eplint.cli import main; main()", *argv], cwd=FIXTURES, capture_output=True, text=True)
    code, out, err = invoke(argv)
    assert (proc.returncode, proc.stdout, proc.stderr) == (code, out, err)
