import io
import json
from pathlib import Path

import pytest

from couplematch.cli import main
from couplematch.model import load_instance
from couplematch.stability import enumerate_stable

DATA = Path(__file__).resolve().parent.parent / "data"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def test_validate_reports_mode_and_warnings():
    code, out, _ = run("validate", DATA / "example2.json")
    assert code == 0 and "relaxed" in out and "|H| = 1 < 2" in out
    code, _, err = run("validate", "--strict", DATA / "example2.json")
    assert code == 2 and "|H| = 1 < 2" in err
    code, out, _ = run("validate", "--output", "json", DATA / "example1.json")
    assert code == 0 and json.loads(out)["strict"] is True


def test_dpda_text_and_json():
    code, out, _ = run("dpda", DATA / "example2.json")
    assert code == 0 and "h1: {d1, d2}" in out and "c: (@, @)" in out
    code, out, _ = run("dpda", "--trace", DATA / "example2.json")
    assert out.startswith("round 1") and "rejections: h1: {m}" in out
    code, out, _ = run("dpda", "--output", "json", "--trace", DATA / "example2.json")
    doc = json.loads(out)
    assert doc["rounds"] == 2 and doc["trace"][0]["rejections"]["h1"] == ["m"]


def test_check_stability_exit_codes(tmp_path):
    code, out, _ = run("check-stability", DATA / "closing.json", DATA / "closing_matching.json")
    assert code == 0 and out == "stable\n"
    matching = tmp_path / "mu.json"
    matching.write_text(json.dumps({"d1": "h1", "d2": "h1", "f": "@", "m": "@"}))
    code, out, _ = run("check-stability", DATA / "example2.json", matching)
    assert code == 1 and "((h1, h1), c) [iii]" in out
    code, out, _ = run("check-stability", "--output", "json", DATA / "example2.json", matching)
    assert json.loads(out)["blocks"][0]["subcase"] == "iii"


def test_find_stable():
    code, out, _ = run("find-stable", DATA / "example2.json")
    assert code == 0 and out == "stable matchings: 0\n"


def test_check_conditions():
    code, out, _ = run("check-conditions", DATA / "example2.json")
    assert code == 0 and "aversion to couple diversity: 1 violation\n" in out
    code, out, _ = run("check-conditions", "--output", "json", DATA / "example1.json")
    doc = json.loads(out)
    assert not doc["extreme_altruism"]["satisfied"]


def test_build_counterexample_round_trip(tmp_path):
    target = tmp_path / "built.json"
    code, out, _ = run("build-counterexample", "diversity", DATA / "example2.json", "-o", target)
    assert code == 0 and "wrote" in out
    built = load_instance(target, strict=False)
    assert enumerate_stable(built) == []
    code, out, _ = run("build-counterexample", "diversity", DATA / "example2.json")
    assert json.loads(out) == json.loads(target.read_text())


def test_build_counterexample_refuses_satisfying_profile():
    code, _, err = run("build-counterexample", "altruism", DATA / "closing.json")
    assert code == 2 and err.startswith("error:")


def test_repro_and_verify():
    code, out, _ = run("repro", "example-2")
    assert code == 0 and "feasible matchings: 11" in out and "stable matchings: 0" in out
    code, out, _ = run("verify", "thm2-ii", "--instances", "3", "--output", "json")
    assert code == 0 and json.loads(out)["instances_checked"] == 3


def test_json_output_byte_identical():
    args = ("verify", "thm1-i", "--instances", "2", "--samples", "3", "--seed", "5", "--output", "json")
    assert run(*args)[1] == run(*args)[1]


def test_environment_caps(monkeypatch):
    monkeypatch.setenv("MATCHING_CAP", "10")
    code, _, err = run("find-stable", DATA / "example2.json")
    assert code == 2 and "exceeds cap 10" in err
    monkeypatch.setenv("MATCHING_CAP", "lots")
    code, _, err = run("find-stable", DATA / "example2.json")
    assert code == 2 and "MATCHING_CAP" in err
    # the flag overrides the environment
    code, _, _ = run("find-stable", "--matching-cap", "1000", DATA / "example2.json")
    assert code == 0


@pytest.mark.parametrize("content", ["not json", '{"hospitals": []}'])
def test_bad_instance_file(tmp_path, content):
    bad = tmp_path / "bad.json"
    bad.write_text(content)
    code, out, err = run("validate", bad)
    assert code == 2 and out == "" and err.startswith("error:")


def test_missing_file_and_bad_args():
    assert run("validate", "/nonexistent/x.json")[0] == 2
    assert run("verify", "thm9")[0] == 2
    assert run("verify", "thm1-i", "--instances", "0")[0] == 2
