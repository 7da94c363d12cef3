import io
import json

import jsonschema
import pytest

from conftest import FIXTURES, LETTERS
from hkl.cli import main
from hkl.dsl.jsonio import SCHEMA, import_json
from hkl.dsl.parser import parse, parse_path
from hkl.netschema import Mode

L = str(LETTERS)
VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


def run(*argv, stdin=""):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], stdout=out, stderr=err, stdin=io.StringIO(stdin))
    return code, out.getvalue(), err.getvalue()


def fx(name):
    return str(FIXTURES / name)


def json_out(*argv):
    code, out, err = run(*argv, "--format", "json")
    assert code == 0, err
    doc = json.loads(out)
    VALIDATOR.validate(doc)
    return doc


# -- check -----------------------------------------------------------------------

def test_check_letters():
    code, out, _ = run("check", L)
    assert code == 0
    assert "1 signature(s), 1 structure(s), 3 module(s), 1 system(s)" in out


def test_check_empty():
    assert run("check", fx("empty.hkl"))[0] == 0


def test_check_broken():
    code, out, err = run("check", fx("broken.hkl"))
    assert code == 1
    lines = [l for l in (out + err).splitlines() if "error[" in l]
    assert len(lines) == 1 and "broken.hkl:4:22" in lines[0]


def test_check_missing_file():
    assert run("check", fx("missing.hkl"))[0] == 2


def test_check_json_diagnostics():
    code, out, _ = run("check", fx("broken.hkl"), "--format", "json")
    assert code == 1
    doc = json.loads(out)
    VALIDATOR.validate(doc)
    assert [(d["line"], d["col"]) for d in doc["body"]] == [(4, 22)]


@pytest.mark.parametrize("argv", [[], ["frobnicate", L], ["check"],
                                  ["unfold", L, "--max-events", "0"],
                                  ["analyze", L, "--bound", "-3"],
                                  ["check", L, "--no-such-flag"],
                                  ["simulate", L, "--random", "--steps", "x"]])
def test_usage_errors(argv):
    assert run(*argv)[0] == 2


# -- compose -----------------------------------------------------------------------

def test_compose_letters():
    code, out, _ = run("compose", L)
    assert code == 0
    assert out.splitlines() == ["module sender.postal.receiver",
                                "left: (empty), right: (empty)"]


def test_compose_single_module():
    code, out, _ = run("compose", L, "--system", "postal")
    assert code == 0 and "left: post, right: deliver" in out


def test_compose_json():
    code, out, err = run("compose", L, "--format", "json")
    doc = json.loads(out)
    VALIDATOR.validate(doc)
    assert doc["kind"] == "module" and doc["body"]["left"] == []
    assert "left: (empty), right: (empty)" in err


def test_compose_kind_mismatch():
    code, _, err = run("compose", fx("kind_mismatch.hkl"))
    assert code == 1 and "'post'" in err


def test_unknown_system():
    assert run("compose", L, "--system", "nope")[0] == 1


# -- instantiate / simulate ------------------------------------------------------------

def test_instantiate():
    code, out, _ = run("instantiate", L)
    assert code == 0
    assert "marking: outbox: {a, b, c}, postbox: {}, deliveryBox: {}, inbox: {}" in out
    assert "enabled: post(x=a), post(x=b), post(x=c)" in out
    doc = json_out("instantiate", L)
    assert doc["kind"] == "netInstance"


def test_interactive_session(tmp_path):
    trace = tmp_path / "trace.json"
    code, out, _ = run("simulate", L, "--interactive", "--out", trace, stdin="1\n1\n1\nq\n")
    assert code == 0
    assert "final: outbox: {b, c}, postbox: {}, deliveryBox: {}, inbox: {a}" in out
    modes = import_json(trace.read_text(), expect="trace")
    assert modes == [Mode(t, {"x": "a"}) for t in ("post", "forward", "deliver")]


def test_interactive_invalid_input_reprompts():
    code, out, _ = run("simulate", L, "--interactive", stdin="7\nzero\n\n2\nq\n")
    assert code == 0
    assert out.count("invalid choice") == 3
    assert "fired post(x=b)" in out
    assert "final: outbox: {a, c}, postbox: {b}" in out


def test_interactive_runs_to_deadlock():
    code, out, _ = run("simulate", L, "--interactive", stdin="1\n" * 9)
    assert code == 0 and "deadlock" in out and "inbox: {a, b, c}" in out


def test_random_zero_steps():
    code, out, _ = run("simulate", L, "--random", "--steps", "0")
    assert code == 0
    assert "initial: outbox: {a, b, c}" in out and "step" not in out
    assert json_out("simulate", L, "--random", "--steps", "0")["body"] == []


def test_random_is_seeded():
    a = json_out("simulate", L, "--random", "--seed", "5")
    b = json_out("simulate", L, "--random", "--seed", "5")
    assert a == b and len(a["body"]) == 9


def test_replay(tmp_path):
    trace = tmp_path / "t.json"
    _, out, _ = run("simulate", L, "--random", "--steps", "5", "--seed", "2", "--out", trace)
    _, again, _ = run("simulate", L, "--replay", trace)
    final = [l for l in out.splitlines() if l.startswith("final")]
    assert final == [l for l in again.splitlines() if l.startswith("final")]


def test_replay_rejects_disabled_mode(tmp_path):
    trace = tmp_path / "t.json"
    trace.write_text(json.dumps({"formatVersion": 1, "kind": "trace", "body": [
        {"transition": "deliver", "valuation": {"x": "a"}}]}))
    code, _, err = run("simulate", L, "--replay", trace)
    assert code == 1 and "not enabled" in err
    assert run("simulate", L, "--replay", tmp_path / "absent.json")[0] == 2


# -- unfold ------------------------------------------------------------------------------

def test_unfold_stats_s0():
    code, out, _ = run("unfold", L, "--stats")
    assert code == 0
    assert out.splitlines() == ["events: 9", "conditions: 12", "views: 64",
                                "linearizations: 1680"]


def test_unfold_stats_small_systems():
    _, out, _ = run("unfold", L, fx("no_letters.hkl"), "--structure", "S_empty", "--stats")
    assert out.splitlines() == ["events: 0", "conditions: 0", "views: 1",
                                "linearizations: 1"]
    _, out, _ = run("unfold", L, fx("one_letter.hkl"), "--structure", "S_one", "--stats")
    assert out.splitlines() == ["events: 3", "conditions: 4", "views: 4",
                                "linearizations: 1"]


def test_unfold_structure_required_when_ambiguous():
    assert run("unfold", L, fx("one_letter.hkl"), "--stats")[0] == 1


def test_unfold_bound():
    code, _, err = run("unfold", fx("toggle.hkl"), "--max-events", "5")
    assert code == 1 and "BoundExceeded" in err


def test_unfold_json():
    doc = json_out("unfold", L)
    assert doc["kind"] == "runs" and len(doc["body"]) == 1
    stats = json_out("unfold", L, "--stats")
    assert stats["body"] == {"runs": [{"events": 9, "conditions": 12, "views": 64,
                                       "linearizations": 1680}]}


def test_unfold_dot():
    code, out, _ = run("unfold", L, "--format", "dot")
    assert code == 0 and out.startswith("digraph")


# -- analyze -----------------------------------------------------------------------------

def test_analyze_s0():
    code, out, _ = run("analyze", L)
    assert code == 0
    lines = out.splitlines()
    assert "reachable markings: 64 (144 edges)" in lines
    assert "place invariants: 3" in lines
    assert "  outbox.a + postbox.a + deliveryBox.a + inbox.a = 1" in lines
    assert sum(l.endswith(" = 1") for l in lines) == 3
    assert "transition invariants: 0" in lines
    assert "deadlocks: 1" in lines


def test_analyze_json():
    doc = json_out("analyze", L)
    body = doc["body"]
    assert body["markings"] == 64
    assert [iv["value"] for iv in body["placeInvariants"]] == [1, 1, 1]
    assert body["transitionInvariants"] == []
    assert body["deadlocks"] == [{"outbox": [], "postbox": [], "deliveryBox": [],
                                  "inbox": ["a", "b", "c"]}]


def test_analyze_idle():
    _, out, _ = run("analyze", fx("idle.hkl"), "--reachability", "--deadlocks")
    assert "reachable markings: 1 (0 edges)" in out and "deadlocks: 1" in out


def test_analyze_toggle():
    _, out, _ = run("analyze", fx("toggle.hkl"))
    assert "transition invariants: 1" in out and "deadlocks: 0" in out


def test_analyze_bound():
    code, _, err = run("analyze", L, "--bound", "10")
    assert code == 1 and "BoundExceeded" in err


# -- export ----------------------------------------------------------------------------

def test_export_text_round_trip():
    code, out, _ = run("export", L)
    assert code == 0
    assert parse(out)[0] == parse_path(LETTERS)[0]


def test_export_kinds():
    assert json_out("export", L)["kind"] == "modelSet"
    assert json_out("export", L, "--structure", "S0")["kind"] == "netInstance"
    assert json_out("export", L, "--system", "postal")["kind"] == "module"
    graph = json_out("export", L, "--structure", "S0", "--reachability")
    assert graph["kind"] == "reachabilityGraph" and len(graph["body"]["nodes"]) == 64


def test_export_dot_needs_subject():
    assert run("export", L, "--format", "dot")[0] == 1
    code, out, _ = run("export", L, "--system", "letters", "--format", "dot")
    assert code == 0 and "rank=" not in out


def test_out_file(tmp_path):
    target = tmp_path / "m.json"
    code, out, _ = run("export", L, "--format", "json", "--out", target)
    assert code == 0 and out == ""
    VALIDATOR.validate(json.loads(target.read_text()))
    assert run("export", L, "--out", tmp_path / "missing" / "m.hkl")[0] == 2


# -- presentation -------------------------------------------------------------------------

def test_color_env(monkeypatch):
    monkeypatch.setenv("HKL_COLOR", "1")
    assert "\x1b[" in run("check", fx("broken.hkl"))[2] + run("check", fx("broken.hkl"))[1]
    monkeypatch.setenv("HKL_COLOR", "0")
    assert "\x1b[" not in "".join(run("check", fx("broken.hkl"), "--color")[1:])


def test_figures(tmp_path):
    code, _, err = run("analyze", L, "--figures", tmp_path / "a")
    assert code == 0
    assert sorted(p.name for p in (tmp_path / "a").iterdir()) == ["incidence.png",
                                                                   "reachability.png"]
    code, _, _ = run("unfold", L, "--stats", "--figures", tmp_path / "u")
    assert code == 0 and (tmp_path / "u" / "run1.png").stat().st_size > 1000
    assert "wrote" in err
