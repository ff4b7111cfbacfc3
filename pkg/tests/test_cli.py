import json

import pytest

from avagent.cli import bundled_examples, main

from conftest import BUNDLED

MANIFEST = json.loads(BUNDLED["manifest.json"].read_text())["cases"]
EXIT = {"holds": 0, "violated": 1, "bounded": 3}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bundled_examples_listed():
    names = set(bundled_examples())
    assert {"table1.scn", "damage.psl", "manifest.json"} <= names


def test_verify_table1_holds(capsys, tmp_path):
    stats = tmp_path / "stats.txt"
    code, out, _ = run(capsys, "verify", "--scenario", "table1.scn", "--property", "damage.psl",
                       "--stats-out", str(stats))
    assert code == 0 and out.rstrip().endswith("PROPERTY HOLDS")
    lines = stats.read_text().splitlines()
    assert [ln.split(":")[0] for ln in lines] == [
        "product states", "joint states", "maximum search depth", "buchi states"]


def test_verify_mutant_writes_trace(capsys, tmp_path):
    trace = tmp_path / "ce.json"
    code, out, _ = run(capsys, "verify", "--scenario", "table1.scn", "--property", "damage.psl",
                       "--mutant", "invert-damage", "--trace-out", str(trace))
    assert code == 1 and "PROPERTY VIOLATED" in out
    code, out, _ = run(capsys, "replay", "--scenario", "table1.scn", "--trace", str(trace))
    assert code == 0 and out.startswith("replay ok")


def test_replay_divergence(capsys, tmp_path):
    path = tmp_path / "t.json"
    run(capsys, "simulate", "--scenario", "table1.scn", "--seed", "2", "--trace-out", str(path))
    data = json.loads(path.read_text())
    k = next(i for i, s in enumerate(data["steps"]) if s["action"].startswith("drive"))
    data["steps"][k]["action"] = "drive(south)" if data["steps"][k]["action"] != "drive(south)" else "drive(north)"
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "replay", "--scenario", "table1.scn", "--trace", str(path))
    assert code == 1 and f"step {k}" in out


def test_verify_bounded(capsys):
    code, out, _ = run(capsys, "verify", "--scenario", "table1.scn", "--property", "damage.psl",
                       "--step-bound", "4")
    assert code == 3 and "BOUNDED" in out


@pytest.mark.parametrize("argv", [
    ["verify"],
    ["verify", "--scenario", "missing.scn", "--property", "damage.psl"],
    ["verify", "--scenario", "table1.scn", "--property", "table1.scn"],
    ["verify", "--scenario", "damage.psl", "--property", "damage.psl"],
    ["frobnicate"],
    ["verify", "--scenario", "table1.scn", "--property", "damage.psl", "--seed", "3"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_replay_malformed_trace(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run(capsys, "replay", "--scenario", "table1.scn", "--trace", str(path))[0] == 2


def test_simulate_is_seeded(capsys):
    a = run(capsys, "simulate", "--scenario", "table1.scn", "--seed", "11")
    b = run(capsys, "simulate", "--scenario", "table1.scn", "--seed", "11")
    assert a == b and a[0] == 0
    assert a[1].splitlines()[-1] == "status: halted"


def test_simulate_with_step_cap(capsys):
    code, out, _ = run(capsys, "simulate", "--scenario", "table1.scn", "--seed", "7", "--max-steps", "200")
    assert code == 0 and out.startswith("step 0 |")


def test_empty_grid_is_manhattan_optimal(capsys):
    code, out, _ = run(capsys, "simulate", "--scenario", "empty.scn")
    drives = out.count("action drive(")
    # rides 0 0 -> 4 4 then 4 4 -> 2 1, both legs from the pickup point
    assert code == 0 and drives == 8 + 5


def test_translate(capsys):
    code, out, _ = run(capsys, "translate", "--property", "progress.psl")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# <> B vehicle no_rides_left" and lines[1].startswith("states ")
    code, out, _ = run(capsys, "translate", "--property", "progress.psl", "--negate")
    assert out.splitlines()[0] == "# [] ~ B vehicle no_rides_left"


@pytest.mark.parametrize("case", MANIFEST, ids=lambda c: f"{c['scenario']}-{c['property']}-{c['mutant']}")
def test_manifest_case(capsys, case):
    argv = ["verify", "--scenario", case["scenario"], "--property", case["property"]]
    if case["mutant"]:
        argv += ["--mutant", case["mutant"]]
    assert run(capsys, *argv)[0] == EXIT[case["expected"]]
