from __future__ import annotations

import csv
import io
import json

import pytest

from tilingplan.cli import main
from tilingplan.scenarios import RunRecord, aggregate_stats, save_scenario, scenario_from_json

SMOKE = {
    "name": "smoke",
    "robot": {"link_lengths": [1.0, 1.0]},
    "scene": {"workspace": {"min": [-6.0, -6.0], "max": [6.0, 6.0]}, "obstacles": []},
    "start": {"head": [0.0, 0.0], "angles": [0.0, 0.0]},
    "target": {"kind": "head_disc", "center": [3.0, 2.0], "radius": 0.6},
}


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    save_scenario(scenario_from_json(SMOKE), d / "smoke.json")
    far = dict(SMOKE, target={"kind": "head_disc", "center": [5.0, 5.0], "radius": 0.1})
    save_scenario(scenario_from_json(far), d / "far.json")
    assert main(["preprocess", "--links", "1,1", "--n", "50", "--seed", "1", "--out", str(d / "b.bin")]) == 0
    return d


def test_preprocess_shape_and_determinism(files, capsys):
    d = files
    assert main(["preprocess", "--links", "1,1", "--n", "50", "--seed", "1", "--out", str(d / "b2.bin")]) == 0
    out = capsys.readouterr().out
    assert "G_1: 50 vertices" in out and "G_3: 50 vertices" in out
    assert main(["preprocess", "--links", "1,1", "--n", "50", "--seed", "1", "--jobs", "4", "--out", str(d / "b4.bin")]) == 0
    ref = (d / "b.bin").read_bytes()
    assert (d / "b2.bin").read_bytes() == ref == (d / "b4.bin").read_bytes()


def test_preprocess_two_roadmaps_for_one_link(tmp_path, capsys):
    assert main(["preprocess", "--links", "1", "--n", "50", "--out", str(tmp_path / "b.bin")]) == 0
    out = capsys.readouterr().out
    assert out.count("50 vertices") == 2


def _plan(d, planner, scenario="smoke.json", *extra):
    out = d / f"res_{planner}.json"
    code = main(
        ["plan", "--bundle", str(d / "b.bin"), "--scenario", str(d / scenario), "--planner", planner, "--out", str(out), "--omit-timing", *extra]
    )
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_plan_trdrrt_and_rrt(files):
    code, doc = _plan(files, "trdrrt", "smoke.json", "--validate", "--svg", str(files / "r.svg"))
    assert code == 0 and doc["status"] == "solved" and doc["stats"]["self_collision_checks"] == 0
    assert (files / "r.svg").read_text().startswith("<?xml")
    code, doc = _plan(files, "rrt")
    assert code == 0 and doc["stats"]["self_collision_checks"] > 0


def test_plan_is_reproducible(files):
    a = _plan(files, "trdrrt")[1]
    b = _plan(files, "trdrrt")[1]
    assert a == b and a["stats"]["wall_time_ms"] == 0


def test_plan_timeout_exit_code(files):
    (files / "res_trdrrt.json").unlink(missing_ok=True)
    code, doc = _plan(files, "trdrrt", "far.json", "--time-budget-ms", "1")
    assert code == 2 and doc["status"] == "timeout"


def test_plan_mismatch_exit_code(files, tmp_path):
    assert main(["preprocess", "--links", "1,1,1", "--n", "20", "--out", str(tmp_path / "b3.bin")]) == 0
    code = main(["plan", "--bundle", str(tmp_path / "b3.bin"), "--scenario", str(files / "smoke.json")])
    assert code == 4


def test_plan_bad_input_exit_code(files, tmp_path, capsys):
    (tmp_path / "bad.json").write_text("{")
    assert main(["plan", "--bundle", str(files / "b.bin"), "--scenario", str(tmp_path / "bad.json")]) == 1
    assert "error" in capsys.readouterr().err


def test_bench_csv(files, capsys):
    out = files / "bench.csv"
    args = ["bench", "--bundle", str(files / "b.bin"), "--scenario", str(files / "smoke.json"), "--runs", "1", "--out", str(out), "--omit-timing"]
    assert main(args) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert sorted(r["planner"] for r in rows) == ["rrt", "trdrrt"]
    first = out.read_bytes()
    assert main(args) == 0
    assert out.read_bytes() == first
    args3 = args.copy()
    args3[args3.index("--runs") + 1] = "3"
    capsys.readouterr()
    assert main(args3) == 0
    printed = capsys.readouterr().out
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    tr = [r for r in rows if r["planner"] == "trdrrt"]
    assert len(tr) == 3 and all(r["self_checks"] == "0" for r in tr)
    recs = [RunRecord(r["planner"], r["scenario"], int(r["seed"]), r["solved"] == "1", float(r["wall_time_ms"]), int(r["iterations"]), int(r["self_checks"]), int(r["obstacle_checks"])) for r in tr]
    med = aggregate_stats(recs).aggregates["iterations"].median
    assert sorted(int(r["iterations"]) for r in tr)[1] == med
    assert "trdrrt: solved 3/3" in printed


def test_lattice_modes(tmp_path, capsys):
    assert main(["lattice", "--mode", "line", "--n", "6", "--i", "1"]) == 0
    assert "(-0.1339746, 0.5000000)" in capsys.readouterr().out
    assert main(["lattice", "--mode", "line", "--n", "12", "--L", "1", "--i", "1"]) == 0
    assert "spacing 0.2610524" in capsys.readouterr().out
    assert main(["lattice", "--mode", "coverage", "--n", "12", "--rounds", "0", "4", "--csv", str(tmp_path / "c.csv")]) == 0
    assert "depth-1 reached-head count 12" in capsys.readouterr().out
    assert (tmp_path / "c.csv").read_text().startswith("n,alpha,rounds,explored,max_gap")
    assert main(["lattice", "--mode", "bounds", "--trials", "10000", "--out", str(tmp_path / "b.txt")]) == 0
    assert "all bounds hold" in capsys.readouterr().out
    assert main(["lattice", "--mode", "grid", "--n", "2", "--radius", "1.5"]) == 0
    assert "5 points" in capsys.readouterr().out
    assert main(["lattice", "--mode", "line", "--n", "1"]) == 1


def test_generate_and_render(tmp_path):
    assert main(["generate", "--kind", "gripper", "--out", str(tmp_path / "g.json")]) == 0
    assert main(["generate", "--kind", "gripper", "--out", str(tmp_path / "g2.json")]) == 0
    assert (tmp_path / "g.json").read_bytes() == (tmp_path / "g2.json").read_bytes()
    assert main(["render", "--scenario", str(tmp_path / "g.json"), "--out", str(tmp_path / "g.svg")]) == 0
    assert "<svg" in (tmp_path / "g.svg").read_text()
