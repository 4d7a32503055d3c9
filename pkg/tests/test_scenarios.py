from __future__ import annotations

import csv
import io
import json
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tilingplan.errors import EmptyInputError, MalformedScenarioError, ScenarioSchemaError, StartInCollisionError
from tilingplan.geometry2d import segment_distance_many
from tilingplan.planners import PlanResult
from tilingplan.robot import self_collides
from tilingplan.scenarios import (
    CSV_FIELDS,
    KINDS,
    RunRecord,
    aggregate_stats,
    dumps_scenario,
    generate_scenario,
    load_scenario,
    loads_scenario,
    records_csv,
    render_svg,
    save_scenario,
    scenario_from_json,
)
from tilingplan.validation import validate_path

FIXTURES = Path(__file__).parent / "fixtures"

MINIMAL = {
    "name": "minimal",
    "robot": {"link_lengths": [1.0]},
    "scene": {"workspace": {"min": [-5.0, -5.0], "max": [5.0, 5.0]}, "obstacles": []},
    "start": {"head": [0.0, 0.0], "angles": [0.0]},
    "target": {"kind": "head_disc", "center": [3.0, 0.0], "radius": 0.5},
}


def test_minimal_round_trip(tmp_path):
    sc = scenario_from_json(MINIMAL)
    text = dumps_scenario(sc)
    assert dumps_scenario(loads_scenario(text)) == text
    save_scenario(sc, tmp_path / "s.json")
    assert (tmp_path / "s.json").read_text() == text
    assert load_scenario(tmp_path / "s.json").to_json() == sc.to_json()


def test_unknown_field_is_schema_error():
    doc = json.loads(json.dumps(MINIMAL))
    doc["robot"]["colour"] = "red"
    with pytest.raises(ScenarioSchemaError, match="robot"):
        scenario_from_json(doc)


def test_wrong_angle_count_is_schema_error():
    doc = json.loads(json.dumps(MINIMAL))
    doc["start"]["angles"] = [0.0, 1.0]
    with pytest.raises(ScenarioSchemaError):
        scenario_from_json(doc)


def test_nan_and_malformed_json():
    text = json.dumps(MINIMAL).replace('"radius": 0.5', '"radius": NaN')
    with pytest.raises(MalformedScenarioError):
        loads_scenario(text)
    with pytest.raises(MalformedScenarioError, match="line 2"):
        loads_scenario('{\n  "name": }')


def test_start_in_collision_names_obstacle():
    doc = json.loads(json.dumps(MINIMAL))
    doc["scene"]["obstacles"] = [
        [[3, 3], [4, 3], [4, 4]],
        [[0.4, -0.2], [0.6, -0.2], [0.6, 0.2], [0.4, 0.2]],
    ]
    with pytest.raises(StartInCollisionError, match="obstacle 1"):
        scenario_from_json(doc)
    # the check can be deferred
    assert scenario_from_json(doc, validate_start=False).name == "minimal"


def test_error_kinds_are_distinct():
    assert len({ScenarioSchemaError, MalformedScenarioError, StartInCollisionError}) == 3


finite = st.floats(-50, 50, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(0.1, 3.0), min_size=1, max_size=6),
    st.tuples(finite, finite),
    st.floats(0.01, 5.0),
    st.sampled_from(["head_disc", "both_endpoints_disc"]),
)
def test_round_trip_fuzzed(lengths, center, radius, kind):
    doc = {
        "name": "fuzz",
        "robot": {"link_lengths": lengths},
        "scene": {"workspace": {"min": [-100.0, -100.0], "max": [100.0, 100.0]}, "obstacles": []},
        "start": {"head": [0.0, 0.0], "angles": [0.0] * len(lengths)},
        "target": {"kind": kind, "center": list(center), "radius": radius},
        "metadata": {"note": "x"},
    }
    sc = scenario_from_json(doc)
    again = loads_scenario(dumps_scenario(sc))
    assert again.to_json() == sc.to_json() == doc


@pytest.mark.parametrize("kind", KINDS)
def test_generators_deterministic_and_valid(kind):
    a, b = generate_scenario(kind), generate_scenario(kind)
    assert dumps_scenario(a) == dumps_scenario(b)
    loads_scenario(dumps_scenario(a))  # start validated on load
    assert a.metadata.get("analog") is True
    assert dumps_scenario(generate_scenario(kind, seed=3)) != dumps_scenario(a)


def test_generator_shapes():
    assert len(generate_scenario("tight").robot.link_lengths) == 9
    assert len(generate_scenario("coiled").robot.link_lengths) == 10
    assert len(generate_scenario("bricks_open").robot.link_lengths) == 12
    g = generate_scenario("gripper")
    assert len(g.robot.link_lengths) == 10 and g.robot.m == 11
    assert g.robot.variant.joint_index == 5 and g.robot.variant.anchor_index == 6
    assert g.target.kind == "both_endpoints_disc"
    with pytest.raises(ValueError):
        generate_scenario("tight", scale=0.0)


def test_coiled_start_is_tightly_wound():
    sc = generate_scenario("coiled")
    c = sc.start_config()
    assert not self_collides(sc.robot, c)
    ia, ib = sc.robot.nonadjacent_pairs
    clearance = segment_distance_many(c[ia], c[ia + 1], c[ib], c[ib + 1]).min()
    assert 0 < clearance < 2 * sc.robot.max_length
    # the spiral turns well past a full revolution
    ang = np.unwrap(np.arctan2(*np.diff(c, axis=0)[:, ::-1].T))
    assert abs(ang[-1] - ang[0]) > 2 * math.pi


def test_scale_scales_geometry():
    a, b = generate_scenario("tight"), generate_scenario("tight", scale=2.0)
    assert np.allclose(np.asarray(b.robot.link_lengths), 2 * np.asarray(a.robot.link_lengths))
    assert np.allclose(b.scene.obstacles[0].vertices, 2 * a.scene.obstacles[0].vertices)
    assert not self_collides(b.robot, b.start_config())


@pytest.mark.parametrize("kind", KINDS)
def test_witness_paths(kind):
    doc = json.loads((FIXTURES / f"witness_{kind}.json").read_text())
    sc = generate_scenario(kind)
    assert doc["scenario"] == sc.to_json()
    s = sc.scene
    rep = validate_path(
        doc["segments"],
        sc.robot.link_lengths,
        [o.vertices.tolist() for o in s.obstacles],
        (s.workspace.min, s.workspace.max),
        start=sc.start_config(),
    )
    assert rep.ok, rep.problems
    from tilingplan.planners import goal_test

    assert goal_test(np.asarray(doc["segments"][-1][-1]), sc.target)


def _record(v, solved=True):
    return RunRecord("trdrrt", "x", 0, solved, float(v), int(v), 0, int(v))


def test_aggregate_examples():
    one = aggregate_stats([_record(7)]).aggregates["wall_time_ms"]
    assert one.min == one.p25 == one.median == one.p75 == one.max == one.mean == 7
    five = aggregate_stats([_record(v) for v in (1, 2, 3, 4, 5)]).aggregates["wall_time_ms"]
    assert (five.p25, five.median, five.p75) == (2, 3, 4)
    assert aggregate_stats([_record(2), _record(4)]).aggregates["wall_time_ms"].mean == 3
    with pytest.raises(EmptyInputError):
        aggregate_stats([])


def test_csv_recomputable():
    recs = [_record(v, v % 2 == 0) for v in (5, 1, 4, 2, 3)]
    text = records_csv(recs)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == CSV_FIELDS
    walls = sorted(float(r["wall_time_ms"]) for r in rows)
    assert walls[2] == aggregate_stats(recs).aggregates["wall_time_ms"].median
    assert sum(int(r["solved"]) for r in rows) == aggregate_stats(recs).solved


def test_svg_minimal():
    sc = scenario_from_json(MINIMAL)
    svg = render_svg(sc, None, 1)
    root = ET.fromstring(svg.encode())
    ns = "{http://www.w3.org/2000/svg}"
    assert len(root.findall(f".//{ns}polyline")) == 1
    circles = root.findall(f".//{ns}circle")
    assert any(c.get("fill") == "green" for c in circles)
    x, y, w, h = map(float, root.get("viewBox").split())
    ws = sc.scene.workspace
    # y is flipped inside the drawing group
    assert x <= ws.min[0] and x + w >= ws.max[0] and y <= -ws.max[1] and y + h >= -ws.min[1]


def test_svg_with_frames():
    sc = generate_scenario("gripper")
    doc = json.loads((FIXTURES / "witness_gripper.json").read_text())
    res = PlanResult("trdrrt", "solved", [], [np.asarray(s) for s in doc["segments"]])
    svg = render_svg(sc, res, 6)
    root = ET.fromstring(svg.encode())
    lines = root.findall(".//{http://www.w3.org/2000/svg}polyline")
    assert len(lines) == 6
    ops = [float(p.get("stroke-opacity")) for p in lines]
    assert ops == sorted(ops)
