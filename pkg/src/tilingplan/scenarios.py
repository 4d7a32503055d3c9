"""Scenario files, built-in scene generators, run statistics and SVG rendering.

Scenario JSON (strict; unknown fields are rejected)::

    {
      "name": "tight",
      "metadata": {"analog": true, ...},          # optional, free-form
      "robot": {"link_lengths": [1.0, ...],
                "anchored": {"joint_index": 5, "anchor_position": [x, y]}},  # optional
      "scene": {"workspace": {"min": [x, y], "max": [x, y]},
                "obstacles": [[[x, y], [x, y], [x, y], ...], ...]},
      "start": {"head": [x, y], "angles": [a1, ...]},
      "target": {"kind": "head_disc" | "both_endpoints_disc", "center": [x, y], "radius": r}
    }

Angles are absolute link angles in radians.  The generated scenes are
analogs of the four benchmark scenes, built to show the same phenomena; their
exact geometry is invented.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import jsonschema
import numpy as np

from .errors import EmptyInputError, MalformedScenarioError, ScenarioSchemaError, StartInCollisionError
from .geometry2d import Aabb, Polygon
from .planners import Query, TargetRegion
from .robot import (
    Anchored,
    AngleForm,
    RobotSpec,
    Scene,
    from_angles,
    obstacle_collides_many,
    self_collides,
)

_POINT = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "robot", "scene", "start", "target"],
    "properties": {
        "name": {"type": "string"},
        "metadata": {"type": "object"},
        "robot": {
            "type": "object",
            "additionalProperties": False,
            "required": ["link_lengths"],
            "properties": {
                "link_lengths": {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMinimum": 0}},
                "anchored": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["joint_index", "anchor_position"],
                    "properties": {"joint_index": {"type": "integer", "minimum": 1}, "anchor_position": _POINT},
                },
            },
        },
        "scene": {
            "type": "object",
            "additionalProperties": False,
            "required": ["workspace", "obstacles"],
            "properties": {
                "workspace": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["min", "max"],
                    "properties": {"min": _POINT, "max": _POINT},
                },
                "obstacles": {"type": "array", "items": {"type": "array", "minItems": 3, "items": _POINT}},
            },
        },
        "start": {
            "type": "object",
            "additionalProperties": False,
            "required": ["head", "angles"],
            "properties": {"head": _POINT, "angles": {"type": "array", "items": {"type": "number"}}},
        },
        "target": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "center", "radius"],
            "properties": {
                "kind": {"enum": ["head_disc", "both_endpoints_disc"]},
                "center": _POINT,
                "radius": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}

KINDS = ("tight", "coiled", "bricks_open", "gripper")


@dataclass
class ScenarioFile:
    name: str
    robot: RobotSpec
    scene: Scene
    start: AngleForm
    target: TargetRegion
    metadata: dict = field(default_factory=dict)

    def start_config(self) -> np.ndarray:
        c = from_angles(self.robot, self.start)
        if self.robot.is_anchored:
            # pin the anchored joint exactly; forward kinematics leaves ~1e-15 residue
            a = self.robot.variant.anchor_index - 1
            c = c - c[a] + np.asarray(self.robot.variant.anchor_position)
        return c

    def query(self) -> Query:
        return Query(self.robot, self.start_config(), self.target, self.scene)

    def to_json(self) -> dict:
        robot = {"link_lengths": list(self.robot.link_lengths)}
        if self.robot.is_anchored:
            v = self.robot.variant
            robot["anchored"] = {"joint_index": v.joint_index, "anchor_position": list(v.anchor_position)}
        doc = {
            "name": self.name,
            "robot": robot,
            "scene": {
                "workspace": {"min": list(self.scene.workspace.min), "max": list(self.scene.workspace.max)},
                "obstacles": [o.vertices.tolist() for o in self.scene.obstacles],
            },
            "start": {"head": list(self.start.head), "angles": list(self.start.angles)},
            "target": {"kind": self.target.kind, "center": list(self.target.center), "radius": self.target.radius},
        }
        if self.metadata:
            doc["metadata"] = self.metadata
        return doc


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def scenario_from_json(doc: dict, validate_start: bool = True) -> ScenarioFile:
    try:
        jsonschema.validate(doc, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioSchemaError(f"{where}: {exc.message}") from exc
    try:
        r = doc["robot"]
        variant = None
        if "anchored" in r:
            a = r["anchored"]
            variant = Anchored(int(a["joint_index"]), (float(a["anchor_position"][0]), float(a["anchor_position"][1])))
        robot = RobotSpec(tuple(float(x) for x in r["link_lengths"]), variant)
        ws = doc["scene"]["workspace"]
        scene = Scene(
            tuple(Polygon(np.array(o, dtype=float)) for o in doc["scene"]["obstacles"]),
            Aabb(tuple(map(float, ws["min"])), tuple(map(float, ws["max"]))),
        )
        st = doc["start"]
        if len(st["angles"]) != robot.m - 1:
            raise ScenarioSchemaError(f"start/angles: expected {robot.m - 1} angles, got {len(st['angles'])}")
        start = AngleForm(tuple(st["head"]), tuple(st["angles"]))
        t = doc["target"]
        target = TargetRegion(t["kind"], (float(t["center"][0]), float(t["center"][1])), float(t["radius"]))
    except ScenarioSchemaError:
        raise
    except ValueError as exc:
        raise ScenarioSchemaError(str(exc)) from exc
    sc = ScenarioFile(doc["name"], robot, scene, start, target, dict(doc.get("metadata", {})))
    if validate_start:
        check_start(sc)
    return sc


def check_start(sc: ScenarioFile) -> None:
    """Raise :class:`StartInCollisionError` unless the start lies in the free space."""
    c = sc.start_config()
    if sc.robot.is_anchored:
        raw = from_angles(sc.robot, sc.start)
        if np.abs(raw - c).max() > 1e-9:
            raise StartInCollisionError("start does not place the anchored joint at its anchor position")
    if self_collides(sc.robot, c):
        raise StartInCollisionError("start configuration is in self collision")
    ws = sc.scene.workspace
    if np.any(c < np.asarray(ws.min)) or np.any(c > np.asarray(ws.max)):
        raise StartInCollisionError("start configuration leaves the workspace")
    for i, obs in enumerate(sc.scene.obstacles):
        if obstacle_collides_many(sc.robot, c[None], Scene((obs,), ws))[0]:
            raise StartInCollisionError(f"start configuration intersects obstacle {i}")


def loads_scenario(text: str, validate_start: bool = True) -> ScenarioFile:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise MalformedScenarioError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except ValueError as exc:
        raise MalformedScenarioError(str(exc)) from exc
    return scenario_from_json(doc, validate_start)


def dumps_scenario(sc: ScenarioFile) -> str:
    return json.dumps(sc.to_json(), sort_keys=True, indent=2, allow_nan=False) + "\n"


def load_scenario(path, validate_start: bool = True) -> ScenarioFile:
    return loads_scenario(Path(path).read_text(), validate_start)


def save_scenario(sc: ScenarioFile, path) -> None:
    Path(path).write_text(dumps_scenario(sc))


# -- generators ------------------------------------------------------------


def _box(x0, y0, x1, y1) -> Polygon:
    return Polygon(np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float))


def _scaled(polys, s):
    return tuple(Polygon(p.vertices * s) for p in polys)


def _spiral_angles(m: int, gap: float = 0.3) -> np.ndarray:
    """Absolute link angles of an inward spiral, ``gap`` radians of extra turning short of touching itself.

    Relative turns grow linearly along the chain; the common offset is found
    by bisection on the self-collision predicate.
    """
    spec = RobotSpec((1.0,) * (m - 1))
    ramp = np.linspace(0.0, 0.35, m - 2)

    def angles(off):
        return np.concatenate([[0.0], np.cumsum(off + ramp)])

    def bad(off):
        return self_collides(spec, from_angles(spec, AngleForm((0.0, 0.0), tuple(angles(off)))))

    lo, hi = 0.2, 1.4
    assert not bad(lo) and bad(hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if not bad(mid) else (lo, mid)
    return angles(lo - gap)


def generate_scenario(kind: str, scale: float = 1.0, seed: int = 0) -> ScenarioFile:
    """Deterministic analog scene; ``seed`` jitters the target centre by up to 0.25 scale units."""
    if kind not in KINDS:
        raise ValueError(f"unknown scenario kind {kind!r}; expected one of {KINDS}")
    if not scale > 0:
        raise ValueError("scale must be positive")
    rng = np.random.default_rng(seed)
    jitter = rng.uniform(-0.25, 0.25, 2) if seed else np.zeros(2)
    s = float(scale)
    meta = {"analog": True, "kind": kind, "scale": s, "seed": int(seed)}
    variant = None
    if kind == "tight":
        links = 9
        ws = Aabb((0.0, 0.0), (30.0 * s, 12.0 * s))
        obstacles = _scaled(
            [
                _box(12.0, 0.0, 16.0, 4.5),
                _box(12.0, 7.5, 16.0, 12.0),
                _box(5.0, 10.0, 8.0, 12.0),
                _box(5.0, 0.0, 8.0, 2.0),
                _box(20.0, 0.0, 23.0, 3.5),
                _box(20.0, 8.5, 23.0, 12.0),
            ],
            s,
        )
        head = (10.5, 6.0)
        angles = [math.pi] * links
        target = ((26.0, 6.0), 1.5)
        meta["description"] = "corridors between narrow chambers"
    elif kind == "coiled":
        links = 10
        ws = Aabb((-15.0 * s, -10.0 * s), (15.0 * s, 10.0 * s))
        obstacles = _scaled([_box(-2.0, 7.0, 2.0, 9.0), _box(-2.0, -9.0, 2.0, -7.0)], s)
        angles = list(_spiral_angles(links + 1))
        head = (-7.0, 0.0)
        # small, distant target: reaching it depends on how finely the roadmap covers the plane
        target = ((12.0, 0.0), 0.4)
        meta["description"] = "tightly coiled start in a nearly empty scene"
    elif kind == "bricks_open":
        links = 12
        ws = Aabb((0.0, 0.0), (30.0 * s, 16.0 * s))
        bricks = []
        for row, y0 in enumerate(np.arange(0.0, 16.0, 1.0)):
            shift = 0.0 if row % 2 == 0 else 0.5
            for x0 in (14.0 + shift,):
                if 6.5 <= y0 < 9.5:
                    continue  # the opening
                bricks.append(_box(x0, y0 + 0.05, x0 + 1.5, y0 + 0.95))
        obstacles = _scaled(bricks, s)
        head = (12.8, 8.0)
        angles = [math.pi] * links
        target = ((24.0, 8.0), 1.5)
        meta["description"] = "brick wall with a single opening"
    else:
        links = 10
        ws = Aabb((-12.0 * s, -12.0 * s), (12.0 * s, 12.0 * s))
        pin = (0.0, 0.0)
        variant = Anchored(5, pin)
        obstacles = _scaled([_box(-6.0, 3.0, -4.0, 5.0), _box(4.0, 3.0, 6.0, 5.0), _box(-1.5, -7.0, 1.5, -5.5)], s)
        # straight horizontal start centred on the pinned middle joint
        head = (-5.0, 0.0)
        angles = [0.0] * links
        # the gripper closes its two ends around a point above the pin
        target = ((0.0, 2.0), 1.5)
        meta["description"] = "middle joint pinned; both ends must meet in the target"
    lengths = tuple([s] * links)
    if variant is not None:
        variant = Anchored(variant.joint_index, (variant.anchor_position[0] * s, variant.anchor_position[1] * s))
    tc = (float(target[0][0] * s + jitter[0] * s), float(target[0][1] * s + jitter[1] * s))
    robot = RobotSpec(lengths, variant)
    sc = ScenarioFile(
        kind,
        robot,
        Scene(obstacles, ws),
        AngleForm((head[0] * s, head[1] * s), tuple(angles)),
        TargetRegion("both_endpoints_disc" if kind == "gripper" else "head_disc", tc, float(target[1] * s)),
        meta,
    )
    check_start(sc)
    return sc


# -- statistics ------------------------------------------------------------

CSV_FIELDS = ["planner", "scenario", "seed", "solved", "wall_time_ms", "iterations", "self_checks", "obstacle_checks"]
_NUMERIC = ["wall_time_ms", "iterations", "self_checks", "obstacle_checks"]


@dataclass
class RunRecord:
    planner: str
    scenario: str
    seed: int
    solved: bool
    wall_time_ms: float
    iterations: int
    self_checks: int
    obstacle_checks: int

    @classmethod
    def from_result(cls, result, scenario: str, seed: int) -> "RunRecord":
        st = result.stats
        return cls(result.planner, scenario, seed, result.solved, st.wall_time_ms, st.iterations, st.self_collision_checks, st.obstacle_checks)


@dataclass
class Summary:
    min: float
    p25: float
    median: float
    p75: float
    max: float
    mean: float


@dataclass
class RunStats:
    records: list[RunRecord]
    aggregates: dict[str, Summary]
    solved: int

    def to_csv(self) -> str:
        return records_csv(self.records)


def summarize(values) -> Summary:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise EmptyInputError("cannot summarise an empty sample")
    q = np.percentile(v, [0, 25, 50, 75, 100], method="linear")
    return Summary(*(float(x) for x in q), float(v.mean()))


def aggregate_stats(records) -> RunStats:
    records = list(records)
    if not records:
        raise EmptyInputError("no run records to aggregate")
    agg = {f: summarize([getattr(r, f) for r in records]) for f in _NUMERIC}
    return RunStats(records, agg, sum(1 for r in records if r.solved))


def records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        w.writerow([r.planner, r.scenario, r.seed, int(r.solved), f"{r.wall_time_ms:.3f}", r.iterations, r.self_checks, r.obstacle_checks])
    return buf.getvalue()


# -- SVG -------------------------------------------------------------------


def _pts(c) -> str:
    return " ".join(f"{x:.6g},{y:.6g}" for x, y in np.asarray(c))


def _robot_svg(c, opacity: float, r: float) -> list[str]:
    out = [f'<polyline points="{_pts(c)}" fill="none" stroke="blue" stroke-width="{r:.4g}" stroke-opacity="{opacity:.3f}"/>']
    for k, (x, y) in enumerate(np.asarray(c)):
        color = "red" if k == 0 else "blue"
        out.append(f'<circle cx="{x:.6g}" cy="{y:.6g}" r="{r:.4g}" fill="{color}" fill-opacity="{opacity:.3f}"/>')
    return out


def _frames(result, frames: int) -> list[np.ndarray]:
    if result is None or not result.segments:
        return []
    dense = np.concatenate([np.asarray(s) for s in result.segments])
    idx = np.unique(np.linspace(0, len(dense) - 1, max(frames, 1)).round().astype(int))
    return [dense[i] for i in idx]


def render_svg(sc: ScenarioFile, result=None, frames: int = 1) -> str:
    ws = sc.scene.workspace
    w, h = ws.width, ws.height
    pad = 0.02 * max(w, h)
    r = 0.08 * sc.robot.max_length
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{ws.min[0] - pad:.6g} {-(ws.max[1] + pad):.6g} {w + 2 * pad:.6g} {h + 2 * pad:.6g}">',
        f"<title>{escape(sc.name)}</title>",
        '<g transform="scale(1,-1)">',
        f'<rect x="{ws.min[0]:.6g}" y="{ws.min[1]:.6g}" width="{w:.6g}" height="{h:.6g}" fill="white" stroke="black" stroke-width="{r / 2:.4g}"/>',
    ]
    for o in sc.scene.obstacles:
        lines.append(f'<polygon points="{_pts(o.vertices)}" fill="gray"/>')
    t = sc.target
    lines.append(f'<circle cx="{t.center[0]:.6g}" cy="{t.center[1]:.6g}" r="{t.radius:.6g}" fill="green" fill-opacity="0.3" stroke="green"/>')
    poses = _frames(result, frames) or [sc.start_config()]
    k = len(poses)
    for i, c in enumerate(poses):
        lines.extend(_robot_svg(c, 0.25 + 0.75 * (i + 1) / k if k > 1 else 1.0, r))
    lines += ["</g>", "</svg>"]
    return "\n".join(lines) + "\n"
