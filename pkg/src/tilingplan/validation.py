"""Independent dense path validator.

Deliberately shares no collision code with the planners: plain Python loops
over an exact orientation-based segment test.  Each consecutive sample pair
of a returned segment is re-interpolated about the anchor point that stays
fixed between them, at a resolution of ``resolution`` radians, and every
interpolated configuration is checked for link lengths, self-intersection,
obstacles and the workspace.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DENSE_RESOLUTION = 0.01
_LEN_TOL = 1e-6
_FIX_TOL = 1e-9


@dataclass
class ValidationReport:
    ok: bool = True
    checked: int = 0
    problems: list[str] = field(default_factory=list)

    def fail(self, msg: str) -> None:
        self.ok = False
        if len(self.problems) < 20:
            self.problems.append(msg)


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_seg(a, b, p) -> bool:
    return min(a[0], b[0]) - 1e-12 <= p[0] <= max(a[0], b[0]) + 1e-12 and min(a[1], b[1]) - 1e-12 <= p[1] <= max(a[1], b[1]) + 1e-12


def _cross(a, b, c, d) -> bool:
    o1, o2, o3, o4 = _orient(a, b, c), _orient(a, b, d), _orient(c, d, a), _orient(c, d, b)
    if ((o1 > 0 and o2 < 0) or (o1 < 0 and o2 > 0)) and ((o3 > 0 and o4 < 0) or (o3 < 0 and o4 > 0)):
        return True
    if o1 == 0 and _on_seg(a, b, c):
        return True
    if o2 == 0 and _on_seg(a, b, d):
        return True
    if o3 == 0 and _on_seg(c, d, a):
        return True
    return o4 == 0 and _on_seg(c, d, b)


def _inside(poly, p) -> bool:
    inside = False
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if (a[1] > p[1]) != (b[1] > p[1]):
            x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if x > p[0]:
                inside = not inside
    return inside


def _relative_angles(c) -> list[float]:
    out = []
    for i in range(len(c) - 2):
        u = (c[i + 1][0] - c[i][0], c[i + 1][1] - c[i][1])
        v = (c[i + 2][0] - c[i + 1][0], c[i + 2][1] - c[i + 1][1])
        out.append(math.atan2(u[0] * v[1] - u[1] * v[0], u[0] * v[0] + u[1] * v[1]))
    return out


def _fold_between(a, b) -> int | None:
    """Index of an adjacent link pair whose relative angle passes through pi from ``a`` to ``b``."""
    for i, (x, y) in enumerate(zip(_relative_angles(a), _relative_angles(b))):
        if abs(x) > math.pi / 2 and abs(y) > math.pi / 2 and (x > 0) != (y > 0):
            return i
    return None


def config_problem(c, lengths, obstacles, workspace) -> str | None:
    """Reason why configuration ``c`` is invalid, or ``None``."""
    pts = [tuple(map(float, p)) for p in c]
    m = len(pts)
    for i in range(m - 1):
        d = math.dist(pts[i], pts[i + 1])
        if abs(d - lengths[i]) > _LEN_TOL * lengths[i]:
            return f"link {i + 1} length {d:.9g} != {lengths[i]:.9g}"
    (x0, y0), (x1, y1) = workspace
    for p in pts:
        if not (x0 <= p[0] <= x1 and y0 <= p[1] <= y1):
            return "anchor outside workspace"
    for i in range(m - 2):
        u = (pts[i + 1][0] - pts[i][0], pts[i + 1][1] - pts[i][1])
        v = (pts[i + 2][0] - pts[i + 1][0], pts[i + 2][1] - pts[i + 1][1])
        rel = math.atan2(u[0] * v[1] - u[1] * v[0], u[0] * v[0] + u[1] * v[1])
        if abs(rel) >= math.pi - 1e-6:
            return f"links {i + 1},{i + 2} folded back"
    for i in range(m - 1):
        for k in range(i + 2, m - 1):
            if _cross(pts[i], pts[i + 1], pts[k], pts[k + 1]):
                return f"links {i + 1},{k + 1} intersect"
    for oi, poly in enumerate(obstacles):
        poly = [tuple(map(float, v)) for v in poly]
        for i in range(m - 1):
            if _inside(poly, pts[i]):
                return f"anchor {i + 1} inside obstacle {oi}"
            for e in range(len(poly)):
                if _cross(pts[i], pts[i + 1], poly[e], poly[(e + 1) % len(poly)]):
                    return f"link {i + 1} crosses obstacle {oi}"
        if _inside(poly, pts[-1]):
            return f"anchor {m} inside obstacle {oi}"
    return None


def _interpolate(a: np.ndarray, b: np.ndarray, resolution: float):
    """Dense anchored motion from ``a`` to ``b``, or a reason it is not one."""
    disp = np.linalg.norm(b - a, axis=1)
    j = int(np.argmin(disp))
    if disp[j] > _FIX_TOL:
        return None, "no anchor point stays fixed between consecutive samples"
    da, db = np.diff(a, axis=0), np.diff(b, axis=0)
    ta = np.arctan2(da[:, 1], da[:, 0])
    tb = np.arctan2(db[:, 1], db[:, 0])
    d = (tb - ta + math.pi) % (2 * math.pi) - math.pi
    lengths = np.linalg.norm(da, axis=1)
    steps = max(1, math.ceil(float(np.abs(d).max(initial=0.0)) / resolution))
    out = []
    for s in range(1, steps + 1):
        th = ta + d * (s / steps)
        pts = np.zeros_like(a)
        pts[1:] = np.cumsum(np.column_stack([lengths * np.cos(th), lengths * np.sin(th)]), axis=0)
        out.append(pts - pts[j] + a[j])
    return out, None


def validate_path(segments, lengths, obstacles, workspace, start=None, resolution: float = DENSE_RESOLUTION) -> ValidationReport:
    """Check a planner's dense segments.

    ``obstacles`` is a list of vertex lists, ``workspace`` is
    ``((xmin, ymin), (xmax, ymax))``.
    """
    rep = ValidationReport()
    lengths = [float(x) for x in lengths]
    prev_end = None if start is None else np.asarray(start, dtype=float)
    if prev_end is not None:
        why = config_problem(prev_end, lengths, obstacles, workspace)
        rep.checked += 1
        if why:
            rep.fail(f"start: {why}")
    for si, seg in enumerate(segments):
        seg = np.asarray(seg, dtype=float)
        if prev_end is not None and np.abs(seg[0] - prev_end).max() > 1e-9:
            rep.fail(f"segment {si} does not start where the previous one ended")
        for s in range(len(seg) - 1):
            dense, why = _interpolate(seg[s], seg[s + 1], resolution)
            if why:
                rep.fail(f"segment {si} step {s}: {why}")
                continue
            prev = seg[s]
            for c in dense:
                rep.checked += 1
                why = config_problem(c, lengths, obstacles, workspace)
                fold = _fold_between(prev, c)
                if fold is not None:
                    why = f"links {fold + 1},{fold + 2} fold through each other"
                if why:
                    rep.fail(f"segment {si} step {s}: {why}")
                    break
                prev = c
        prev_end = seg[-1]
    return rep


def validate_result(result, query) -> ValidationReport:
    """Validate a solved :class:`PlanResult` against its query, including the goal."""
    from .planners import goal_test

    scene = query.scene
    obstacles = [o.vertices.tolist() for o in scene.obstacles]
    ws = (scene.workspace.min, scene.workspace.max)
    rep = validate_path(result.segments, query.robot.link_lengths, obstacles, ws, start=query.start)
    if query.robot.is_anchored:
        a = query.robot.variant.anchor_index - 1
        pin = np.asarray(query.robot.variant.anchor_position, dtype=float)
        for si, seg in enumerate(result.segments):
            if np.abs(np.asarray(seg)[:, a] - pin).max() > 1e-9:
                rep.fail(f"segment {si} moves the anchored joint")
    if not result.path:
        rep.fail("empty path")
    elif not goal_test(result.path[-1], query.target):
        rep.fail("final configuration is outside the target region")
    return rep
