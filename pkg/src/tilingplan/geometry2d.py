"""Planar primitives and predicates.

Points are length-2 array-likes, segments are pairs of points and polygons
are :class:`Polygon` instances wrapping an ``(k, 2)`` float array.  Every
predicate treats boundary contact as intersection, and orientation tests use
the absolute tolerance :data:`EPS_GEO`.

Besides the scalar predicates there are a few vectorised kernels
(``*_many``) used by the collision checkers in the hot paths.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateHullError, UnsupportedInputError

EPS_GEO = 1e-9

# regular octagon whose inscribed circle is the unit disc
_OCT_ANGLES = np.pi / 8 + np.arange(8) * np.pi / 4
_OCTAGON = np.stack([np.cos(_OCT_ANGLES), np.sin(_OCT_ANGLES)], axis=1) / np.cos(np.pi / 8)


def _pt(p) -> np.ndarray:
    a = np.asarray(p, dtype=float)
    if a.shape != (2,):
        raise ValueError(f"expected a 2D point, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Aabb:
    min: tuple[float, float]
    max: tuple[float, float]

    def __post_init__(self):
        if not (self.min[0] <= self.max[0] and self.min[1] <= self.max[1]):
            raise ValueError(f"invalid box {self.min} .. {self.max}")

    @classmethod
    def of_points(cls, pts) -> "Aabb":
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        return cls((float(lo[0]), float(lo[1])), (float(hi[0]), float(hi[1])))

    @property
    def width(self) -> float:
        return self.max[0] - self.min[0]

    @property
    def height(self) -> float:
        return self.max[1] - self.min[1]

    def as_array(self) -> np.ndarray:
        return np.array([self.min[0], self.min[1], self.max[0], self.max[1]])

    def overlaps(self, other: "Aabb", eps: float = EPS_GEO) -> bool:
        return not (
            self.max[0] < other.min[0] - eps
            or other.max[0] < self.min[0] - eps
            or self.max[1] < other.min[1] - eps
            or other.max[1] < self.min[1] - eps
        )

    def contains_point(self, p) -> bool:
        return self.min[0] <= p[0] <= self.max[0] and self.min[1] <= p[1] <= self.max[1]


@dataclass(frozen=True, eq=False)
class Polygon:
    """Simple polygon, stored counter-clockwise.

    Clockwise input is reversed on construction.  ``check_simple`` runs the
    quadratic self-intersection test; pass ``False`` for polygons built
    internally (hulls) that are simple by construction.
    """

    vertices: np.ndarray
    check_simple: bool = field(default=True, repr=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 2)
        if len(v) < 3:
            raise ValueError("a polygon needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise ValueError("polygon coordinates must be finite")
        if signed_area(v) < 0:
            v = v[::-1].copy()
        if self.check_simple and not _is_simple(v):
            raise ValueError("polygon is not simple")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "_box", Aabb.of_points(v))

    @property
    def aabb(self) -> Aabb:
        return self._box  # type: ignore[attr-defined]

    def __len__(self) -> int:
        return len(self.vertices)

    def __eq__(self, other) -> bool:
        return isinstance(other, Polygon) and np.array_equal(self.vertices, other.vertices)

    def __hash__(self) -> int:
        return hash(self.vertices.tobytes())

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        v = self.vertices
        return v, np.roll(v, -1, axis=0)

    def translated(self, p) -> "Polygon":
        return Polygon(self.vertices + _pt(p), check_simple=False)

    def is_convex(self) -> bool:
        return is_convex(self.vertices)


def signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def is_convex(v: np.ndarray, eps: float = EPS_GEO) -> bool:
    v = np.asarray(v, dtype=float)
    a = np.roll(v, 1, axis=0)
    c = np.roll(v, -1, axis=0)
    cross = (v[:, 0] - a[:, 0]) * (c[:, 1] - v[:, 1]) - (v[:, 1] - a[:, 1]) * (c[:, 0] - v[:, 0])
    return bool(np.all(cross >= -eps) or np.all(cross <= eps))


def _is_simple(v: np.ndarray) -> bool:
    k = len(v)
    a, b = v, np.roll(v, -1, axis=0)
    for i in range(k):
        for j in range(i + 1, k):
            if j == i + 1 or (i == 0 and j == k - 1):
                continue
            if seg_seg_intersect((a[i], b[i]), (a[j], b[j])):
                return False
    return True


def orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_box(a, b, p, eps=EPS_GEO) -> bool:
    return (
        min(a[0], b[0]) - eps <= p[0] <= max(a[0], b[0]) + eps
        and min(a[1], b[1]) - eps <= p[1] <= max(a[1], b[1]) + eps
    )


def seg_seg_intersect(s1, s2, eps: float = EPS_GEO) -> bool:
    """True iff the closed segments share a point (touching and overlap count)."""
    p1, p2 = _pt(s1[0]), _pt(s1[1])
    q1, q2 = _pt(s2[0]), _pt(s2[1])
    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and (
        (d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)
    ):
        return True
    if abs(d1) <= eps and _on_box(q1, q2, p1, eps):
        return True
    if abs(d2) <= eps and _on_box(q1, q2, p2, eps):
        return True
    if abs(d3) <= eps and _on_box(p1, p2, q1, eps):
        return True
    if abs(d4) <= eps and _on_box(p1, p2, q2, eps):
        return True
    return False


def point_segment_distance(p, a, b) -> float:
    p, a, b = _pt(p), _pt(a), _pt(b)
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0.0 else min(1.0, max(0.0, float((p - a) @ ab) / denom))
    return float(np.hypot(*(a + t * ab - p)))


def point_in_polygon(q, poly: Polygon, eps: float = EPS_GEO) -> bool:
    """Boundary-inclusive containment (crossing-number rule)."""
    q = _pt(q)
    box = poly.aabb
    if not (box.min[0] - eps <= q[0] <= box.max[0] + eps and box.min[1] - eps <= q[1] <= box.max[1] + eps):
        return False
    return bool(points_in_polygon(q[None, :], poly.vertices, eps)[0])


def seg_polygon_intersect(s, poly: Polygon) -> bool:
    a, b = _pt(s[0]), _pt(s[1])
    if not Aabb.of_points([a, b]).overlaps(poly.aabb):
        return False
    va, vb = poly.edges()
    hit = segments_intersect_many(a[None, :], b[None, :], va, vb)
    if hit.any():
        return True
    return point_in_polygon(a, poly) or point_in_polygon(b, poly)


def poly_poly_intersect(p1: Polygon, p2: Polygon) -> bool:
    if not p1.aabb.overlaps(p2.aabb):
        return False
    a1, b1 = p1.edges()
    a2, b2 = p2.edges()
    n1, n2 = len(a1), len(a2)
    hit = segments_intersect_many(
        np.repeat(a1, n2, axis=0), np.repeat(b1, n2, axis=0), np.tile(a2, (n1, 1)), np.tile(b2, (n1, 1))
    )
    if hit.any():
        return True
    return point_in_polygon(p1.vertices[0], p2) or point_in_polygon(p2.vertices[0], p1)


def convex_hull(pts) -> Polygon:
    """Counter-clockwise convex hull (Andrew's monotone chain), collinear points dropped."""
    p = np.unique(np.asarray(pts, dtype=float).reshape(-1, 2), axis=0)
    if len(p) < 3:
        raise DegenerateHullError("need at least 3 distinct points")

    def half(points):
        out: list[np.ndarray] = []
        for q in points:
            while len(out) >= 2 and orient(out[-2], out[-1], q) <= EPS_GEO:
                out.pop()
            out.append(q)
        return out

    lower = half(p)
    upper = half(p[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    if len(hull) < 3:
        raise DegenerateHullError("all points are collinear")
    return Polygon(hull, check_simple=False)


def inflate(poly: Polygon, margin: float) -> Polygon:
    """Outer octagonal approximation of ``poly`` dilated by a disc of radius ``margin``."""
    if margin < 0:
        raise ValueError("margin must be non-negative")
    if not poly.is_convex():
        raise UnsupportedInputError("inflate only supports convex polygons")
    if margin == 0:
        return Polygon(poly.vertices.copy(), check_simple=False)
    sums = (poly.vertices[:, None, :] + margin * _OCTAGON[None, :, :]).reshape(-1, 2)
    return convex_hull(sums)


def sliver(a, b, half_width: float = EPS_GEO) -> Polygon:
    """Thin rectangle around segment ``ab``; a zero-length segment gives a small square."""
    a, b = _pt(a), _pt(b)
    d = b - a
    n = float(np.hypot(*d))
    u = np.array([1.0, 0.0]) if n == 0 else d / n
    w = np.array([-u[1], u[0]]) * half_width
    e = u * half_width
    return Polygon(np.array([a - e - w, b + e - w, b + e + w, a - e + w]), check_simple=False)


# ---------------------------------------------------------------------------
# vectorised kernels


def _orient_many(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def segments_intersect_many(p1, p2, q1, q2, eps: float = EPS_GEO) -> np.ndarray:
    """Element-wise closed-segment intersection over broadcastable ``(..., 2)`` arrays."""
    p1x, p1y = p1[..., 0], p1[..., 1]
    p2x, p2y = p2[..., 0], p2[..., 1]
    q1x, q1y = q1[..., 0], q1[..., 1]
    q2x, q2y = q2[..., 0], q2[..., 1]
    d1 = _orient_many(q1x, q1y, q2x, q2y, p1x, p1y)
    d2 = _orient_many(q1x, q1y, q2x, q2y, p2x, p2y)
    d3 = _orient_many(p1x, p1y, p2x, p2y, q1x, q1y)
    d4 = _orient_many(p1x, p1y, p2x, p2y, q2x, q2y)
    proper = (((d1 > eps) & (d2 < -eps)) | ((d1 < -eps) & (d2 > eps))) & (
        ((d3 > eps) & (d4 < -eps)) | ((d3 < -eps) & (d4 > eps))
    )

    def on(ax, ay, bx, by, px, py):
        return (
            (np.minimum(ax, bx) - eps <= px)
            & (px <= np.maximum(ax, bx) + eps)
            & (np.minimum(ay, by) - eps <= py)
            & (py <= np.maximum(ay, by) + eps)
        )

    touch = (
        ((np.abs(d1) <= eps) & on(q1x, q1y, q2x, q2y, p1x, p1y))
        | ((np.abs(d2) <= eps) & on(q1x, q1y, q2x, q2y, p2x, p2y))
        | ((np.abs(d3) <= eps) & on(p1x, p1y, p2x, p2y, q1x, q1y))
        | ((np.abs(d4) <= eps) & on(p1x, p1y, p2x, p2y, q2x, q2y))
    )
    return proper | touch


def point_segment_distance_many(p, a, b) -> np.ndarray:
    ab = b - a
    denom = np.einsum("...i,...i->...", ab, ab)
    t = np.einsum("...i,...i->...", p - a, ab)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        t = np.where(denom > 0, t / np.where(denom > 0, denom, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    d = a + t[..., None] * ab - p
    return np.sqrt(np.einsum("...i,...i->...", d, d))


def segment_distance_many(p1, p2, q1, q2) -> np.ndarray:
    """Element-wise distance between closed segments (0 when they intersect)."""
    d = np.minimum(
        np.minimum(point_segment_distance_many(p1, q1, q2), point_segment_distance_many(p2, q1, q2)),
        np.minimum(point_segment_distance_many(q1, p1, p2), point_segment_distance_many(q2, p1, p2)),
    )
    return np.where(segments_intersect_many(p1, p2, q1, q2), 0.0, d)


def points_in_polygon(pts, verts, eps: float = EPS_GEO) -> np.ndarray:
    """Boundary-inclusive crossing-number test of ``(N, 2)`` points against one polygon."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    a = np.asarray(verts, dtype=float)
    b = np.roll(a, -1, axis=0)
    px = pts[:, None, 0]
    py = pts[:, None, 1]
    on_edge = point_segment_distance_many(pts[:, None, :], a[None], b[None]) <= eps
    ay, by = a[None, :, 1], b[None, :, 1]
    ax, bx = a[None, :, 0], b[None, :, 0]
    straddle = (ay > py) != (by > py)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        xcross = ax + (py - ay) * (bx - ax) / np.where(by != ay, by - ay, 1.0)
    crossings = np.count_nonzero(straddle & (px < xcross), axis=1)
    return on_edge.any(axis=1) | (crossings % 2 == 1)


def points_in_triangles(pts, a, b, c, eps: float = EPS_GEO) -> np.ndarray:
    """Broadcast point-in-closed-triangle test, orientation agnostic."""
    o1 = _orient_many(a[..., 0], a[..., 1], b[..., 0], b[..., 1], pts[..., 0], pts[..., 1])
    o2 = _orient_many(b[..., 0], b[..., 1], c[..., 0], c[..., 1], pts[..., 0], pts[..., 1])
    o3 = _orient_many(c[..., 0], c[..., 1], a[..., 0], a[..., 1], pts[..., 0], pts[..., 1])
    pos = (o1 >= -eps) & (o2 >= -eps) & (o3 >= -eps)
    neg = (o1 <= eps) & (o2 <= eps) & (o3 <= eps)
    return pos | neg
