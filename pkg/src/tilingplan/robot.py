"""Planar multi-link chains.

A configuration is an ``(m, 2)`` float array holding the positions of the
``m`` anchor points (link endpoints).  The angle form ``(head, angles)``
stores the first anchor and the absolute angle of every link with the x-axis.
Anchor indices in the public API are 1-based, matching the usual notation
``j(C)`` for the position of the j-th anchor.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidConfigurationError, ShapeError
from .geometry2d import (
    Aabb,
    Polygon,
    points_in_polygon,
    seg_polygon_intersect,
    seg_seg_intersect,
    segments_intersect_many,
)

TWO_PI = 2.0 * math.pi
EPS_LEN = 1e-7
EPS_FOLD = 1e-6


class CheckCounter:
    """Monotone call counter used to instrument collision predicates."""

    def __init__(self) -> None:
        self.value = 0

    def add(self, k: int = 1) -> None:
        self.value += k


#: every self-collision predicate evaluation in the process bumps this counter
SELF_CHECKS = CheckCounter()
#: every configuration-vs-obstacle evaluation bumps this counter
OBSTACLE_CHECKS = CheckCounter()


@dataclass(frozen=True)
class Anchored:
    """Robot with interior joint ``joint_index`` pinned at ``anchor_position``.

    Joints are the interior anchor points, numbered 1..m-2, so joint ``i``
    is anchor ``i + 1``.
    """

    joint_index: int
    anchor_position: tuple[float, float]

    @property
    def anchor_index(self) -> int:
        return self.joint_index + 1


@dataclass(frozen=True)
class RobotSpec:
    link_lengths: tuple[float, ...]
    variant: Anchored | None = None

    def __post_init__(self):
        lengths = tuple(float(x) for x in self.link_lengths)
        if len(lengths) < 1:
            raise ValueError("a robot needs at least one link")
        if not all(math.isfinite(x) and x > 0 for x in lengths):
            raise ValueError("link lengths must be finite and positive")
        object.__setattr__(self, "link_lengths", lengths)
        if self.variant is not None:
            m = len(lengths) + 1
            if not 1 <= self.variant.joint_index <= m - 2:
                raise ValueError(f"joint_index must be in [1, {m - 2}]")

    @property
    def m(self) -> int:
        """Number of anchor points."""
        return len(self.link_lengths) + 1

    @property
    def lengths(self) -> np.ndarray:
        return np.asarray(self.link_lengths)

    @property
    def max_length(self) -> float:
        return max(self.link_lengths)

    @property
    def is_anchored(self) -> bool:
        return self.variant is not None

    def same_robot(self, other: "RobotSpec") -> bool:
        """Roadmaps depend on link lengths only; the variant is a query-time constraint."""
        return self.link_lengths == other.link_lengths

    @cached_property
    def nonadjacent_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        pairs = [(i, k) for i, k in itertools.combinations(range(self.m - 1), 2) if k >= i + 2]
        if not pairs:
            return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
        a, b = zip(*pairs)
        return np.array(a), np.array(b)


@dataclass(frozen=True)
class AngleForm:
    head: tuple[float, float]
    angles: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "head", (float(self.head[0]), float(self.head[1])))
        object.__setattr__(self, "angles", tuple(float(a) % TWO_PI for a in self.angles))


@dataclass(frozen=True)
class Scene:
    obstacles: tuple[Polygon, ...]
    workspace: Aabb

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if self.workspace.width <= 0 or self.workspace.height <= 0:
            raise ValueError("workspace must be non-degenerate")

    @cached_property
    def obstacle_boxes(self) -> np.ndarray:
        """``(k, 4)`` array of obstacle AABBs as (xmin, ymin, xmax, ymax)."""
        if not self.obstacles:
            return np.zeros((0, 4))
        return np.array([o.aabb.as_array() for o in self.obstacles])


def as_config(c) -> np.ndarray:
    return np.asarray(c, dtype=float).reshape(-1, 2)


def positions_from_angles(lengths: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """Anchor positions with the head at the origin; ``angles`` has shape ``(..., m-1)``."""
    steps = np.stack([lengths * np.cos(angles), lengths * np.sin(angles)], axis=-1)
    zeros = np.zeros(angles.shape[:-1] + (1, 2))
    return np.concatenate([zeros, np.cumsum(steps, axis=-2)], axis=-2)


def from_angles(spec: RobotSpec, af: AngleForm) -> np.ndarray:
    angles = np.asarray(af.angles, dtype=float)
    if angles.shape != (spec.m - 1,):
        raise ShapeError(f"expected {spec.m - 1} angles, got {angles.shape}")
    return positions_from_angles(spec.lengths, angles) + np.asarray(af.head)


def link_angles(c: np.ndarray) -> np.ndarray:
    """Absolute link angles in [0, 2pi), no validation; works on ``(..., m, 2)``."""
    d = np.diff(c, axis=-2)
    return np.mod(np.arctan2(d[..., 1], d[..., 0]), TWO_PI)


def check_lengths(spec: RobotSpec, c: np.ndarray) -> None:
    c = as_config(c)
    if c.shape != (spec.m, 2):
        raise ShapeError(f"expected {spec.m} anchors, got {c.shape[0]}")
    if not np.all(np.isfinite(c)):
        raise InvalidConfigurationError("non-finite anchor coordinates")
    seg = np.linalg.norm(np.diff(c, axis=0), axis=1)
    err = np.abs(seg - spec.lengths) / spec.lengths
    if np.any(err > EPS_LEN):
        i = int(np.argmax(err))
        raise InvalidConfigurationError(
            f"link {i + 1} has length {seg[i]!r}, expected {spec.link_lengths[i]!r}"
        )


def to_angles(spec: RobotSpec, c) -> AngleForm:
    c = as_config(c)
    check_lengths(spec, c)
    return AngleForm(head=(c[0, 0], c[0, 1]), angles=tuple(link_angles(c)))


def translate(c, p) -> np.ndarray:
    return as_config(c) + np.asarray(p, dtype=float)


def anchor(c, j: int) -> np.ndarray:
    c = as_config(c)
    if not 1 <= j <= len(c):
        raise IndexError(f"anchor index {j} out of range 1..{len(c)}")
    return c[j - 1].copy()


def rotate_about_anchor(c, j: int, alpha: float) -> np.ndarray:
    c = as_config(c)
    pivot = anchor(c, j)
    ca, sa = math.cos(alpha), math.sin(alpha)
    rot = np.array([[ca, -sa], [sa, ca]])
    out = (c - pivot) @ rot.T + pivot
    out[j - 1] = pivot
    return out


def fold_mask(c: np.ndarray, eps: float = EPS_FOLD) -> np.ndarray:
    """Per-configuration flag: some consecutive link pair is folded back (relative angle ~ pi)."""
    d = np.diff(c, axis=-2)
    if d.shape[-2] < 2:
        return np.zeros(c.shape[:-2], dtype=bool)
    u, v = d[..., :-1, :], d[..., 1:, :]
    cross = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    dot = np.einsum("...i,...i->...", u, v)
    rel = np.abs(np.arctan2(cross, dot))
    return np.any(rel >= math.pi - eps, axis=-1)


def self_collides_many(spec: RobotSpec, cs: np.ndarray, counter: CheckCounter | None = None) -> np.ndarray:
    """Vectorised self-collision test over ``(N, m, 2)`` configurations."""
    cs = np.asarray(cs, dtype=float).reshape(-1, spec.m, 2)
    SELF_CHECKS.add(len(cs))
    if counter is not None:
        counter.add(len(cs))
    hit = fold_mask(cs)
    ia, ib = spec.nonadjacent_pairs
    if len(ia):
        a1, a2 = cs[:, ia], cs[:, ia + 1]
        b1, b2 = cs[:, ib], cs[:, ib + 1]
        hit |= segments_intersect_many(a1, a2, b1, b2).any(axis=1)
    return hit


def self_collides(spec: RobotSpec, c) -> bool:
    c = as_config(c)
    SELF_CHECKS.add()
    if fold_mask(c[None])[0]:
        return True
    ia, ib = spec.nonadjacent_pairs
    for i, k in zip(ia, ib):
        if seg_seg_intersect((c[i], c[i + 1]), (c[k], c[k + 1])):
            return True
    return False


def obstacle_collides(spec: RobotSpec, c, scene: Scene) -> bool:
    c = as_config(c)
    OBSTACLE_CHECKS.add()
    ws = scene.workspace
    if np.any(c[:, 0] < ws.min[0]) or np.any(c[:, 0] > ws.max[0]):
        return True
    if np.any(c[:, 1] < ws.min[1]) or np.any(c[:, 1] > ws.max[1]):
        return True
    for obs in scene.obstacles:
        for i in range(spec.m - 1):
            if seg_polygon_intersect((c[i], c[i + 1]), obs):
                return True
    return False


def obstacle_collides_many(
    spec: RobotSpec, cs: np.ndarray, scene: Scene, counter: CheckCounter | None = None
) -> np.ndarray:
    """Vectorised obstacle/workspace test over ``(N, m, 2)`` configurations."""
    cs = np.asarray(cs, dtype=float).reshape(-1, spec.m, 2)
    OBSTACLE_CHECKS.add(len(cs))
    if counter is not None:
        counter.add(len(cs))
    ws = scene.workspace
    x, y = cs[..., 0], cs[..., 1]
    hit = ((x < ws.min[0]) | (x > ws.max[0]) | (y < ws.min[1]) | (y > ws.max[1])).any(axis=1)
    if not scene.obstacles:
        return hit
    a, b = cs[:, :-1], cs[:, 1:]
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    for obs, box in zip(scene.obstacles, scene.obstacle_boxes):
        near = (lo[..., 0] <= box[2]) & (hi[..., 0] >= box[0]) & (lo[..., 1] <= box[3]) & (hi[..., 1] >= box[1])
        near &= ~hit[:, None]
        if not near.any():
            continue
        ci, li = np.nonzero(near)
        sa, sb = a[ci, li], b[ci, li]
        va = obs.vertices
        vb = np.roll(va, -1, axis=0)
        cross = segments_intersect_many(sa[:, None], sb[:, None], va[None], vb[None]).any(axis=1)
        inside = points_in_polygon(sa, va)
        seg_hit = cross | inside
        hit[np.unique(ci[seg_hit])] = True
    return hit


def euclid_distance(c1, c2) -> float:
    a, b = as_config(c1), as_config(c2)
    if a.shape != b.shape:
        raise ShapeError("configurations have different numbers of anchors")
    return float(np.linalg.norm((a - b).ravel()))


def anchor_sum_distance(c1, c2) -> float:
    a, b = as_config(c1), as_config(c2)
    if a.shape != b.shape:
        raise ShapeError("configurations have different numbers of anchors")
    return float(np.sum(np.linalg.norm(a - b, axis=1)))
