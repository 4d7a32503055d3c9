"""Anchored joint-angle interpolation and swept-area bounds.

A local plan keeps one anchor point fixed and moves every absolute link
angle along its shorter arc at a constant rate.  Validation is continuous:
fold-back of consecutive links is detected analytically (relative angles are
linear in the path parameter), and non-adjacent link pairs are certified
between samples by a clearance-versus-motion bound, refined a few times by
subdivision before giving up.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .geometry2d import EPS_GEO, Polygon, convex_hull, inflate, segment_distance_many, sliver
from .errors import DegenerateHullError
from .robot import EPS_FOLD, SELF_CHECKS, RobotSpec, link_angles, positions_from_angles

DEFAULT_STEP = 0.05
REFINE_FACTOR = 4
REFINE_DEPTH = 4


def wrap_pi(x):
    """Map angles to [-pi, pi)."""
    return np.mod(np.asarray(x) + math.pi, 2 * math.pi) - math.pi


@lru_cache(maxsize=None)
def chain_matrix(m: int, j: int) -> np.ndarray:
    """``M[i, k] = 1`` iff link ``k`` lies on the chain from anchor ``j`` to the far end of link ``i``.

    ``j`` is 1-based; links are 0-based.
    """
    jj = j - 1
    M = np.zeros((m - 1, m - 1))
    for i in range(m - 1):
        if i >= jj:
            M[i, jj : i + 1] = 1.0
        else:
            M[i, i:jj] = 1.0
    M.setflags(write=False)
    return M


@dataclass(eq=False)
class LocalPath:
    """Validated anchored motion between two anchored base configurations.

    ``samples`` has shape ``(S + 1, m, 2)`` with anchor ``anchor_index`` at
    the origin in every sample.  ``margins[i]`` bounds how far link ``i``
    strays, mid-sub-step, from the convex hull of its endpoints at the two
    bracketing samples.
    """

    anchor_index: int
    start_id: int
    end_id: int
    samples: np.ndarray
    margins: np.ndarray
    _box: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    @property
    def box(self) -> np.ndarray:
        """AABB (xmin, ymin, xmax, ymax) of every swept piece, margins included."""
        if self._box is None:
            pts = self.samples.reshape(-1, 2)
            pad = float(self.margins.max()) if self.margins.size else 0.0
            pad = max(pad, EPS_GEO)
            self._box = np.concatenate([pts.min(axis=0) - pad, pts.max(axis=0) + pad])
        return self._box

    def reversed(self) -> "LocalPath":
        return LocalPath(self.anchor_index, self.end_id, self.start_id, self.samples[::-1], self.margins)

    @property
    def swept(self) -> list[list[Polygon]]:
        """Per-link list of convex swept pieces (octagon-inflated hulls)."""
        return [pieces_from_samples(self.samples, i, self.margins[i]) for i in range(self.samples.shape[1] - 1)]


def fold_crossed(ta: np.ndarray, d: np.ndarray, eps: float = EPS_FOLD) -> bool:
    """Does any consecutive relative angle pass through an odd multiple of pi?"""
    if len(ta) < 2:
        return False
    r0 = wrap_pi(ta[1:] - ta[:-1])
    r1 = r0 + (d[1:] - d[:-1])
    lo = np.minimum(r0, r1) - eps
    hi = np.maximum(r0, r1) + eps
    for k in (-3, -1, 1, 3):
        v = k * math.pi
        if np.any((lo <= v) & (v <= hi)):
            return True
    return False


def _positions(spec: RobotSpec, ta, d, t, jj) -> np.ndarray:
    ang = ta[None, :] + t[:, None] * d[None, :]
    P = positions_from_angles(spec.lengths, ang)
    return P - P[:, jj : jj + 1]


def _certify(spec: RobotSpec, ta, d, jj, S: int, P: np.ndarray) -> bool:
    """Certify that non-adjacent links never touch along the interpolation."""
    ia, ib = spec.nonadjacent_pairs
    if len(ia) == 0:
        return True
    SELF_CHECKS.add(len(P))
    D = segment_distance_many(P[:, ia], P[:, ia + 1], P[:, ib], P[:, ib + 1])
    if np.any(D <= EPS_GEO):
        return False
    if S == 0:
        return True
    M = chain_matrix(spec.m, jj + 1)
    # per-link bound on point displacement over one sub-step (arc lengths)
    R = M @ (spec.lengths * np.abs(d)) / S
    need = R[ia] + R[ib]
    bad_s, bad_p = np.nonzero(D[:-1] + D[1:] <= need[None, :])
    if len(bad_s) == 0:
        return True
    width = 1.0 / S
    t0 = bad_s / S
    pairs = bad_p
    for _ in range(REFINE_DEPTH):
        width /= REFINE_FACTOR
        q = np.arange(REFINE_FACTOR + 1)
        ts = t0[:, None] + q[None, :] * width  # (B, F+1)
        ang = ta[None, None, :] + ts[..., None] * d[None, None, :]
        Pq = positions_from_angles(spec.lengths, ang)
        Pq = (Pq - Pq[:, :, jj : jj + 1]).transpose(0, 2, 1, 3)  # (B, m, F+1, 2)
        a, b = ia[pairs], ib[pairs]
        rows = np.arange(len(pairs))
        Dq = segment_distance_many(Pq[rows, a], Pq[rows, a + 1], Pq[rows, b], Pq[rows, b + 1])
        SELF_CHECKS.add(Pq.shape[0] * Pq.shape[2])
        if np.any(Dq <= EPS_GEO):
            return False
        needq = (need[pairs] * (width * S))[:, None]
        bad_b, bad_q = np.nonzero(Dq[:, :-1] + Dq[:, 1:] <= needq)
        if len(bad_b) == 0:
            return True
        t0 = t0[bad_b] + bad_q * width
        pairs = pairs[bad_b]
    return False


def local_plan_anchored(
    spec: RobotSpec,
    a: np.ndarray,
    b: np.ndarray,
    j: int,
    step: float = DEFAULT_STEP,
    start_id: int = -1,
    end_id: int = -1,
) -> LocalPath | None:
    """Anchored shorter-arc interpolation from ``a`` to ``b``; ``None`` when it self-collides.

    Both inputs must have anchor ``j`` at the origin.
    """
    jj = j - 1
    ta = link_angles(a)
    tb = link_angles(b)
    d = wrap_pi(tb - ta)
    dmax = float(np.max(np.abs(d))) if d.size else 0.0
    if dmax == 0.0:
        S = 0
        P = np.asarray(a, dtype=float)[None].copy()
    else:
        S = max(1, math.ceil(dmax / step - 1e-12))
        if fold_crossed(ta, d):
            return None
        t = np.arange(S + 1) / S
        P = _positions(spec, ta, d, t, jj)
        P[0] = a
        P[-1] = b
    if not _certify(spec, ta, d, jj, S, P):
        return None
    M = chain_matrix(spec.m, j)
    if S == 0:
        margins = np.zeros(spec.m - 1)
    else:
        margins = M @ (spec.lengths * (d / S) ** 2) / 8.0
    return LocalPath(j, start_id, end_id, P, margins)


def pieces_from_samples(samples: np.ndarray, link: int, margin: float) -> list[Polygon]:
    """Convex pieces covering one link over consecutive sample pairs."""
    if len(samples) == 1:
        return [sliver(samples[0, link], samples[0, link + 1])]
    out = []
    for s in range(len(samples) - 1):
        pts = np.array([samples[s, link], samples[s, link + 1], samples[s + 1, link], samples[s + 1, link + 1]])
        try:
            hull = convex_hull(pts)
        except DegenerateHullError:
            lo = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
            hull = sliver(lo[0], lo[-1])
        out.append(inflate(hull, float(margin)))
    return out


def sweep_polygon(spec: RobotSpec, samples, link_index: int, anchor_index: int) -> list[Polygon]:
    """Convex pieces whose union contains link ``link_index`` (0-based) over the motion.

    Each sub-step piece is the hull of the link's four endpoints at the two
    bracketing samples, inflated by the summed chord sagittas of every link
    between the fixed anchor and the far end of this link.
    """
    samples = np.asarray(samples, dtype=float)
    if len(samples) == 1:
        return pieces_from_samples(samples, link_index, 0.0)
    th = link_angles(samples)
    dth = np.abs(wrap_pi(np.diff(th, axis=0))).max(axis=0)
    M = chain_matrix(spec.m, anchor_index)
    margin = float(M[link_index] @ (spec.lengths * dth**2) / 8.0)
    return pieces_from_samples(samples, link_index, margin)
