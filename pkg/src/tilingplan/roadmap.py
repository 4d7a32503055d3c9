"""Robot-specific preprocessing: base configurations and the m anchored base roadmaps.

Everything here depends only on the robot's link lengths, never on a scene,
so a :class:`RoadmapBundle` is built once and reused for every query.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import SamplingFailureError, StartIsolatedError
from .localplan import DEFAULT_STEP, LocalPath, local_plan_anchored
from .robot import TWO_PI, RobotSpec, as_config, positions_from_angles, self_collides, self_collides_many

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
REJECTION_BUDGET = 10_000
_BATCH = 256


@dataclass(eq=False)
class BaseConfigSet:
    """Self-collision-free configurations with the head at the origin."""

    configs: np.ndarray  # (n, m, 2)
    rng_seed: int

    @property
    def n(self) -> int:
        return len(self.configs)


@dataclass(eq=False)
class BaseRoadmap:
    """Roadmap over the base set translated so that anchor ``anchor_index`` sits at the origin.

    Adjacency is stored in CSR form: the neighbours of vertex ``v`` are
    ``adj_nbr[adj_ptr[v]:adj_ptr[v+1]]`` (sorted) reached through edges
    ``adj_edge[...]``.  ``edges[e] = (u, w)`` with ``u < w`` and
    ``paths[e]`` runs from ``u`` to ``w``.
    """

    anchor_index: int
    vertices: np.ndarray  # (n, m, 2)
    edges: np.ndarray  # (E, 2) int
    paths: list[LocalPath]
    adj_ptr: np.ndarray = field(init=False)
    adj_nbr: np.ndarray = field(init=False)
    adj_edge: np.ndarray = field(init=False)
    edge_boxes: np.ndarray = field(init=False)

    def __post_init__(self):
        n = len(self.vertices)
        E = len(self.edges)
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]]) if E else np.zeros(0, int)
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]]) if E else np.zeros(0, int)
        eid = np.concatenate([np.arange(E), np.arange(E)])
        order = np.lexsort((dst, src))
        self.adj_nbr = dst[order].astype(np.int64)
        self.adj_edge = eid[order].astype(np.int64)
        counts = np.bincount(src, minlength=n) if E else np.zeros(n, int)
        self.adj_ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.edge_boxes = np.array([p.box for p in self.paths]).reshape(-1, 4)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbors_of(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.adj_ptr[v], self.adj_ptr[v + 1]
        return self.adj_nbr[lo:hi], self.adj_edge[lo:hi]

    def path(self, e: int, from_vertex: int) -> LocalPath:
        p = self.paths[e]
        return p if p.start_id == from_vertex else p.reversed()


@dataclass(eq=False)
class RoadmapBundle:
    spec: RobotSpec
    base_set: BaseConfigSet
    roadmaps: list[BaseRoadmap]
    k: int
    step: float = DEFAULT_STEP
    format_version: int = FORMAT_VERSION

    @property
    def m(self) -> int:
        return self.spec.m

    @property
    def n(self) -> int:
        return self.base_set.n

    def summary(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "k": self.k,
            "edges": [r.n_edges for r in self.roadmaps],
        }


@dataclass(eq=False)
class StartAttachment:
    """Anchored local paths from the start copies S_j to base-roadmap vertices."""

    start: np.ndarray  # (m, 2) world coordinates
    # per anchor (0-based list index): base ids and paths S_j -> C_{j,b}
    targets: list[np.ndarray]
    paths: list[list[LocalPath]]

    @property
    def n_edges(self) -> int:
        return sum(len(t) for t in self.targets)


def sample_base_configs(spec: RobotSpec, n: int, seed: int) -> BaseConfigSet:
    """Rejection-sample ``n`` self-collision-free configurations, head at the origin."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    out: list[np.ndarray] = []
    attempts = 0
    while len(out) < n:
        ang = rng.uniform(0.0, TWO_PI, size=(_BATCH, spec.m - 1))
        cs = positions_from_angles(spec.lengths, ang)
        bad = self_collides_many(spec, cs)
        for c, b in zip(cs, bad):
            attempts += 1
            if not b:
                out.append(c)
                attempts = 0
                if len(out) == n:
                    break
            elif attempts >= REJECTION_BUDGET:
                raise SamplingFailureError(
                    f"no self-collision-free sample in {REJECTION_BUDGET} attempts "
                    f"({len(out)} of {n} collected)"
                )
    return BaseConfigSet(np.array(out), int(seed))


def anchor_config(c, j: int) -> np.ndarray:
    """``C - j(C)``: translate so anchor ``j`` (1-based) sits exactly at the origin."""
    c = as_config(c)
    return c - c[j - 1]


def default_k(n: int) -> int:
    """``ceil(2 e ln n)`` clamped to ``n - 1``."""
    if n < 2:
        raise ValueError("default_k needs n >= 2")
    return min(math.ceil(2.0 * math.e * math.log(n)), n - 1)


def _knn_pairs(vertices: np.ndarray, k: int) -> np.ndarray:
    n = len(vertices)
    if n < 2 or k < 1:
        return np.zeros((0, 2), dtype=np.int64)
    flat = vertices.reshape(n, -1)
    kk = min(k + 1, n)
    _, idx = cKDTree(flat).query(flat, k=kk)
    idx = np.asarray(idx).reshape(n, kk)
    pairs = set()
    for u in range(n):
        for w in idx[u]:
            w = int(w)
            if w != u and w < n:
                pairs.add((min(u, w), max(u, w)))
    return np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)


def build_base_roadmap(base: BaseConfigSet, spec: RobotSpec, j: int, k: int, step: float = DEFAULT_STEP) -> BaseRoadmap:
    verts = base.configs - base.configs[:, j - 1 : j, :]
    edges, paths = [], []
    for u, w in _knn_pairs(verts, k):
        p = local_plan_anchored(spec, verts[u], verts[w], j, step, int(u), int(w))
        if p is not None:
            edges.append((u, w))
            paths.append(p)
    log.debug("roadmap j=%d: %d edges", j, len(edges))
    return BaseRoadmap(j, verts, np.array(edges, dtype=np.int64).reshape(-1, 2), paths)


def _build_one(args):
    base, spec, j, k, step = args
    return build_base_roadmap(base, spec, j, k, step)


def build_bundle_from_configs(
    spec: RobotSpec,
    base: BaseConfigSet,
    k: int,
    step: float = DEFAULT_STEP,
    jobs: int = 1,
    anchors: list[int] | None = None,
) -> RoadmapBundle:
    """Build all m roadmaps over one shared base set.

    ``anchors`` restricts which roadmaps receive edges (others are built
    with vertices only); the result is independent of ``jobs``.
    """
    wanted = set(range(1, spec.m + 1) if anchors is None else anchors)
    tasks = [(base, spec, j, k if j in wanted else 0, step) for j in range(1, spec.m + 1)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            roadmaps = list(ex.map(_build_one, tasks))
    else:
        roadmaps = [_build_one(t) for t in tasks]
    return RoadmapBundle(spec, base, roadmaps, k, step)


def build_bundle(
    spec: RobotSpec,
    n: int,
    k: int | None = None,
    step: float = DEFAULT_STEP,
    seed: int = 0,
    jobs: int = 1,
) -> RoadmapBundle:
    base = sample_base_configs(spec, n, seed)
    if k is None:
        k = default_k(n) if n >= 2 else 0
    return build_bundle_from_configs(spec, base, k, step, jobs)


def connect_start(bundle: RoadmapBundle, s, k: int | None = None, step: float | None = None) -> StartAttachment:
    """Attach ``S_j = S - j(S)`` to the k nearest vertices of every base roadmap."""
    spec = bundle.spec
    s = as_config(s)
    if self_collides(spec, s):
        raise ValueError("start configuration is in self collision")
    k = bundle.k if k is None else k
    step = bundle.step if step is None else step
    targets, paths = [], []
    anchors = [spec.variant.anchor_index] if spec.is_anchored else range(1, spec.m + 1)
    for j in range(1, spec.m + 1):
        if j not in anchors or k < 1:
            targets.append(np.zeros(0, dtype=np.int64))
            paths.append([])
            continue
        rm = bundle.roadmaps[j - 1]
        sj = anchor_config(s, j)
        flat = rm.vertices.reshape(len(rm.vertices), -1)
        d = np.linalg.norm(flat - sj.ravel(), axis=1)
        order = np.argsort(d, kind="stable")[:k]
        tj, pj = [], []
        for b in order:
            p = local_plan_anchored(spec, sj, rm.vertices[b], j, step, -1, int(b))
            if p is not None:
                tj.append(int(b))
                pj.append(p)
        targets.append(np.array(tj, dtype=np.int64))
        paths.append(pj)
    att = StartAttachment(s, targets, paths)
    if att.n_edges == 0:
        raise StartIsolatedError("every start attachment attempt was rejected")
    return att
