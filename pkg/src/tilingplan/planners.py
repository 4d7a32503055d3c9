"""Query-stage planners: dRRT over the tiling roadmap (TR-dRRT) and a plain RRT baseline."""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidQueryError, RobotMismatchError, StartIsolatedError
from .localplan import fold_crossed, wrap_pi
from .roadmap import RoadmapBundle, connect_start
from .robot import (
    OBSTACLE_CHECKS,
    SELF_CHECKS,
    TWO_PI,
    CheckCounter,
    RobotSpec,
    Scene,
    as_config,
    check_lengths,
    link_angles,
    obstacle_collides_many,
    positions_from_angles,
    self_collides,
    self_collides_many,
)
from .tiling import START, TileEdge, TileVertex, edge_path, expand, path_obstacle_free, realize, start_vertex

SOLVED = "solved"
TIMEOUT = "timeout"
START_ISOLATED = "start_isolated"


@dataclass(frozen=True)
class TargetRegion:
    kind: str  # "head_disc" | "both_endpoints_disc"
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if self.kind not in ("head_disc", "both_endpoints_disc"):
            raise ValueError(f"unknown target kind {self.kind!r}")
        if not self.radius > 0:
            raise ValueError("target radius must be positive")


@dataclass(frozen=True)
class Query:
    robot: RobotSpec
    start: np.ndarray
    target: TargetRegion
    scene: Scene


@dataclass
class DrrtParams:
    max_iters: int = 200_000
    time_budget_ms: float = 60_000.0
    goal_bias: float = 0.05
    k_start: int | None = None
    seed: int = 0


@dataclass
class RrtParams:
    max_iters: int = 200_000
    time_budget_ms: float = 60_000.0
    step_rad: float = 0.1
    goal_bias: float = 0.05
    seed: int = 0
    check_step: float = 0.01


@dataclass
class PlanStats:
    iterations: int = 0
    tree_size: int = 0
    self_collision_checks: int = 0
    obstacle_checks: int = 0
    wall_time_ms: float = 0.0
    # start validation and attachment, done once before the search starts
    attach_self_checks: int = 0


@dataclass
class PlanResult:
    planner: str
    status: str
    path: list[np.ndarray] = field(default_factory=list)
    segments: list[np.ndarray] = field(default_factory=list)
    stats: PlanStats = field(default_factory=PlanStats)

    @property
    def solved(self) -> bool:
        return self.status == SOLVED

    def to_json(self) -> dict:
        return {
            "planner": self.planner,
            "status": self.status,
            "path": [np.asarray(c).tolist() for c in self.path],
            "segments": [np.asarray(s).tolist() for s in self.segments],
            "stats": asdict(self.stats),
        }


def goal_test(c, t: TargetRegion) -> bool:
    c = as_config(c)
    cx, cy = t.center
    ok = math.hypot(c[0, 0] - cx, c[0, 1] - cy) <= t.radius
    if t.kind == "both_endpoints_disc":
        ok = ok and math.hypot(c[-1, 0] - cx, c[-1, 1] - cy) <= t.radius
    return ok


def random_sample(spec: RobotSpec, workspace, rng: np.random.Generator) -> np.ndarray:
    """Direction target: head uniform in the workspace, link angles uniform; never collision-checked.

    For anchored robots the sample is translated so the pinned joint sits at
    its anchor position.
    """
    head = rng.uniform(workspace.min, workspace.max)
    ang = rng.uniform(0.0, TWO_PI, size=spec.m - 1)
    c = positions_from_angles(spec.lengths, ang) + head
    if spec.is_anchored:
        a = spec.variant.anchor_index - 1
        c = c - c[a] + np.asarray(spec.variant.anchor_position)
    return c


def _goal_sample(spec, scene, target, rng):
    """Random configuration with its head on the target centre.

    Anchored robots cannot translate, so the end point coordinates are
    overwritten instead; the result is only ever used as a direction.
    """
    c = random_sample(spec, scene.workspace, rng)
    if not spec.is_anchored:
        return c - c[0] + np.asarray(target.center)
    c[0] = target.center
    if target.kind == "both_endpoints_disc":
        c[-1] = target.center
    return c


def _sample(spec, scene, target, rng, goal_bias):
    if goal_bias > 0 and rng.random() < goal_bias:
        return _goal_sample(spec, scene, target, rng)
    return random_sample(spec, scene.workspace, rng)


class _Tree:
    """Growable array of R^{2m} embeddings with brute-force nearest neighbour."""

    def __init__(self, dim: int):
        self.emb = np.empty((1024, dim))
        self.n = 0
        self.parent: list[int] = []

    def add(self, e: np.ndarray, parent: int) -> int:
        if self.n == len(self.emb):
            self.emb = np.concatenate([self.emb, np.empty_like(self.emb)])
        self.emb[self.n] = e
        self.parent.append(parent)
        self.n += 1
        return self.n - 1

    def nearest(self, q: np.ndarray) -> int:
        d = self.emb[: self.n] - q
        return int(np.argmin(np.einsum("ij,ij->i", d, d)))

    def lineage(self, i: int) -> list[int]:
        out = []
        while i >= 0:
            out.append(i)
            i = self.parent[i]
        return out[::-1]


def _validate_query(spec: RobotSpec, q: Query, counter: CheckCounter) -> np.ndarray:
    s = as_config(q.start)
    try:
        check_lengths(spec, s)
    except ValueError as exc:
        raise InvalidQueryError(f"invalid start: {exc}") from exc
    if spec.is_anchored:
        pin = np.asarray(spec.variant.anchor_position)
        if np.linalg.norm(s[spec.variant.anchor_index - 1] - pin) > 1e-9:
            raise InvalidQueryError("start does not respect the anchored joint")
    before = SELF_CHECKS.value
    bad_self = self_collides(spec, s)
    counter.add(SELF_CHECKS.value - before)
    if bad_self:
        raise InvalidQueryError("start configuration is in self collision")
    if obstacle_collides_many(spec, s[None], q.scene)[0]:
        raise InvalidQueryError("start configuration collides with an obstacle or leaves the workspace")
    return s


def direction_scores(e_near: np.ndarray, q_rnd: np.ndarray, embs: np.ndarray) -> np.ndarray:
    """Cosine between each neighbour direction and the sample direction; -inf for null moves."""
    dirs = embs - e_near
    target = q_rnd - e_near
    tn = float(np.linalg.norm(target))
    nn = np.linalg.norm(dirs, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = (dirs @ target) / (nn * tn)
    return np.where(nn > 0, cos, -np.inf)


def _pick(scores: np.ndarray, keys: np.ndarray) -> int:
    best = scores.max()
    tied = np.nonzero(scores == best)[0]
    if len(tied) == 1:
        return int(tied[0])
    k = keys[tied]
    return int(tied[np.lexsort(k.T[::-1])[0]])


def direction_oracle(bundle: RoadmapBundle, q_near: TileVertex, q_rnd, nbrs, att=None):
    """Neighbour whose outgoing direction best matches ``q_rnd``; ``None`` if there is none."""
    if not nbrs:
        return None
    from .tiling import canonical_key

    e_near = realize(bundle, q_near, att).ravel()
    embs = np.array([realize(bundle, u, att).ravel() for u, _ in nbrs])
    keys = np.array([canonical_key(u) for u, _ in nbrs], dtype=np.int64)
    scores = direction_scores(e_near, np.asarray(q_rnd, dtype=float).ravel(), embs)
    if not np.isfinite(scores).any():
        return None
    return nbrs[_pick(scores, keys)]


def drrt_plan(bundle: RoadmapBundle, q: Query, params: DrrtParams | None = None) -> PlanResult:
    """dRRT over the implicit tiling roadmap, checking obstacles only."""
    params = params or DrrtParams()
    t0 = time.perf_counter()
    if not bundle.spec.same_robot(q.robot):
        raise RobotMismatchError("bundle robot differs from query robot")
    spec = q.robot
    stats = PlanStats()
    attach = CheckCounter()
    obs_before = OBSTACLE_CHECKS.value
    s = _validate_query(spec, q, attach)
    result = PlanResult("trdrrt", TIMEOUT, stats=stats)

    def finish(status):
        result.status = status
        stats.obstacle_checks = OBSTACLE_CHECKS.value - obs_before
        stats.attach_self_checks = attach.value
        stats.wall_time_ms = (time.perf_counter() - t0) * 1000.0
        return result

    if goal_test(s, q.target):
        result.path = [s]
        stats.tree_size = 1
        return finish(SOLVED)
    before = SELF_CHECKS.value
    try:
        att = connect_start(att_bundle_with(bundle, spec), s, params.k_start)
    except StartIsolatedError:
        attach.add(SELF_CHECKS.value - before)
        return finish(START_ISOLATED)
    attach.add(SELF_CHECKS.value - before)
    search_before = SELF_CHECKS.value

    anchors = (spec.variant.anchor_index,) if spec.is_anchored else None
    base = bundle.base_set.configs
    root = start_vertex(att)
    tree = _Tree(2 * spec.m)
    verts: list[TileVertex] = [root]
    edges: list[TileEdge | None] = [None]
    keyset = {(START, 0, 0)}
    tree.add(s.ravel(), -1)
    expansions: dict[int, object] = {}
    rejected: set[tuple[int, tuple]] = set()
    rng = np.random.default_rng(params.seed)
    budget = params.time_budget_ms / 1000.0

    def retrieve(i):
        chain = tree.lineage(i)
        result.path = [realize(bundle, verts[c], att) for c in chain]
        result.segments = []
        for c in chain[1:]:
            e = edges[c]
            p = edge_path(bundle, e, att)
            result.segments.append(p.samples + np.asarray(e.edge_translation))

    for it in range(params.max_iters):
        if time.perf_counter() - t0 > budget:
            break
        stats.iterations = it + 1
        q_rnd = _sample(spec, q.scene, q.target, rng, params.goal_bias).ravel()
        ni = tree.nearest(q_rnd)
        ex = expansions.get(ni)
        if ex is None:
            ex = expand(bundle, verts[ni], att, anchors)
            embs = (base[ex.ids] + ex.trans[:, None, :]).reshape(len(ex.ids), -1)
            expansions[ni] = ex = (ex, embs)
        ex, embs = ex
        if len(ex.ids) == 0:
            continue
        scores = direction_scores(tree.emb[ni], q_rnd, embs)
        if not np.isfinite(scores).any():
            continue
        c = _pick(scores, ex.keys)
        key = tuple(int(x) for x in ex.keys[c])
        if key in keyset or (ni, key) in rejected:
            continue
        u = TileVertex(int(ex.ids[c]), (float(ex.trans[c, 0]), float(ex.trans[c, 1])))
        e = TileEdge(
            int(ex.anchor[c]), int(ex.edge[c]), (float(ex.ptrans[c, 0]), float(ex.ptrans[c, 1])), verts[ni], u, ex.from_start
        )
        cfg = base[u.cfg_id] + np.asarray(u.translation)
        ok = path_obstacle_free(edge_path(bundle, e, att), e.edge_translation, q.scene)
        ok = ok and not obstacle_collides_many(spec, cfg[None], q.scene)[0]
        if not ok:
            rejected.add((ni, key))
            continue
        idx = tree.add(embs[c], ni)
        verts.append(u)
        edges.append(e)
        keyset.add(key)
        if goal_test(cfg, q.target):
            retrieve(idx)
            stats.tree_size = tree.n
            stats.self_collision_checks = SELF_CHECKS.value - search_before
            return finish(SOLVED)
    stats.tree_size = tree.n
    stats.self_collision_checks = SELF_CHECKS.value - search_before
    return finish(TIMEOUT)


def att_bundle_with(bundle: RoadmapBundle, spec: RobotSpec) -> RoadmapBundle:
    """Bundle view carrying the query's robot variant (controls which anchors get attachments)."""
    if bundle.spec == spec:
        return bundle
    return RoadmapBundle(spec, bundle.base_set, bundle.roadmaps, bundle.k, bundle.step, bundle.format_version)


def _steer(spec: RobotSpec, near: np.ndarray, q_rnd: np.ndarray, step_rad: float):
    if spec.is_anchored:
        j = spec.variant.anchor_index - 1
    else:
        j = int(np.argmin(np.linalg.norm(near - q_rnd, axis=1)))
    ta = link_angles(near)
    d = wrap_pi(link_angles(q_rnd) - ta)
    dmax = float(np.abs(d).max())
    if dmax == 0.0:
        return None
    d = d * min(1.0, step_rad / dmax)
    return j, ta, d


def _motion(spec, near, j, ta, d, t):
    P = positions_from_angles(spec.lengths, ta[None, :] + t[:, None] * d[None, :])
    return P - P[:, j : j + 1] + near[j]


def rrt_plan(q: Query, params: RrtParams | None = None) -> PlanResult:
    """Classical RRT with anchored angle steering and dense self + obstacle checks."""
    params = params or RrtParams()
    t0 = time.perf_counter()
    spec = q.robot
    stats = PlanStats()
    attach = CheckCounter()
    obs_before = OBSTACLE_CHECKS.value
    s = _validate_query(spec, q, attach)
    self_count = CheckCounter()
    result = PlanResult("rrt", TIMEOUT, stats=stats)
    tree = _Tree(2 * spec.m)
    cfgs = [s]
    segs: list[np.ndarray | None] = [None]
    tree.add(s.ravel(), -1)
    rng = np.random.default_rng(params.seed)
    budget = params.time_budget_ms / 1000.0

    def finish(status, goal=None):
        if goal is not None:
            chain = tree.lineage(goal)
            result.path = [cfgs[c] for c in chain]
            result.segments = [segs[c] for c in chain[1:]]
        result.status = status
        stats.tree_size = tree.n
        stats.self_collision_checks = self_count.value + attach.value
        stats.attach_self_checks = attach.value
        stats.obstacle_checks = OBSTACLE_CHECKS.value - obs_before
        stats.wall_time_ms = (time.perf_counter() - t0) * 1000.0
        return result

    if goal_test(s, q.target):
        return finish(SOLVED, 0)
    for it in range(params.max_iters):
        if time.perf_counter() - t0 > budget:
            break
        stats.iterations = it + 1
        q_rnd = _sample(spec, q.scene, q.target, rng, params.goal_bias)
        ni = tree.nearest(q_rnd.ravel())
        near = cfgs[ni]
        st = _steer(spec, near, q_rnd, params.step_rad)
        if st is None:
            continue
        j, ta, d = st
        # adjacent links folding through each other can slip between dense samples
        self_count.add()
        if fold_crossed(ta, d):
            continue
        S = max(1, math.ceil(float(np.abs(d).max()) / params.check_step - 1e-12))
        t = np.arange(S + 1) / S
        motion = _motion(spec, near, j, ta, d, t)
        motion[0] = near
        check = motion[1:]
        if self_collides_many(spec, check, self_count).any():
            continue
        if obstacle_collides_many(spec, check, q.scene).any():
            continue
        new = motion[-1]
        idx = tree.add(new.ravel(), ni)
        cfgs.append(new)
        segs.append(motion)
        if goal_test(new, q.target):
            return finish(SOLVED, idx)
    return finish(TIMEOUT)
