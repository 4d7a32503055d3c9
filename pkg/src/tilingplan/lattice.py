"""Coverage construction and completeness-analysis checks, run against the real tiling graph.

The closed forms (line points, spacing, the (L, alpha)-lattice and its
zigzag paths) are evaluated directly; the coverage checks drive breadth-first
search through :func:`tilingplan.tiling.expand` so they double as
integration tests of the neighbour machinery.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError, NotALatticePointError, PreconditionError
from .geometry2d import Aabb
from .roadmap import BaseConfigSet, RoadmapBundle, build_bundle_from_configs
from .robot import RobotSpec, anchor_sum_distance, positions_from_angles, rotate_about_anchor
from .tiling import TileVertex, canonical_key, expand, neighbors

SNAP = 1e-9


def line_point(i: int, n: int, L: float) -> tuple[float, float]:
    """Head position after ``i`` rotate-then-restore steps at angle pi/n."""
    if i < 0 or n < 2:
        raise ValueError("need i >= 0 and n >= 2")
    a = math.pi / n
    return (i * L * (math.cos(a) - 1.0), i * L * math.sin(a))


def spacing(n: int, L: float) -> float:
    """Distance between consecutive line points, ``2 L sin(pi / 2n)``."""
    if n < 2:
        raise ValueError("spacing needs n >= 2")
    return 2.0 * L * math.sin(math.pi / (2 * n))


@dataclass(frozen=True)
class Lattice:
    """Planar lattice generated by ``(dx, dy)`` and ``(dx, -dy)``."""

    alpha: float
    L: float

    def __post_init__(self):
        if not 0.0 < self.alpha < math.pi:
            raise DomainError("alpha must lie in (0, pi)")
        if not self.L > 0:
            raise DomainError("L must be positive")

    @property
    def dx(self) -> float:
        return self.L * (1.0 - math.cos(self.alpha))

    @property
    def dy(self) -> float:
        return self.L * math.sin(self.alpha)

    @property
    def spacing(self) -> float:
        return 2.0 * self.L * math.sin(self.alpha / 2.0)

    def point(self, a: int, b: int) -> tuple[float, float]:
        return ((a + b) * self.dx, (a - b) * self.dy)

    def coords(self, p) -> tuple[int, int]:
        """Integer ``(x steps, y steps)``; raises if ``p`` is not a lattice point."""
        u = p[0] / self.dx
        w = p[1] / self.dy
        ui, wi = round(u), round(w)
        if abs(u - ui) * self.dx > SNAP or abs(w - wi) * self.dy > SNAP or (ui - wi) % 2:
            raise NotALatticePointError(f"{tuple(p)} is not on the lattice")
        return int(ui), int(wi)


def lattice_points(lat: Lattice, radius: float) -> list[tuple[float, float]]:
    if not radius > 0:
        raise ValueError("radius must be positive")
    umax = int(math.floor(radius / lat.dx + SNAP))
    wmax = int(math.floor(radius / lat.dy + SNAP))
    out = []
    for u in range(-umax, umax + 1):
        for w in range(-wmax, wmax + 1):
            if (u - w) % 2:
                continue
            x, y = u * lat.dx, w * lat.dy
            if math.hypot(x, y) <= radius + SNAP:
                out.append((x, y))
    return out


def zigzag_path(lat: Lattice, p, q) -> list[tuple[float, float]]:
    """Lattice-edge path: horizontal zigzag until x matches, then vertical zigzag.

    Horizontal moves steer toward the target's y when it differs and
    otherwise alternate, positive y first.
    """
    u0, w0 = lat.coords(p)
    u1, w1 = lat.coords(q)
    U, W = u1 - u0, w1 - w0
    u, w = u0, w0
    pts = [(u, w)]
    while U != 0:
        sx = 1 if U > 0 else -1
        sy = 1 if W >= 0 else -1
        u, w, U, W = u + sx, w + sy, U - sx, W - sy
        pts.append((u, w))
    sx = 1
    while W != 0:
        sy = 1 if W > 0 else -1
        u, w, W = u + sx, w + sy, W - sy
        sx = -sx
        pts.append((u, w))
    return [(a * lat.dx, b * lat.dy) for a, b in pts]


def kappa_bound(lat: Lattice, dist: float, m: int) -> float:
    """Upper bound on lattice moves between points whose translated configurations are ``dist`` apart."""
    a = lat.alpha
    if not 0.0 < a <= math.pi / 2 + 1e-15:
        raise DomainError("kappa bound needs alpha in (0, pi/2]")
    if dist < 0:
        raise ValueError("dist must be non-negative")
    s, c = math.sin(a), math.cos(a)
    return dist / (m * lat.L) * ((1.0 + s - c) / (s - s * c))


# -- the tiling graph side --------------------------------------------------


def designed_configs(alpha: float, L: float = 1.0, theta: float = 0.0) -> np.ndarray:
    """Single-link ``C``, ``C^alpha`` and ``C^-alpha`` with the head at the origin."""
    c = positions_from_angles(np.array([L]), np.array([theta]))
    return np.array([c, rotate_about_anchor(c, 1, alpha), rotate_about_anchor(c, 1, -alpha)])


def designed_bundle(alpha: float, L: float = 1.0, theta: float = 0.0) -> RoadmapBundle:
    spec = RobotSpec((L,))
    bundle = build_bundle_from_configs(spec, BaseConfigSet(designed_configs(alpha, L, theta), 0), k=2)
    for rm in bundle.roadmaps[:2]:
        if rm.n_edges != 3:
            raise PreconditionError(f"designed configurations are not connected in roadmap {rm.anchor_index}")
    return bundle


def fixed_interval_bundle(n: int, L: float = 1.0) -> RoadmapBundle:
    """Single link with ``n`` base configurations at angles ``2 pi i / n``, fully connected."""
    ang = np.arange(n) * (2.0 * math.pi / n)
    cfgs = positions_from_angles(np.array([L]), ang[:, None])
    return build_bundle_from_configs(RobotSpec((L,)), BaseConfigSet(cfgs, 0), k=n - 1)


def head_bfs(bundle: RoadmapBundle, root: TileVertex, depth: int, anchors=None) -> list[np.ndarray]:
    """Cumulative head positions reached within 0..depth tiling-graph edges of ``root``."""
    seen = {canonical_key(root)}
    frontier = [root]
    heads = [np.asarray(root.translation, dtype=float)]
    out = [np.array(heads)]
    base = bundle.base_set.configs
    for _ in range(depth):
        nxt = []
        for v in frontier:
            ex = expand(bundle, v, None, anchors)
            for i in range(len(ex.ids)):
                key = tuple(int(x) for x in ex.keys[i])
                if key in seen:
                    continue
                seen.add(key)
                u = TileVertex(int(ex.ids[i]), (float(ex.trans[i, 0]), float(ex.trans[i, 1])))
                nxt.append(u)
                heads.append(base[u.cfg_id, 0] + ex.trans[i])
        frontier = nxt
        out.append(np.array(heads))
    return out


def snap_set(points, tol: float = SNAP) -> set[tuple[int, int]]:
    return {(int(round(x / tol)), int(round(y / tol))) for x, y in np.asarray(points).reshape(-1, 2)}


def s1_walk(bundle: RoadmapBundle, steps: int) -> list[np.ndarray]:
    """Alternate a head-anchored move to ``C^alpha`` and a tail-anchored move back to ``C``.

    Returns the head position after each full step (two graph edges); the
    bundle must come from :func:`designed_bundle`.
    """
    v = TileVertex(0, (0.0, 0.0))
    heads = [np.zeros(2)]
    for _ in range(steps):
        for anchor, target in ((1, 1), (2, 0)):
            hop = [u for u, e in neighbors(bundle, v, None, (anchor,)) if u.cfg_id == target]
            if not hop:
                raise PreconditionError(f"no edge to configuration {target} via anchor {anchor}")
            v = hop[0]
        heads.append(bundle.base_set.configs[v.cfg_id, 0] + np.asarray(v.translation))
    return heads


@dataclass
class CoverageReport:
    n: int
    alpha: float
    rounds: int
    explored_vertices: int
    max_gap: float
    probe_region: Aabb

    def row(self) -> dict:
        return {"n": self.n, "alpha": self.alpha, "rounds": self.rounds, "explored": self.explored_vertices, "max_gap": self.max_gap}


def probe_points(radius: float, resolution: float) -> np.ndarray:
    """Grid points inside the disc plus points on its boundary circle."""
    k = int(math.floor(radius / resolution))
    g = np.arange(-k, k + 1) * resolution
    X, Y = np.meshgrid(g, g)
    grid = np.column_stack([X.ravel(), Y.ravel()])
    grid = grid[np.hypot(grid[:, 0], grid[:, 1]) <= radius]
    nc = max(8, int(math.ceil(2 * math.pi * radius / resolution)))
    t = np.arange(nc) * (2 * math.pi / nc)
    return np.concatenate([grid, radius * np.column_stack([np.cos(t), np.sin(t)])])


def verify_head_coverage(
    bundle: RoadmapBundle, alpha: float, rounds: int, probe_radius: float, anchors=(1, 2)
) -> CoverageReport:
    """Breadth-first expansion from base configuration 0 at the origin; largest probe-to-head gap."""
    if rounds < 0 or not probe_radius > 0:
        raise ValueError("need rounds >= 0 and probe_radius > 0")
    levels = head_bfs(bundle, TileVertex(0, (0.0, 0.0)), rounds, anchors)
    heads = levels[-1]
    res = Lattice(alpha, bundle.spec.max_length).spacing / 4.0
    probes = probe_points(probe_radius, res)
    gap, _ = cKDTree(heads).query(probes)
    region = Aabb((-probe_radius, -probe_radius), (probe_radius, probe_radius))
    return CoverageReport(bundle.n, alpha, rounds, len(heads), float(gap.max()), region)


def coverage_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["n", "alpha", "rounds", "explored", "max_gap"], lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


# -- randomized inequality checks ------------------------------------------


@dataclass
class CheckResult:
    name: str
    trials: int = 0
    violations: int = 0
    counterexamples: list = field(default_factory=list)


@dataclass
class BoundsReport:
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.violations == 0 for c in self.checks)

    def text(self) -> str:
        lines = []
        for c in self.checks:
            tag = "PASS" if c.violations == 0 else "FAIL"
            lines.append(f"{tag} {c.name}: {c.trials} trials, {c.violations} violations")
            for ex in c.counterexamples[:3]:
                lines.append(f"  counterexample: {ex}")
        bad = sum(c.violations > 0 for c in self.checks)
        lines.append("all bounds hold" if bad == 0 else f"{bad} bound check(s) failed")
        return "\n".join(lines)


def _slow_distance(a, b) -> float:
    return sum(math.hypot(p[0] - q[0], p[1] - q[1]) for p, q in zip(a.tolist(), b.tolist()))


def _record(res: CheckResult, failed: bool, recheck, example) -> None:
    res.trials += 1
    # a counterexample only counts once an independent recomputation agrees
    if failed and recheck():
        res.violations += 1
        if len(res.counterexamples) < 5:
            res.counterexamples.append(example)


def _random_config(spec: RobotSpec, rng, box: float = 5.0) -> np.ndarray:
    return positions_from_angles(spec.lengths, rng.uniform(0, 2 * math.pi, spec.m - 1)) + rng.uniform(-box, box, 2)


def verify_bounds_suite(spec: RobotSpec | None = None, trials: int = 10_000, seed: int = 0, lattice_pairs: int = 100) -> BoundsReport:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    spec = spec or RobotSpec((1.0, 1.0, 1.0))
    rng = np.random.default_rng(seed)
    m, Lmax = spec.m, spec.max_length
    d = anchor_sum_distance

    metric = CheckResult("anchor-sum metric axioms")
    for _ in range(trials):
        a, b, c = (_random_config(spec, rng) for _ in range(3))
        dab, dba, dbc, dac = d(a, b), d(b, a), d(b, c), d(a, c)
        bad = d(a, a) != 0.0 or dab != dba or dab <= 0.0 or dac > dab + dbc + 1e-12
        _record(metric, bad, lambda: _slow_distance(a, c) > _slow_distance(a, b) + _slow_distance(b, c) + 1e-12 or _slow_distance(a, b) <= 0 or _slow_distance(a, a) != 0, (a, b, c))

    rot = CheckResult("rotation bound d(C, C^a) < m^2 L a / 2")
    for _ in range(trials):
        c = _random_config(spec, rng)
        a = float(rng.uniform(1e-6, math.pi))
        ca = rotate_about_anchor(c, 1, a)
        bound = m * m * Lmax * a / 2.0
        _record(rot, not d(c, ca) < bound, lambda: not _slow_distance(c, ca) < bound, (c, a))

    pert = CheckResult("perturbation bound d(C, C') <= L (m-1)^3 dtheta")
    for _ in range(trials):
        th = rng.uniform(0, 2 * math.pi, m - 1)
        dt = float(rng.uniform(0.0, 0.5))
        th2 = th + rng.uniform(-dt, dt, m - 1)
        head = rng.uniform(-5, 5, 2)
        c1 = positions_from_angles(spec.lengths, th) + head
        c2 = positions_from_angles(spec.lengths, th2) + head
        bound = Lmax * (m - 1) ** 3 * dt
        _record(pert, d(c1, c2) > bound + 1e-12, lambda: _slow_distance(c1, c2) > bound + 1e-12, (c1, c2, dt))

    trans = CheckResult("translation d(C, C + p) = m |p|")
    for _ in range(trials):
        c = _random_config(spec, rng)
        p = rng.uniform(-5, 5, 2)
        want = m * math.hypot(p[0], p[1])
        _record(trans, abs(d(c, c + p) - want) > 1e-12, lambda: abs(_slow_distance(c, c + p) - want) > 1e-12, (c, p))

    zig = CheckResult("zigzag moves <= kappa bound")
    for _ in range(lattice_pairs):
        lat = Lattice(float(rng.uniform(0.05, math.pi / 2)), float(rng.uniform(0.5, 2.0)))
        p = lat.point(*(int(x) for x in rng.integers(-20, 21, 2)))
        q = lat.point(*(int(x) for x in rng.integers(-20, 21, 2)))
        path = zigzag_path(lat, p, q)
        dist = m * math.hypot(q[0] - p[0], q[1] - p[1])
        kb = kappa_bound(lat, dist, m)
        _record(zig, len(path) - 1 > kb + 1e-9, lambda: len(zigzag_path(lat, p, q)) - 1 > kb + 1e-9, (lat, p, q))

    return BoundsReport([metric, rot, pert, trans, zig])
