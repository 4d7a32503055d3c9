from __future__ import annotations

import math

import numpy as np
import pytest

from tilingplan.errors import DomainError, NotALatticePointError
from tilingplan.lattice import (
    Lattice,
    coverage_csv,
    designed_bundle,
    fixed_interval_bundle,
    head_bfs,
    kappa_bound,
    lattice_points,
    line_point,
    s1_walk,
    snap_set,
    spacing,
    verify_bounds_suite,
    verify_head_coverage,
    zigzag_path,
)
from tilingplan.tiling import TileVertex


def test_line_point_examples():
    assert line_point(0, 6, 1.0) == (0.0, 0.0)
    assert np.allclose(line_point(1, 6, 1.0), (-0.1339746, 0.5), atol=1e-7)
    d = np.subtract(line_point(1, 12, 1.0), line_point(0, 12, 1.0))
    assert math.isclose(float(np.hypot(*d)), 0.2610524, abs_tol=1e-7)


def test_line_points_walk_a_fixed_vector():
    for n in (6, 12, 24):
        pts = np.array([line_point(i, n, 1.5) for i in range(30)])
        steps = np.diff(pts, axis=0)
        assert np.abs(steps - steps[0]).max() < 1e-12
        assert abs(np.hypot(*steps[0]) - spacing(n, 1.5)) < 1e-12


def test_spacing():
    assert math.isclose(spacing(2, 1.0), 1.4142136, abs_tol=1e-7)
    assert math.isclose(spacing(100, 1.0), 0.0314146, abs_tol=1e-7)
    assert all(spacing(2 * n, 1.0) < spacing(n, 1.0) for n in range(2, 513))
    with pytest.raises(ValueError):
        spacing(1, 1.0)


def test_lattice_points_right_angle():
    lat = Lattice(math.pi / 2, 1.0)
    assert np.isclose(lat.dx, 1.0) and np.isclose(lat.dy, 1.0)
    got = {(round(x), round(y)) for x, y in lattice_points(lat, 1.5)}
    assert got == {(0, 0), (1, 1), (1, -1), (-1, 1), (-1, -1)}


def test_lattice_points_properties():
    rng = np.random.default_rng(0)
    for a in rng.uniform(0.1, 3.0, 10):
        lat = Lattice(float(a), 1.3)
        pts = lattice_points(lat, 4.0)
        S = snap_set(pts)
        assert (0, 0) in S
        assert snap_set([(-x, -y) for x, y in pts]) == S
        # the generators have length equal to the neighbour spacing
        assert math.isclose(math.hypot(lat.dx, lat.dy), 2 * 1.3 * math.sin(a / 2), rel_tol=1e-12)
    with pytest.raises(DomainError):
        Lattice(0.0, 1.0)
    with pytest.raises(DomainError):
        Lattice(math.pi, 1.0)


def test_zigzag_examples():
    lat = Lattice(math.pi / 2, 1.0)
    assert zigzag_path(lat, (0, 0), (0, 0)) == [(0.0, 0.0)]
    assert np.allclose(zigzag_path(lat, (0, 0), (2, 0)), [(0, 0), (1, 1), (2, 0)])
    with pytest.raises(NotALatticePointError):
        zigzag_path(lat, (0, 0), (0.5, 0))


def test_zigzag_paths_are_lattice_walks_within_kappa():
    rng = np.random.default_rng(1)
    for _ in range(100):
        lat = Lattice(float(rng.uniform(0.05, math.pi / 2)), float(rng.uniform(0.5, 2.0)))
        pts = lattice_points(lat, 6 * lat.L)
        p, q = (pts[i] for i in rng.integers(len(pts), size=2))
        path = zigzag_path(lat, p, q)
        step = np.diff(np.array(path), axis=0)
        assert np.allclose(np.abs(step), [lat.dx, lat.dy], atol=1e-9) if len(step) else True
        m = int(rng.integers(2, 8))
        dist = m * math.dist(p, q)
        assert len(path) - 1 <= kappa_bound(lat, dist, m) + 1e-9


def test_kappa_bound():
    lat = Lattice(math.pi / 2, 1.0)
    assert kappa_bound(lat, 0.0, 3) == 0.0
    assert math.isclose(kappa_bound(lat, 2.0, 2), 2.0)
    vals = [kappa_bound(Lattice(a, 1.0), 5.0, 3) for a in np.linspace(0.01, math.pi / 2, 200)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    with pytest.raises(DomainError):
        kappa_bound(Lattice(2.0, 1.0), 1.0, 3)


def _sum_set_oracle(depth):
    """Abstract BFS over (head, angle index) for the 12-position single link.

    A head-anchored move changes only the angle; a tail-anchored move keeps
    the tail fixed, so the head moves by u_a - u_b.
    """
    u = [np.array([math.cos(i * math.pi / 6), math.sin(i * math.pi / 6)]) for i in range(12)]
    start = ((0, 0), 0)
    seen = {start}
    heads = {(0, 0)}
    frontier = [((0.0, 0.0), 0)]
    out = [set(heads)]
    for _ in range(depth):
        nxt = []
        for h, a in frontier:
            for b in range(12):
                if b == a:
                    continue
                for nh in (np.array(h), np.array(h) + u[a] - u[b]):
                    key = (tuple(int(round(x / 1e-9)) for x in nh), b)
                    if key not in seen:
                        seen.add(key)
                        nxt.append((tuple(nh), b))
                        heads.add(key[0])
        frontier = nxt
        out.append(set(heads))
    return out


def test_toy_head_sets_match_oracle():
    levels = head_bfs(fixed_interval_bundle(12), TileVertex(0, (0.0, 0.0)), 3)
    oracle = _sum_set_oracle(3)
    assert [len(snap_set(h)) for h in levels] == [1, 12, 73, 253]
    for got, want in zip(levels, oracle):
        assert snap_set(got) == want


def test_s1_walk_lands_on_line_points():
    for n in (6, 12):
        heads = s1_walk(designed_bundle(math.pi / n), 20)
        for i, h in enumerate(heads):
            assert np.allclose(h, line_point(i, n, 1.0), atol=1e-9)


def test_designed_bundle_connects_all_three():
    for n in (3, 6, 12, 48):
        b = designed_bundle(math.pi / n)
        assert [rm.n_edges for rm in b.roadmaps] == [3, 3]


def test_coverage_reports():
    alpha = math.pi / 12
    b = designed_bundle(alpha)
    r0 = verify_head_coverage(b, alpha, 0, 1.0)
    assert r0.explored_vertices == 1 and math.isclose(r0.max_gap, 1.0)
    gaps = [verify_head_coverage(b, alpha, r, 1.0).max_gap for r in (0, 4, 8, 16)]
    assert all(b2 <= a2 for a2, b2 in zip(gaps, gaps[1:]))
    text = coverage_csv([r0])
    assert text.splitlines()[0] == "n,alpha,rounds,explored,max_gap"


def test_bounds_suite_passes():
    rep = verify_bounds_suite(trials=2000, seed=3, lattice_pairs=50)
    assert rep.passed, rep.text()
