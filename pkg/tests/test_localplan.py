from __future__ import annotations

import math

import numpy as np
import pytest
import shapely.geometry as sg
from shapely.ops import unary_union

from tilingplan.localplan import (
    chain_matrix,
    local_plan_anchored,
    sweep_polygon,
    wrap_pi,
)
from tilingplan.robot import AngleForm, RobotSpec, from_angles, link_angles, positions_from_angles, self_collides
from tilingplan.roadmap import anchor_config, sample_base_configs

U2 = RobotSpec((1.0, 1.0))


def anchored(spec, angles, j):
    return anchor_config(from_angles(spec, AngleForm((0.0, 0.0), tuple(angles))), j)


def test_identity_plan_has_one_sample():
    a = anchored(U2, [0.3, 1.0], 1)
    p = local_plan_anchored(U2, a, a, 1)
    assert p is not None and p.n_samples == 1
    assert np.all(p.margins == 0)


def test_shorter_arc_through_zero_is_accepted():
    a = anchored(U2, [0.0, math.pi / 2], 1)
    b = anchored(U2, [0.0, -math.pi / 2], 1)
    p = local_plan_anchored(U2, a, b, 1)
    assert p is not None
    rel = wrap_pi(np.diff(link_angles(p.samples), axis=1))
    assert np.all(np.abs(rel) <= math.pi / 2 + 1e-12)


def test_fold_crossing_is_rejected():
    a = anchored(U2, [0.0, 0.9 * math.pi], 1)
    b = anchored(U2, [0.0, -0.9 * math.pi], 1)
    assert local_plan_anchored(U2, a, b, 1) is None


def test_step_bound_and_fixed_anchor():
    spec = RobotSpec((1.0, 0.8, 1.2, 1.0))
    base = sample_base_configs(spec, 30, seed=5)
    done = 0
    for j in range(1, spec.m + 1):
        for i in range(10):
            a = anchor_config(base.configs[i], j)
            b = anchor_config(base.configs[i + 10], j)
            p = local_plan_anchored(spec, a, b, j, step=0.05)
            if p is None:
                continue
            done += 1
            assert np.array_equal(p.samples[:, j - 1], np.zeros((p.n_samples, 2)))
            dth = np.abs(wrap_pi(np.diff(link_angles(p.samples), axis=0)))
            assert dth.max() <= 0.05 + 1e-9
            assert np.array_equal(p.samples[0], a) and np.array_equal(p.samples[-1], b)
            assert not any(self_collides(spec, s) for s in p.samples)
    assert done > 5


def test_single_link_quarter_turn_sweep():
    samples = np.array([[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]]])
    pieces = sweep_polygon(RobotSpec((1.0,)), samples, 0, 1)
    assert len(pieces) == 1
    margin = (math.pi / 2) ** 2 / 8
    assert math.isclose(margin, 0.30842513753404244)
    shape = sg.Polygon(pieces[0].vertices)
    # the quarter-circle arc is inside
    for t in np.linspace(0, math.pi / 2, 50):
        assert shape.covers(sg.Point(math.cos(t), math.sin(t)))
    # and the piece is no bigger than the triangle's disc dilation by the margin (octagon slack)
    tri = sg.Polygon([(0, 0), (1, 0), (0, 1)]).buffer(margin / math.cos(math.pi / 8) + 1e-9, quad_segs=16)
    assert tri.covers(shape)


def test_single_sample_sweep_is_sliver():
    samples = np.array([[[0.0, 0.0], [1.0, 0.0]]])
    (piece,) = sweep_polygon(RobotSpec((1.0,)), samples, 0, 1)
    assert len(piece) == 4
    assert piece.aabb.height <= 2.1e-9


def test_chain_matrix():
    M = chain_matrix(5, 3)  # 4 links, anchor 3 sits between links 1 and 2 (0-based)
    assert M.tolist() == [[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 1, 1]]


@pytest.mark.parametrize("j", [1, 3, 6])
def test_sweep_conservative_on_random_interior_points(j):
    """Every point of every link at random interior times lies in that link's swept pieces."""
    spec = RobotSpec((1.0, 0.6, 1.4, 1.0, 0.9))
    base = sample_base_configs(spec, 40, seed=11)
    rng = np.random.default_rng(j)
    checked = 0
    for i in range(20):
        a = anchor_config(base.configs[i], j)
        b = anchor_config(base.configs[i + 20], j)
        p = local_plan_anchored(spec, a, b, j, step=0.2)
        if p is None:
            continue
        ta = link_angles(a)
        d = wrap_pi(link_angles(b) - ta)
        t = rng.uniform(0, 1, 1000)
        P = positions_from_angles(spec.lengths, ta[None] + t[:, None] * d[None])
        P = P - P[:, j - 1 : j]
        for link, pieces in enumerate(p.swept):
            union = unary_union([sg.Polygon(q.vertices) for q in pieces])
            s = rng.uniform(0, 1, (len(t), 1))
            pts = P[:, link] * (1 - s) + P[:, link + 1] * s
            assert all(union.covers(sg.Point(x)) for x in pts[:200])
        checked += 1
    assert checked >= 3
