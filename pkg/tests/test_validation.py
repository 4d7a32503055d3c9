from __future__ import annotations

import math

import numpy as np

from tilingplan.robot import AngleForm, RobotSpec, from_angles
from tilingplan.validation import config_problem, validate_path

WS = ((-10.0, -10.0), (10.0, 10.0))
U3 = RobotSpec((1.0, 1.0, 1.0))


def cfg(angles, head=(0.0, 0.0)):
    return from_angles(U3, AngleForm(head, tuple(angles)))


def rotation(a, b, n=5):
    """Samples of a head-anchored rotation between two angle vectors."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    return np.array([cfg(a + (b - a) * t) for t in np.linspace(0, 1, n)])


def test_config_problems():
    assert config_problem(cfg([0, 0.5, 1.0]), [1, 1, 1], [], WS) is None
    assert "length" in config_problem(cfg([0, 0.5, 1.0]), [1, 1, 2], [], WS)
    assert config_problem(cfg([0, math.pi, 0]), [1, 1, 1], [], WS) is not None
    assert config_problem(cfg([0, 2.5, 5.0]), [1, 1, 1], [], WS) is not None
    box = [[0.4, -0.2], [0.6, -0.2], [0.6, 0.2], [0.4, 0.2]]
    assert config_problem(cfg([0, 0, 0]), [1, 1, 1], [box], WS) is not None
    assert config_problem(cfg([0, 0, 0], (9.5, 0)), [1, 1, 1], [], WS) is not None


def test_valid_rotation_passes():
    seg = rotation([0, 0.3, 0.6], [0.5, 0.8, 1.1])
    rep = validate_path([seg], [1, 1, 1], [], WS, start=seg[0])
    assert rep.ok and rep.checked > 10


def test_sweep_through_obstacle_between_samples_is_caught():
    # the two samples avoid the box, the motion between them does not
    seg = np.array([cfg([0.0, 0.0, 0.0]), cfg([1.2, 1.2, 1.2])])
    box = [[1.5, 1.2], [1.9, 1.2], [1.9, 1.6], [1.5, 1.6]]
    for c in seg:
        assert config_problem(c, [1, 1, 1], [box], WS) is None
    assert not validate_path([seg], [1, 1, 1], [box], WS).ok


def test_fold_through_between_samples_is_caught():
    seg = np.array([cfg([0.0, 0.9 * math.pi, 0.0]), cfg([0.0, -0.9 * math.pi, 0.0])])
    assert not validate_path([seg], [1, 1, 1], [], WS).ok


def test_non_anchored_jump_is_rejected():
    seg = np.array([cfg([0.0, 0.0, 0.0]), cfg([0.5, 0.5, 0.5], (1.0, 1.0))])
    rep = validate_path([seg], [1, 1, 1], [], WS)
    assert not rep.ok and "fixed" in rep.problems[0]


def test_discontinuous_segments_rejected():
    a = rotation([0, 0, 0], [0.2, 0.2, 0.2])
    b = rotation([1.0, 1.0, 1.0], [1.2, 1.2, 1.2])
    assert not validate_path([a, b], [1, 1, 1], [], WS, start=a[0]).ok
