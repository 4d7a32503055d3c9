"""The single-link toy: how translated copies of a tiny roadmap cover the plane.

A unit link has twelve base configurations at 30 degree steps, all connected
in both base roadmaps.  Rotating about the head keeps the head in place;
rotating about the tail moves it.  Breadth-first search over the tiling
graph shows how fast the reached head positions spread, and the designed
three-configuration bundle walks the head along a straight line in steps of
2 sin(pi / 2n).

    python3 demos/tiling_toy.py
"""
from __future__ import annotations

import math

import numpy as np

from tilingplan.lattice import (
    designed_bundle,
    fixed_interval_bundle,
    head_bfs,
    line_point,
    s1_walk,
    snap_set,
    spacing,
    verify_head_coverage,
)
from tilingplan.tiling import TileVertex, neighbors

bundle = fixed_interval_bundle(12)
root = TileVertex(0, (0.0, 0.0))
print(f"root has {len(neighbors(bundle, root))} tiling-graph neighbours")

levels = head_bfs(bundle, root, 4)
for depth, heads in enumerate(levels):
    print(f"depth {depth}: {len(snap_set(heads)):5d} distinct head positions")

# straight-line walk: rotate by pi/n about the head, then back about the tail
for n in (6, 12, 24):
    heads = s1_walk(designed_bundle(math.pi / n), 10)
    err = max(float(np.abs(h - line_point(i, n, 1.0)).max()) for i, h in enumerate(heads))
    print(f"n={n:2d}: 10 steps of {spacing(n, 1.0):.6f}, end {heads[-1].round(6)}, max error {err:.1e}")

# coverage of the unit disc as the search deepens
alpha = math.pi / 12
b = designed_bundle(alpha)
for rounds in (0, 8, 16, 32):
    r = verify_head_coverage(b, alpha, rounds, probe_radius=1.0)
    print(f"rounds {rounds:2d}: {r.explored_vertices:6d} heads, largest gap {r.max_gap:.3f}")
