"""Plan the four analog scenes with TR-dRRT and RRT and compare the work done.

Builds one bundle per link count (about half a minute each on one core),
runs both planners on each scene, re-checks the paths with the dense
validator and writes an SVG of every TR-dRRT solution to demos/out/.

    python3 demos/plan_scenarios.py [n] [seed]
"""
from __future__ import annotations

import sys
import time
from pathlib import Path

from tilingplan.planners import DrrtParams, RrtParams, drrt_plan, rrt_plan
from tilingplan.roadmap import build_bundle
from tilingplan.robot import RobotSpec
from tilingplan.scenarios import KINDS, generate_scenario, render_svg
from tilingplan.validation import validate_result

n = int(sys.argv[1]) if len(sys.argv) > 1 else 300
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
out = Path(__file__).resolve().parent / "out"
out.mkdir(exist_ok=True)

bundles = {}
for kind in KINDS:
    sc = generate_scenario(kind)
    links = sc.robot.link_lengths
    if links not in bundles:
        t0 = time.perf_counter()
        bundles[links] = build_bundle(RobotSpec(links), n, seed=0)
        print(f"bundle for {len(links)} links, n={n}: {time.perf_counter() - t0:.1f} s")
    q = sc.query()
    ours = drrt_plan(bundles[links], q, DrrtParams(seed=seed, time_budget_ms=60_000))
    theirs = rrt_plan(q, RrtParams(seed=seed, time_budget_ms=60_000))
    for r in (ours, theirs):
        st = r.stats
        valid = validate_result(r, q).ok if r.solved else "-"
        print(
            f"  {kind:11s} {r.planner:6s} {r.status:14s} {st.wall_time_ms:8.0f} ms "
            f"self checks {st.self_collision_checks:7d} obstacle checks {st.obstacle_checks:7d} valid {valid}"
        )
    if ours.solved:
        (out / f"{kind}.svg").write_text(render_svg(sc, ours, frames=12))
print(f"SVGs in {out}")
