"""Freeze one solved path per generated scene into tests/fixtures.

Each fixture stores the scenario document and the dense path segments of a
seeded TR-dRRT run on a 500-configuration bundle.  The test suite re-checks
them with the independent validator, so a fixture is a witness that the
scene is solvable.  Bundles are cached under ``$TILINGPLAN_CACHE`` (default
/tmp/tilingplan-bundles) because building them takes about a minute each.

    python3 demos/make_witness_fixtures.py
"""
from __future__ import annotations

import json
import os
import sys
from pathlib import Path

from tilingplan.bundle_io import load_bundle, save_bundle
from tilingplan.planners import DrrtParams, drrt_plan
from tilingplan.roadmap import build_bundle
from tilingplan.robot import RobotSpec
from tilingplan.scenarios import KINDS, generate_scenario
from tilingplan.validation import validate_result

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
CACHE = Path(os.environ.get("TILINGPLAN_CACHE", "/tmp/tilingplan-bundles"))


def cached_bundle(lengths, n=500, seed=0):
    CACHE.mkdir(parents=True, exist_ok=True)
    path = CACHE / f"b{len(lengths)}_{n}_{seed}.bin"
    if path.exists():
        return load_bundle(path)
    bundle = build_bundle(RobotSpec(tuple(lengths)), n, seed=seed)
    save_bundle(bundle, path)
    return bundle


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    for kind in KINDS:
        sc = generate_scenario(kind)
        bundle = cached_bundle(sc.robot.link_lengths)
        q = sc.query()
        for seed in range(5):
            r = drrt_plan(bundle, q, DrrtParams(seed=seed))
            if r.solved and validate_result(r, q).ok:
                break
        else:
            print(f"{kind}: no validated solution in 5 seeds", file=sys.stderr)
            return 1
        doc = {"scenario": sc.to_json(), "planner": "trdrrt", "seed": seed, "segments": [s.tolist() for s in r.segments]}
        (OUT / f"witness_{kind}.json").write_text(json.dumps(doc) + "\n")
        print(f"{kind}: {len(r.segments)} edges, seed {seed}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
