"""Command line front end: ``tilingplan {preprocess,plan,bench,lattice,render,generate}``.

Exit codes: 0 solved or ok, 2 timeout, 3 start isolated, 4 bundle/scenario
mismatch, 1 any other error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

from .bundle_io import bundle_checksum, export_json, load_bundle, save_bundle
from .errors import BundleLoadError, RobotMismatchError, ScenarioError, TilingPlanError
from .lattice import (
    Lattice,
    coverage_csv,
    designed_bundle,
    fixed_interval_bundle,
    head_bfs,
    lattice_points,
    line_point,
    snap_set,
    spacing,
    verify_bounds_suite,
    verify_head_coverage,
)
from .planners import START_ISOLATED, TIMEOUT, DrrtParams, RrtParams, drrt_plan, rrt_plan
from .roadmap import build_bundle
from .robot import RobotSpec
from .tiling import TileVertex
from .scenarios import (
    KINDS,
    RunRecord,
    aggregate_stats,
    generate_scenario,
    load_scenario,
    records_csv,
    render_svg,
    save_scenario,
)
from .validation import validate_result

log = logging.getLogger("tilingplan")

EXIT_OK, EXIT_ERROR, EXIT_TIMEOUT, EXIT_ISOLATED, EXIT_MISMATCH = 0, 1, 2, 3, 4
_STATUS_EXIT = {TIMEOUT: EXIT_TIMEOUT, START_ISOLATED: EXIT_ISOLATED}


def _robot_from_args(args) -> RobotSpec:
    if args.links:
        return RobotSpec(tuple(float(x) for x in args.links.split(",")))
    doc = json.loads(Path(args.robot).read_text())
    lengths = doc["robot"]["link_lengths"] if "robot" in doc else doc["link_lengths"]
    return RobotSpec(tuple(float(x) for x in lengths))


def cmd_preprocess(args) -> int:
    spec = _robot_from_args(args)
    t0 = time.perf_counter()
    bundle = build_bundle(spec, args.n, args.k, args.step, args.seed, args.jobs)
    elapsed = time.perf_counter() - t0
    digest = save_bundle(bundle, args.out)
    if args.json:
        export_json(bundle, args.json)
    print(f"n={bundle.n} k={bundle.k} m={bundle.m}")
    for rm in bundle.roadmaps:
        print(f"  G_{rm.anchor_index}: {len(rm.vertices)} vertices, {rm.n_edges} edges")
    print(f"elapsed {elapsed:.2f} s; checksum {digest.hex()}")
    return EXIT_OK


def _run(planner: str, bundle, query, seed: int, args):
    if planner == "trdrrt":
        p = DrrtParams(args.max_iters, args.time_budget_ms, args.goal_bias, args.k_start, seed)
        return drrt_plan(bundle, query, p)
    if planner == "rrt":
        p = RrtParams(args.max_iters, args.time_budget_ms, args.step_rad, args.goal_bias, seed)
        return rrt_plan(query, p)
    raise ValueError(f"unknown planner {planner!r}")


def _load_pair(args):
    sc = load_scenario(args.scenario)
    bundle = load_bundle(args.bundle) if args.bundle else None
    if bundle is not None and not bundle.spec.same_robot(sc.robot):
        raise RobotMismatchError(
            f"bundle robot has links {bundle.spec.link_lengths}, scenario robot has {sc.robot.link_lengths}"
        )
    return sc, bundle


def cmd_plan(args) -> int:
    sc, bundle = _load_pair(args)
    if args.planner == "trdrrt" and bundle is None:
        raise TilingPlanError("--bundle is required for the trdrrt planner")
    query = sc.query()
    result = _run(args.planner, bundle, query, args.seed, args)
    if args.omit_timing:
        result.stats.wall_time_ms = 0.0
    st = result.stats
    print(
        f"{result.planner} on {sc.name}: {result.status} after {st.iterations} iterations, "
        f"tree {st.tree_size}, self checks {st.self_collision_checks}, obstacle checks {st.obstacle_checks}, "
        f"{st.wall_time_ms:.1f} ms"
    )
    if result.solved and args.validate:
        rep = validate_result(result, query)
        print(f"dense validation: {'ok' if rep.ok else 'FAILED'} ({rep.checked} configurations)")
        for p in rep.problems:
            print(f"  {p}")
    if args.out:
        doc = result.to_json()
        doc["scenario"] = sc.name
        doc["seed"] = args.seed
        if bundle is not None:
            doc["bundle_checksum"] = bundle_checksum(bundle)
        Path(args.out).write_text(json.dumps(doc, sort_keys=True) + "\n")
    if args.svg:
        Path(args.svg).write_text(render_svg(sc, result if result.solved else None, args.frames))
    return _STATUS_EXIT.get(result.status, EXIT_OK)


def cmd_bench(args) -> int:
    sc, bundle = _load_pair(args)
    planners = [p.strip() for p in args.planners.split(",") if p.strip()]
    if "trdrrt" in planners and bundle is None:
        raise TilingPlanError("--bundle is required for the trdrrt planner")
    query = sc.query()
    records = []
    for planner in planners:
        for r in range(args.runs):
            seed = args.seeds + r
            try:
                result = _run(planner, bundle, query, seed, args)
            except TilingPlanError as exc:
                log.warning("%s seed %d failed: %s", planner, seed, exc)
                records.append(RunRecord(planner, sc.name, seed, False, 0.0, 0, 0, 0))
                continue
            if args.omit_timing:
                result.stats.wall_time_ms = 0.0
            records.append(RunRecord.from_result(result, sc.name, seed))
    text = records_csv(records)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    for planner in planners:
        stats = aggregate_stats([r for r in records if r.planner == planner])
        w = stats.aggregates["wall_time_ms"]
        print(
            f"{planner}: solved {stats.solved}/{len(stats.records)}; wall ms min {w.min:.1f} p25 {w.p25:.1f} "
            f"median {w.median:.1f} p75 {w.p75:.1f} max {w.max:.1f}; "
            f"self checks median {stats.aggregates['self_checks'].median:.0f}",
            file=sys.stderr if not args.out else sys.stdout,
        )
    return EXIT_OK


def _emit(args, text: str) -> None:
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")


def cmd_lattice(args) -> int:
    if args.mode == "bounds":
        rep = verify_bounds_suite(trials=args.trials, seed=args.seed)
        _emit(args, rep.text())
        return EXIT_OK if rep.passed else EXIT_ERROR
    if args.mode == "line":
        x, y = line_point(args.i, args.n, args.L)
        _emit(args, f"line_point i={args.i} n={args.n} L={args.L}: ({x:.7f}, {y:.7f})\nspacing {spacing(args.n, args.L):.7f}")
        return EXIT_OK
    if args.mode == "grid":
        lat = Lattice(math.pi / args.n, args.L)
        pts = lattice_points(lat, args.radius)
        lines = [f"lattice alpha=pi/{args.n} L={args.L}: dx={lat.dx:.7f} dy={lat.dy:.7f} spacing={lat.spacing:.7f}"]
        lines.append(f"{len(pts)} points within radius {args.radius}")
        lines += [f"({x:.7f}, {y:.7f})" for x, y in sorted(pts)]
        _emit(args, "\n".join(lines))
        return EXIT_OK
    # coverage: the fixed-interval toy first, then the designed-pair probe gaps
    levels = head_bfs(fixed_interval_bundle(args.n, args.L), TileVertex(0, (0.0, 0.0)), args.depth)
    lines = [f"fixed-interval n={args.n}: reached heads by depth " + " ".join(str(len(snap_set(h))) for h in levels)]
    if args.depth >= 1:
        lines.append(f"depth-1 reached-head count {len(snap_set(levels[1]))}")
    alpha = math.pi / args.n
    bundle = designed_bundle(alpha, args.L)
    reports = [verify_head_coverage(bundle, alpha, r, args.probe_radius) for r in args.rounds]
    for r in reports:
        lines.append(f"n={args.n} alpha={r.alpha:.6f} rounds={r.rounds} explored={r.explored_vertices} max_gap={r.max_gap:.6f}")
    _emit(args, "\n".join(lines))
    if args.csv:
        Path(args.csv).write_text(coverage_csv(reports))
    return EXIT_OK


def cmd_render(args) -> int:
    from .planners import PlanResult, PlanStats

    import numpy as np

    sc = load_scenario(args.scenario)
    result = None
    if args.result:
        doc = json.loads(Path(args.result).read_text())
        result = PlanResult(
            doc["planner"],
            doc["status"],
            [np.asarray(c) for c in doc["path"]],
            [np.asarray(s) for s in doc["segments"]],
            PlanStats(**doc["stats"]),
        )
    Path(args.out).write_text(render_svg(sc, result, args.frames))
    return EXIT_OK


def cmd_generate(args) -> int:
    sc = generate_scenario(args.kind, args.scale, args.seed)
    save_scenario(sc, args.out)
    print(f"wrote {args.kind} scenario ({len(sc.robot.link_lengths)} links, {len(sc.scene.obstacles)} obstacles) to {args.out}")
    return EXIT_OK


def _planner_flags(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-budget-ms", type=float, default=60_000.0)
    p.add_argument("--max-iters", type=int, default=200_000)
    p.add_argument("--goal-bias", type=float, default=0.05)
    p.add_argument("--k-start", type=int, default=None, help="start attachment neighbours (default: bundle k)")
    p.add_argument("--step-rad", type=float, default=0.1, help="RRT steering cap per joint")
    p.add_argument("--omit-timing", action="store_true", help="write wall_time_ms as 0 so outputs are byte-reproducible")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tilingplan", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="build and save a roadmap bundle")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--links", help="comma-separated link lengths, e.g. 1,1,1")
    g.add_argument("--robot", help="robot or scenario JSON file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=None, help="neighbours per vertex (default ceil(2e ln n))")
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--json", help="also write a JSON export here")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("plan", help="solve one query")
    p.add_argument("--bundle")
    p.add_argument("--scenario", required=True)
    p.add_argument("--planner", choices=["trdrrt", "rrt"], default="trdrrt")
    _planner_flags(p)
    p.add_argument("--out", help="result JSON")
    p.add_argument("--svg")
    p.add_argument("--frames", type=int, default=12)
    p.add_argument("--validate", action="store_true", help="re-check the path with the dense validator")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("bench", help="seeded runs of several planners; writes a stats CSV")
    p.add_argument("--bundle")
    p.add_argument("--scenario", required=True)
    p.add_argument("--planners", default="trdrrt,rrt")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seeds", type=int, default=0, help="first seed; run r uses seeds + r")
    _planner_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("lattice", help="closed forms, coverage and inequality checks")
    p.add_argument("--mode", choices=["line", "grid", "coverage", "bounds"], required=True)
    p.add_argument("--n", type=int, default=12, help="angle is pi/n; also the fixed-interval count")
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--i", type=int, default=1, help="line mode: step index")
    p.add_argument("--radius", type=float, default=1.5, help="grid mode: disc radius")
    p.add_argument("--depth", type=int, default=3, help="coverage mode: fixed-interval BFS depth")
    p.add_argument("--rounds", type=int, nargs="+", default=[0, 4, 8, 16, 32])
    p.add_argument("--probe-radius", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the report here")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("render", help="SVG of a scenario and optional result")
    p.add_argument("--scenario", required=True)
    p.add_argument("--result")
    p.add_argument("--frames", type=int, default=12)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("generate", help="write a built-in analog scenario")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except RobotMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (TilingPlanError, BundleLoadError, ScenarioError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
