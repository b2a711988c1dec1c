"""Command-line front end: evaluate scenario files and frame replays.

``trajrisk run`` evaluates one scenario JSON file, or every ``*.json`` frame
of a replay directory in name order.  Results go to stdout; ``--trace``
writes one CSV record per frame (fixed header, probabilities with 12
significant digits so traces diff cleanly), ``--metrics`` dumps run metrics
as JSON and ``--bench`` reports median stage timings over repeated runs.
"""

from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
from pathlib import Path

from .engine import evaluate, resolve_workers
from .errors import EngineError, ScenarioError, TrajriskError
from .risk import CriticalityResult
from .scenario import validate_scenario

TRACE_HEADER = [
    "timestamp", "p_cra", "co_probabilities", "colliding_combinations",
    "escape_route_1", "escape_route_1_p",
    "escape_route_2", "escape_route_2_p",
    "escape_route_3", "escape_route_3_p",
    "t_street_s", "t_generation_s", "t_collision_s", "t_risk_s",
]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ENGINE = 3


def _fmt(value: float) -> str:
    return format(float(value), ".12g")


def trace_row(result: CriticalityResult, metrics) -> list[str]:
    row = [_fmt(result.timestamp), _fmt(result.p_cra)]
    row.append(";".join(f"{obj_id}={_fmt(p)}" for obj_id, p in result.co_probabilities))
    row.append(str(len(result.combinations)))
    top = list(result.escape_routes[:3])
    while len(top) < 3:
        top.append(("", ""))
    for route_id, prob in top:
        row.append(str(route_id))
        row.append(_fmt(prob) if prob != "" else "")
    for stage in ("street", "generation", "collision", "risk"):
        row.append(_fmt(metrics.stage_seconds.get(stage, 0.0)))
    return row


def read_trace(path) -> list[dict]:
    """Re-parse a trace file written by this tool."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TRACE_HEADER:
            raise ScenarioError(f"{path}: unexpected trace header")
        rows = []
        for record in reader:
            parsed = dict(record)
            if record["p_cra"] != "":
                parsed["p_cra"] = float(record["p_cra"])
                parsed["timestamp"] = float(record["timestamp"])
                parsed["colliding_combinations"] = int(record["colliding_combinations"])
            rows.append(parsed)
        return rows


def _load_frames(target: Path, config_overrides: dict) -> list[dict]:
    if target.is_dir():
        files = sorted(target.glob("*.json"))
        if not files:
            raise ScenarioError(f"{target}: no *.json frames found")
    else:
        if not target.exists():
            raise ScenarioError(f"{target}: no such file")
        files = [target]
    frames = []
    for path in files:
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(raw, dict):
            raise ScenarioError(f"{path}: scenario must be a JSON object")
        if config_overrides:
            merged = dict(raw.get("config", {}))
            merged.update(config_overrides)
            raw["config"] = merged
        frames.append(raw)
    return frames


def _print_summary(result: CriticalityResult, metrics, out) -> None:
    print(f"p_cra: {_fmt(result.p_cra)}", file=out)
    print(f"trajectories: {metrics.trajectory_count} "
          f"(pairs: {metrics.pair_count}, pose combinations: {metrics.pose_combinations})",
          file=out)
    if result.co_probabilities:
        parts = ", ".join(f"{k}={_fmt(v)}" for k, v in result.co_probabilities)
        print(f"per-CO probability: {parts}", file=out)
    print(f"colliding combinations: {len(result.combinations)}", file=out)
    if result.escape_routes:
        top = ", ".join(f"#{i} (p={_fmt(p)})" for i, p in result.escape_routes[:3])
        print(f"top escape routes: {top}", file=out)
    else:
        print("top escape routes: none", file=out)
    timing = ", ".join(f"{k}={v * 1e3:.1f}ms" for k, v in metrics.stage_seconds.items())
    print(f"stage times: {timing}", file=out)
    print(f"throughput: {metrics.combinations_per_second:,.0f} pose combinations/s",
          file=out)


def _run_bench(scenario, workers, repeat, out):
    runs = []
    for _ in range(repeat):
        _, metrics = evaluate(scenario, workers=workers)
        runs.append(metrics)
    medians = {
        stage: statistics.median(m.stage_seconds[stage] for m in runs)
        for stage in runs[0].stage_seconds
    }
    throughput = statistics.median(m.combinations_per_second for m in runs)
    print(f"bench: {repeat} runs, median stage times:", file=out)
    for stage, seconds in medians.items():
        print(f"  {stage:<12} {seconds * 1e3:10.2f} ms", file=out)
    total = sum(medians.values())
    print(f"  {'total':<12} {total * 1e3:10.2f} ms", file=out)
    print(f"median throughput: {throughput:,.0f} pose combinations/s", file=out)
    return {"repeat": repeat, "median_stage_seconds": medians,
            "median_combinations_per_second": throughput,
            "runs": [m.to_dict() for m in runs]}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajrisk",
        description="Collision criticality estimation for traffic scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="evaluate a scenario file or replay directory")
    run.add_argument("scenario", type=Path,
                     help="scenario JSON file, or directory of frame JSONs")
    run.add_argument("--trace", type=Path, default=None,
                     help="write one CSV trace record per frame")
    run.add_argument("--metrics", type=Path, default=None,
                     help="write run metrics as JSON")
    run.add_argument("--bench", action="store_true",
                     help="benchmark mode: repeat the evaluation, report medians")
    run.add_argument("--repeat", type=int, default=10,
                     help="repetitions in benchmark mode (default 10)")
    run.add_argument("--workers", default="1",
                     help="worker count, or 'auto' for all cores (default 1)")
    run.add_argument("--collision-mode", choices=("paper", "exact"), default=None,
                     help="override the polygon overlap test")
    run.add_argument("--config", type=Path, default=None,
                     help="JSON file with SimulationConfig overrides")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = sys.stdout

    try:
        workers = args.workers if args.workers == "auto" else int(args.workers)
        resolve_workers(workers)
    except (ValueError, TrajriskError):
        print(f"error: invalid --workers value {args.workers!r}", file=sys.stderr)
        return EXIT_INPUT

    overrides = {}
    if args.config is not None:
        try:
            overrides.update(json.loads(args.config.read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config overrides: {exc}", file=sys.stderr)
            return EXIT_INPUT
    if args.collision_mode is not None:
        overrides["collision_mode"] = args.collision_mode

    try:
        frames = _load_frames(args.scenario, overrides)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    trace_writer = None
    trace_file = None
    if args.trace is not None:
        trace_file = open(args.trace, "w", newline="")
        trace_writer = csv.writer(trace_file)
        trace_writer.writerow(TRACE_HEADER)

    metrics_payload = {}
    succeeded = 0
    failed = 0
    try:
        for index, raw in enumerate(frames):
            label = f"frame {index}" if len(frames) > 1 else "scenario"
            try:
                scenario = validate_scenario(raw)
            except ScenarioError as exc:
                failed += 1
                print(f"warning: {label}: invalid input: {exc}", file=sys.stderr)
                if len(frames) == 1:
                    return EXIT_INPUT
                if trace_writer:
                    row = [_fmt(raw.get("timestamp", float("nan")))]
                    trace_writer.writerow(row + [""] * (len(TRACE_HEADER) - 1))
                continue
            try:
                if args.bench:
                    metrics_payload["bench"] = _run_bench(
                        scenario, workers, max(args.repeat, 1), out)
                    result, metrics = evaluate(scenario, workers=workers)
                else:
                    result, metrics = evaluate(scenario, workers=workers)
            except EngineError as exc:
                failed += 1
                print(f"error: {label}: {exc}", file=sys.stderr)
                if len(frames) == 1:
                    return EXIT_ENGINE
                if trace_writer:
                    row = [_fmt(scenario.timestamp)]
                    trace_writer.writerow(row + [""] * (len(TRACE_HEADER) - 1))
                continue
            succeeded += 1
            if len(frames) > 1:
                print(f"[{label}] t={_fmt(scenario.timestamp)} "
                      f"p_cra={_fmt(result.p_cra)}", file=out)
            else:
                _print_summary(result, metrics, out)
            metrics_payload["last_run"] = metrics.to_dict()
            if trace_writer:
                trace_writer.writerow(trace_row(result, metrics))
    finally:
        if trace_file:
            trace_file.close()

    if args.metrics is not None:
        args.metrics.write_text(json.dumps(metrics_payload, indent=2))

    if succeeded == 0:
        return EXIT_ENGINE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
