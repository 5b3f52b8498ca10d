"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 planning failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .csvio import format_value, trajectory_columns, write_series_csv
from .errors import DimensionError, ParseError, ValidationError
from .experiment import (
    GENERATORS,
    ExperimentConfig,
    PlanningFailure,
    evaluate,
    load_config,
    plan,
    summarize,
)

log = logging.getLogger("trajenergy")

EXIT_OK, EXIT_CONFIG, EXIT_PLANNING = 0, 1, 2
CONFIG_ERRORS = (ParseError, ValidationError, DimensionError)

_FLAG_FIELDS = {
    "robot": "robot",
    "scene": "scene",
    "waypoints": "waypoints",
    "start": "start",
    "goal": "goal",
    "duration": "duration",
    "generator": "generator",
    "lam": "lam",
    "dt": "dt",
    "scale": "scaling",
    "avoid": "avoidance",
    "time_scale": "time_scale",
    "seed": "seed",
}


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON experiment config; flags override it")
    p.add_argument("--robot", help="robot JSON file (default: bundled 7-DOF arm)")
    p.add_argument("--scene", help="obstacle scene JSON file")
    p.add_argument("--waypoints", help="waypoint JSON file")
    p.add_argument("--start", type=float, nargs="+", help="start configuration (rad)")
    p.add_argument("--goal", type=float, nargs="+", help="goal configuration (rad)")
    p.add_argument("--duration", type=float, help="start-to-goal duration (s)")
    p.add_argument("--generator", choices=GENERATORS)
    p.add_argument("--lambda", dest="lam", type=float, help="velocity weight in the cost")
    p.add_argument("--dt", type=float, help="sampling step (s)")
    p.add_argument("--scale", action=argparse.BooleanOptionalAction, default=None,
                   help="time-dilate to respect joint velocity/acceleration limits")
    p.add_argument("--avoid", action=argparse.BooleanOptionalAction, default=None,
                   help="deform the trajectory away from scene obstacles")
    p.add_argument("--time-scale", type=float, help="extra uniform slow-down factor >= 1")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajenergy", description="Energy-aware joint-space trajectory planning"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_flags(sub.add_parser("plan", help="write the planned trajectory as CSV"))
    _add_run_flags(sub.add_parser("report", help="write metrics CSV and SVG plots"))
    cmp_ = sub.add_parser("compare", help="compare energy and smoothness of configs")
    cmp_.add_argument("configs", type=Path, nargs="+", help="config files; the first is the baseline")
    cmp_.add_argument("--out", type=Path, default=Path("out"))
    cmp_.add_argument("--jobs", type=int, default=1, help="evaluate configs in N processes")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config is not None else ExperimentConfig()
    overrides = {}
    for flag, attr in _FLAG_FIELDS.items():
        value = getattr(args, flag)
        if value is not None:
            overrides[attr] = value
    if overrides:
        cfg = replace(cfg, **overrides)
    for attr in ("robot", "scene", "waypoints"):
        path = getattr(cfg, attr)
        if path is not None and not Path(path).exists():
            raise ParseError(f"{attr} file not found: {path}")
    return cfg


def cmd_plan(cfg: ExperimentConfig, out: Path) -> Path:
    result = plan(cfg)
    out.mkdir(parents=True, exist_ok=True)
    t, q, qd, qdd = result.trajectory.sample()
    path = write_series_csv(out / "trajectory.csv", trajectory_columns(t, q, qd, qdd))
    print(f"wrote {path} ({len(t)} samples, duration {result.trajectory.duration:.6g} s)")
    return path


def cmd_report(cfg: ExperimentConfig, out: Path) -> list[Path]:
    from .plotting import write_panels

    result = evaluate(cfg)
    out.mkdir(parents=True, exist_ok=True)
    written = [write_series_csv(out / "metrics.csv", result.metrics.columns())]
    written += write_panels(result.metrics, out)
    summary = out / "summary.json"
    summary.write_text(json.dumps(summarize(result), indent=2) + "\n")
    written.append(summary)
    s = summarize(result)
    print(
        f"{s['name']}: total {s['total']:.6g}, lambda-term {s['lambda_term']:.6g}, "
        f"torque-term {s['torque_term']:.6g}, msj {s['smoothness_msj']:.6g}"
    )
    return written


def _percent(value: float, base: float) -> float:
    if base == value:
        return 0.0
    if base == 0:
        return float("inf") if value > 0 else float("-inf")
    return 100.0 * (value - base) / base


COMPARE_METRICS = ("total", "lambda_term", "torque_term", "smoothness_msj")


def cmd_compare(configs: list[ExperimentConfig], out: Path, jobs: int = 1) -> list[dict]:
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(evaluate, configs))
    else:
        results = [evaluate(cfg) for cfg in configs]
    dims = {r.model.n_joints for r in results}
    if len(dims) != 1:
        raise DimensionError(f"configs use robots with different joint counts: {sorted(dims)}")

    rows = [summarize(r) for r in results]
    base = rows[0]
    for row in rows:
        for key in COMPARE_METRICS:
            row[f"{key}_delta_pct"] = _percent(row[key], base[key])

    header = ["name", *COMPARE_METRICS, *(f"{k}_delta_pct" for k in COMPARE_METRICS)]
    out.mkdir(parents=True, exist_ok=True)
    with (out / "compare.csv").open("w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = [row["name"]] + [format_value(row[k]) for k in header[1:]]
            fh.write(",".join(cells) + "\n")

    width = max(len(r["name"]) for r in rows)
    print(f"{'name':<{width}}  {'total':>12} {'lambda_term':>12} {'torque_term':>12} "
          f"{'msj':>12} {'d_total%':>9} {'d_lambda%':>9}")
    for r in rows:
        print(f"{r['name']:<{width}}  {r['total']:12.6g} {r['lambda_term']:12.6g} "
              f"{r['torque_term']:12.6g} {r['smoothness_msj']:12.6g} "
              f"{r['total_delta_pct']:9.3f} {r['lambda_term_delta_pct']:9.3f}")
    return rows


def _configure_logging() -> None:
    level = os.environ.get("TRAJ_ENERGY_LOG", "error").upper()
    if level not in ("ERROR", "INFO", "DEBUG"):
        level = "ERROR"
    logging.basicConfig(level=getattr(logging, level), format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compare":
            if args.jobs < 1:
                raise ValidationError("jobs", "must be >= 1")
            cmd_compare([load_config(p) for p in args.configs], args.out, args.jobs)
        else:
            cfg = config_from_args(args)
            (cmd_plan if args.command == "plan" else cmd_report)(cfg, args.out)
    except CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PlanningFailure as exc:
        print(f"planning failed: {exc}", file=sys.stderr)
        return EXIT_PLANNING
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
