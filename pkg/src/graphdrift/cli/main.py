#!/usr/bin/env python3
"""Entry point for the graphdrift CLI."""

from __future__ import annotations

import argparse
import json
import sys
from collections import deque
from pathlib import Path
from textwrap import dedent
from typing import Any, Callable

from graphdrift import __version__
from graphdrift.adapters.checkpoints import CheckpointError
from graphdrift.adapters.config import ConfigError, load_experiment, load_problem
from graphdrift.adapters.stores import StoreError, grid_of, load_grid_solution
from graphdrift.app.evaluation import ComparisonError, ComparisonGrid, l2_error
from graphdrift.app.experiment import (
    ExperimentConfig,
    ExperimentError,
    ReferenceSettings,
    export_snapshots,
    reference_solution,
    run_experiment,
    run_fvm,
    run_sweep,
)
from graphdrift.app.fvm import FvSolveError, GridError
from graphdrift.app.training import TrainingError
from graphdrift.domain.graph import GraphError
from graphdrift.domain.problem import ProblemError
from graphdrift.ports.solution import SolutionEvaluationError
from graphdrift.settings import SETTINGS
from graphdrift.utils.telemetry import clear as telemetry_clear
from graphdrift.utils.telemetry import iter_events as telemetry_iter
from graphdrift.utils.telemetry import record_structured_event
from graphdrift.utils.telemetry import summarize as telemetry_summarize

SCHEMES = ("graphpinn-continuous", "graphpinn-onenet", "edgepinn", "graphpinn-discrete")
HANDLED_ERRORS = (
    CheckpointError,
    ComparisonError,
    ConfigError,
    ExperimentError,
    FvSolveError,
    GraphError,
    GridError,
    ProblemError,
    SolutionEvaluationError,
    StoreError,
    TrainingError,
)

HELP_OVERVIEW = dedent(
    """
    Typical flow:
      - graphdrift fvm --problem model --output runs/reference
      - graphdrift train --problem model --scheme graphpinn-discrete --seed 0 --output runs/discrete
      - graphdrift error runs/discrete/solution.npz runs/reference/solution.npz

    Configuration files (YAML or JSON) passed with --config override command-line flags.
    """
)


def _float_list(raw: str) -> list[float]:
    try:
        return [float(item) for item in raw.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {raw!r}") from exc


def _int_list(raw: str) -> list[int]:
    try:
        return [int(item) for item in raw.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {raw!r}") from exc


def _emit(payload: dict[str, Any], as_json: bool, lines: list[str]) -> None:
    if as_json:
        print(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
        return
    for line in lines:
        print(line)


def _format_error(value: float | None) -> str:
    return "n/a" if value is None or value != value else f"{value:.4g}"


def _reference_flags(args: argparse.Namespace) -> dict[str, Any] | None:
    reference: dict[str, Any] = {}
    if getattr(args, "full_scale", False):
        reference["full_scale"] = True
    if getattr(args, "reference_cells", None) is not None:
        reference["cells"] = args.reference_cells
    if getattr(args, "reference_steps", None) is not None:
        reference["steps"] = args.reference_steps
    return reference or None


def _experiment_flags(args: argparse.Namespace) -> dict[str, Any]:
    flags: dict[str, Any] = {
        "problem": args.problem,
        "scheme": args.scheme,
        "seed": args.seed,
        "layers": getattr(args, "layers_count", None),
        "width": getattr(args, "width", None),
        "activation": args.activation,
        "continuity": args.continuity,
        "adam_steps": args.adam_steps,
        "learning_rate": args.learning_rate,
        "lbfgs_maxiter": args.lbfgs_maxiter,
        "time_steps": args.time_steps,
        "sweeps": args.sweeps,
        "output": args.output,
        "reference": _reference_flags(args),
    }
    if getattr(args, "snapshots", None):
        flags["snapshots"] = args.snapshots
    if getattr(args, "layer_counts", None):
        flags["layer_counts"] = args.layer_counts
    if getattr(args, "widths", None):
        flags["widths"] = args.widths
    return flags


def _load_experiment(args: argparse.Namespace) -> ExperimentConfig:
    config_path = Path(args.config).expanduser() if args.config else None
    payload = load_experiment(config_path, _experiment_flags(args))
    return ExperimentConfig.from_payload(payload, base_dir=config_path.parent if config_path else None)


def _fvm_cmd(args: argparse.Namespace) -> int:
    problem = load_problem(args.problem)
    reference = ReferenceSettings.from_dict(
        {
            key: value
            for key, value in {
                "cells": args.cells,
                "steps": args.steps,
                "alpha_stab": args.alpha_stab,
                "full_scale": args.full_scale,
            }.items()
            if value is not None
        }
    )
    output = Path(args.output).expanduser() if args.output else None
    trajectory, files = run_fvm(
        problem,
        reference,
        record_every=args.record_every,
        output=output,
        write_csv=args.csv,
        snapshots=args.snapshots or (),
    )
    diagnostics = trajectory.diagnostics()
    payload = {"label": trajectory.label(), **reference.to_dict(), **diagnostics, "files": [str(p) for p in files]}
    _emit(
        payload,
        args.json,
        [
            f"{trajectory.label()} T={problem.horizon:g}",
            f"  range [{diagnostics['min']:.6g}, {diagnostics['max']:.6g}]  mass drift {diagnostics['mass_drift']:.3e}",
            *[f"  wrote {path}" for path in files],
        ],
    )
    return 0


def _train_cmd(args: argparse.Namespace) -> int:
    config = _load_experiment(args)
    result = run_experiment(config, resume=args.resume)
    report = result.report
    payload = {"output": str(result.output), "row": result.row, "reasons": report.reasons}
    _emit(
        payload,
        args.json,
        [
            f"{config.train.scheme.value} hidden={list(config.train.hidden)} seed={config.seed}",
            f"  relative L2 error {_format_error(result.row['relative_error'])}"
            f"  absolute {_format_error(result.row['absolute_error'])}",
            f"  final loss {_format_error(report.final_loss)}  wall time {report.wall_time:.1f}s",
            f"  outputs in {result.output}",
        ],
    )
    return 0


def _sweep_cmd(args: argparse.Namespace) -> int:
    config = _load_experiment(args)
    result = run_sweep(config, jobs=args.jobs)
    payload = {"output": str(result.output), "rows": result.rows, "tables": [str(p) for p in result.tables]}
    lines = [f"{len(result.rows)} runs, {len(result.failures)} failed"]
    lines.extend(
        f"  L={row['layers']} W={row['width']}: {_format_error(row['relative_error'])}"
        + (f" ({row['error']})" if row.get("error") else "")
        for row in result.rows
    )
    lines.append(f"  tables in {result.output}")
    _emit(payload, args.json, lines)
    return 1 if result.failures and len(result.failures) == len(result.rows) else 0


def _error_cmd(args: argparse.Namespace) -> int:
    solution_a = load_grid_solution(Path(args.first))
    solution_b = load_grid_solution(Path(args.second))
    report = l2_error(solution_a, solution_b, grid_of(solution_b))
    _emit(
        report.to_dict(),
        args.json,
        [f"absolute {report.absolute:.6e}", f"relative {_format_error(report.relative)}"],
    )
    return 0


def _snapshot_cmd(args: argparse.Namespace) -> int:
    output = Path(args.output).expanduser() if args.output else Path.cwd() / "snapshots"
    if args.run:
        solution = load_grid_solution(Path(args.run) / "solution.npz")
        grid = grid_of(solution)
    else:
        problem = load_problem(args.problem)
        reference = ReferenceSettings.from_dict(
            {key: value for key, value in {"cells": args.cells, "steps": args.steps}.items() if value is not None}
        )
        solution = reference_solution(problem, reference)
        grid = ComparisonGrid(problem.graph, problem.horizon, args.points, args.points)
    files = export_snapshots(solution, args.times, output, grid)
    _emit({"files": [str(p) for p in files]}, args.json, [f"wrote {path}" for path in files])
    return 0


def _telemetry_cmd(args: argparse.Namespace) -> int:
    if args.telemetry_command == "report":
        events = list(telemetry_iter(SETTINGS))
        if args.recent and args.recent > 0:
            events = events[-args.recent :]
        print(json.dumps(telemetry_summarize(events), indent=2, ensure_ascii=False))
        return 0
    if args.telemetry_command == "clear":
        telemetry_clear(SETTINGS)
        print("Telemetry log cleared")
        return 0
    if args.telemetry_command == "tail":
        for event in deque(telemetry_iter(SETTINGS), maxlen=args.limit):
            print(json.dumps(event, ensure_ascii=False))
        return 0
    print("Unsupported telemetry command", file=sys.stderr)
    return 2


def _guarded(name: str, handler: Callable[[argparse.Namespace], int]) -> Callable[[argparse.Namespace], int]:
    def run(args: argparse.Namespace) -> int:
        try:
            return handler(args)
        except HANDLED_ERRORS as exc:
            print(f"{name} error: {exc}", file=sys.stderr)
            record_structured_event(
                SETTINGS, f"cli.{name}", payload={"error": str(exc)}, level="error", status="error", component="cli"
            )
            return 1

    return run


def _add_training_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--problem", required=True, help="Packaged problem name ('model') or problem file")
    parser.add_argument("--scheme", required=True, choices=SCHEMES)
    parser.add_argument("--seed", required=True, type=int, help="Seed for initialization and collocation")
    parser.add_argument("--config", help="Experiment file (YAML/JSON); its keys override these flags")
    parser.add_argument("--activation", choices=("tanh", "sigmoid"))
    parser.add_argument("--continuity", choices=("aux", "avg-printed", "avg-squared-inside"))
    parser.add_argument("--adam-steps", type=int)
    parser.add_argument("--learning-rate", type=float)
    parser.add_argument("--lbfgs-maxiter", type=int)
    parser.add_argument("--time-steps", type=int, help="Implicit Euler steps of the discrete scheme")
    parser.add_argument("--sweeps", type=int, help="Alternating sweeps of edgepinn")
    parser.add_argument("--full-scale", action="store_true", help="Reference FVM at 8000 cells x 4000 steps")
    parser.add_argument("--reference-cells", type=int)
    parser.add_argument("--reference-steps", type=int)
    parser.add_argument("--output", help="Output directory")
    parser.add_argument("--json", action="store_true", help="Emit machine-readable JSON output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphdrift",
        description="Drift-diffusion on metric graphs: finite-volume reference and neural training schemes",
        epilog=HELP_OVERVIEW,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    fvm_cmd = sub.add_parser("fvm", help="Solve the finite-volume reference")
    fvm_cmd.add_argument("--problem", required=True)
    fvm_cmd.add_argument("--cells", type=int, help="Cells per edge (default 2000)")
    fvm_cmd.add_argument("--steps", type=int, help="Time steps (default 1000)")
    fvm_cmd.add_argument("--alpha-stab", type=float)
    fvm_cmd.add_argument("--full-scale", action="store_true")
    fvm_cmd.add_argument("--record-every", type=int, default=1, help="Keep every K-th state")
    fvm_cmd.add_argument("--csv", action="store_true", help="Write the full trajectory CSV")
    fvm_cmd.add_argument("--output", help="Output directory")
    fvm_cmd.add_argument("--snapshots", type=_float_list, help="Comma-separated snapshot times")
    fvm_cmd.add_argument("--json", action="store_true")
    fvm_cmd.set_defaults(func=_guarded("fvm", _fvm_cmd))

    train_cmd = sub.add_parser("train", help="Train one neural scheme and compare with the reference")
    _add_training_flags(train_cmd)
    train_cmd.add_argument("--layers", dest="layers_count", type=int, help="Hidden layers")
    train_cmd.add_argument("--width", type=int, help="Neurons per hidden layer")
    train_cmd.add_argument("--snapshots", type=_float_list, help="Comma-separated snapshot times")
    train_cmd.add_argument("--resume", action="store_true", help="Continue the discrete scheme from its checkpoints")
    train_cmd.set_defaults(func=_guarded("train", _train_cmd))

    sweep_cmd = sub.add_parser("sweep", help="Error table over layers x widths")
    _add_training_flags(sweep_cmd)
    sweep_cmd.add_argument("--layers", dest="layer_counts", type=_int_list, help="Comma-separated layer counts")
    sweep_cmd.add_argument("--widths", type=_int_list, help="Comma-separated widths")
    sweep_cmd.add_argument("--jobs", type=int, default=1, help="Parallel worker processes")
    sweep_cmd.set_defaults(func=_guarded("sweep", _sweep_cmd))

    error_cmd = sub.add_parser("error", help="L2 error between two stored solutions")
    error_cmd.add_argument("first", help="solution.npz being measured")
    error_cmd.add_argument("second", help="solution.npz used as reference")
    error_cmd.add_argument("--json", action="store_true")
    error_cmd.set_defaults(func=_guarded("error", _error_cmd))

    snapshot_cmd = sub.add_parser("snapshot", help="Export solution values at given times")
    snapshot_cmd.add_argument("--problem", help="Problem for --fvm")
    snapshot_cmd.add_argument("--times", required=True, type=_float_list)
    source = snapshot_cmd.add_mutually_exclusive_group(required=True)
    source.add_argument("--fvm", action="store_true", help="Use the (cached) finite-volume reference")
    source.add_argument("--run", help="Run directory holding solution.npz")
    snapshot_cmd.add_argument("--cells", type=int)
    snapshot_cmd.add_argument("--steps", type=int)
    snapshot_cmd.add_argument("--points", type=int, default=201, help="Points per edge")
    snapshot_cmd.add_argument("--output", help="Output directory")
    snapshot_cmd.add_argument("--json", action="store_true")
    snapshot_cmd.set_defaults(func=_guarded("snapshot", _snapshot_cmd))

    telemetry_cmd = sub.add_parser("telemetry", help="Inspect local telemetry logs")
    telemetry_sub = telemetry_cmd.add_subparsers(dest="telemetry_command", required=True)
    telemetry_report = telemetry_sub.add_parser("report", help="Print aggregated telemetry stats")
    telemetry_report.add_argument("--recent", type=int, default=0, help="Limit to the last N events")
    telemetry_report.set_defaults(func=_telemetry_cmd)
    telemetry_clear_cmd = telemetry_sub.add_parser("clear", help="Remove telemetry log file")
    telemetry_clear_cmd.set_defaults(func=_telemetry_cmd)
    telemetry_tail = telemetry_sub.add_parser("tail", help="Print last N telemetry events")
    telemetry_tail.add_argument("--limit", type=int, default=20)
    telemetry_tail.set_defaults(func=_telemetry_cmd)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(sys.argv[1:] if argv is None else argv)
    if args.command == "snapshot" and args.fvm and not args.problem:
        parser.error("snapshot --fvm requires --problem")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
