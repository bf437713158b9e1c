"""End-to-end experiment runs: reference, training, error row and persisted artifacts."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from graphdrift.adapters.stores import (
    save_grid_solution,
    snapshot_filename,
    write_json,
    write_loss_history,
    write_snapshot_csv,
    write_trajectory_csv,
)
from graphdrift.app.evaluation import ComparisonGrid
from graphdrift.app.fvm import FvTrajectory, build_grid, solve_fvm
from graphdrift.app.training import TrainingError, TrainReport, train
from graphdrift.domain.problem import ProblemSpec
from graphdrift.ports.solution import Solution
from graphdrift.settings import SETTINGS, RuntimeSettings
from graphdrift.utils.telemetry import record_structured_event

from .config import ExperimentConfig, ExperimentError, ReferenceSettings
from .reference import reference_solution

_TIME_SNAP = 1e-9


@dataclass
class ExperimentResult:
    output: Path
    report: TrainReport
    reference: FvTrajectory
    row: dict[str, Any]
    files: list[Path] = field(default_factory=list)


def comparison_grid(config: ExperimentConfig) -> ComparisonGrid:
    return ComparisonGrid(config.problem.graph, config.problem.horizon, config.comparison_times, config.comparison_points)


def export_snapshots(
    solution: Solution,
    times: Iterable[float],
    directory: Path,
    grid: ComparisonGrid,
) -> list[Path]:
    """One CSV of ``(edge_id, x, value)`` rows per requested time."""

    times = [float(t) for t in times]
    for t in times:
        if t < -_TIME_SNAP * grid.horizon or t > grid.horizon * (1.0 + _TIME_SNAP):
            raise ExperimentError(f"experiment.snapshot_time: {t} lies outside [0, {grid.horizon}]")
    return [
        write_snapshot_csv(directory / snapshot_filename(t), solution, grid, min(max(t, 0.0), grid.horizon))
        for t in times
    ]


def error_row(config: ExperimentConfig, report: TrainReport) -> dict[str, Any]:
    error = report.error
    return {
        "scheme": config.train.scheme.value,
        "layers": len(config.train.hidden),
        "width": config.train.hidden[0],
        "seed": config.seed,
        "relative_error": error.relative if error is not None and error.relative is not None else float("nan"),
        "absolute_error": error.absolute if error is not None else float("nan"),
        "final_loss": report.final_loss if report.final_loss is not None else float("nan"),
        "adam_iterations": report.phase_iterations.get("adam", 0),
        "lbfgs_iterations": report.phase_iterations.get("lbfgs", 0),
        "wall_time": report.wall_time,
    }


def run_experiment(
    config: ExperimentConfig,
    *,
    settings: RuntimeSettings | None = None,
    run_id: str | None = None,
    resume: bool = False,
    reference: FvTrajectory | None = None,
) -> ExperimentResult:
    """Reference solve, training, error evaluation and artifacts under the output directory.

    Files: ``report.json``, ``loss_history.csv``, ``solution.npz`` and one
    ``snapshot_t<time>.csv`` per requested time. A failing reference solve or training stage leaves
    ``failure.json`` and any step checkpoints behind.
    """

    settings = settings or SETTINGS
    run_id = run_id or config.run_name
    output = Path(config.output) if config.output is not None else settings.runs_dir / run_id
    output.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    grid = comparison_grid(config)

    stage = "reference"
    try:
        if reference is None:
            reference = reference_solution(config.problem, config.reference, n_times=grid.n_times, settings=settings)
        stage = "train"
        report = train(
            config.problem,
            config.train,
            reference=reference,
            comparison=grid,
            settings=settings,
            run_id=run_id,
            checkpoint_root=output,
            resume=resume,
        )
    except (TrainingError, ValueError, RuntimeError) as exc:
        step = getattr(exc, "step", None)
        write_json(
            output / "failure.json",
            {"stage": stage, "error": str(exc), "step": step, "config": config.train.to_dict()},
        )
        record_structured_event(
            settings,
            "experiment.run",
            payload={"scheme": config.train.scheme.value, "stage": stage, "error": str(exc), "step": step},
            level="error",
            status="error",
            component="experiment",
            run_id=run_id,
            duration_ms=(time.perf_counter() - started) * 1000.0,
        )
        raise ExperimentError(f"experiment.{stage}: {exc}") from exc

    solution = report.solution(config.problem)
    row = error_row(config, report)
    files = [
        write_json(
            output / "report.json",
            {
                **report.to_dict(),
                "problem": config.problem_ref,
                "reference": {**config.reference.to_dict(), "label": reference.label()},
                "comparison": {"times": grid.n_times, "points": grid.n_points},
            },
        ),
        write_loss_history(output / "loss_history.csv", report.history),
        save_grid_solution(output / "solution.npz", solution, grid),
    ]
    files.extend(export_snapshots(solution, config.snapshots, output / "snapshots", grid))
    record_structured_event(
        settings,
        "experiment.run",
        payload={key: (None if isinstance(value, float) and np.isnan(value) else value) for key, value in row.items()},
        status="success",
        component="experiment",
        run_id=run_id,
        duration_ms=(time.perf_counter() - started) * 1000.0,
    )
    return ExperimentResult(output=output, report=report, reference=reference, row=row, files=files)


def run_fvm(
    problem: ProblemSpec,
    reference: ReferenceSettings,
    *,
    record_every: int = 1,
    output: Path | None = None,
    write_csv: bool = False,
    snapshots: Sequence[float] = (),
    comparison: tuple[int, int] = (201, 201),
    settings: RuntimeSettings | None = None,
) -> tuple[FvTrajectory, list[Path]]:
    """Stand-alone reference solve with optional trajectory CSV, grid solution and snapshots."""

    settings = settings or SETTINGS
    grid = build_grid(problem.graph, reference.cells)
    trajectory = solve_fvm(problem, grid, reference.steps, reference.alpha_stab, record_every=record_every, settings=settings)
    files: list[Path] = []
    if output is not None:
        output.mkdir(parents=True, exist_ok=True)
        compare = ComparisonGrid(problem.graph, problem.horizon, *comparison)
        files.append(save_grid_solution(output / "solution.npz", trajectory, compare))
        files.append(write_json(output / "fvm.json", {"label": trajectory.label(), **reference.to_dict(), **trajectory.diagnostics()}))
        if write_csv:
            files.append(write_trajectory_csv(output / "trajectory.csv", trajectory))
        files.extend(export_snapshots(trajectory, snapshots, output / "snapshots", compare))
    return trajectory, files


__all__ = ["ExperimentResult", "comparison_grid", "error_row", "export_snapshots", "run_experiment", "run_fvm"]
