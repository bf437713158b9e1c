"""Layers x widths sweeps producing error tables."""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from graphdrift.adapters.stores import write_sweep_tables
from graphdrift.settings import SETTINGS, RuntimeSettings

from .config import ExperimentConfig, ExperimentError
from .reference import reference_solution
from .runner import run_experiment


@dataclass
class SweepResult:
    output: Path
    rows: list[dict[str, Any]]
    tables: tuple[Path, Path, Path]

    @property
    def failures(self) -> list[dict[str, Any]]:
        return [row for row in self.rows if row.get("error")]


def _failed_row(config: ExperimentConfig, layers: int, width: int, message: str) -> dict[str, Any]:
    return {
        "scheme": config.train.scheme.value,
        "layers": layers,
        "width": width,
        "seed": config.seed,
        "relative_error": float("nan"),
        "error": message,
    }


def run_cell(payload: Mapping[str, Any], settings: RuntimeSettings) -> dict[str, Any]:
    """Train one table cell; module level so worker processes can import it."""

    config = ExperimentConfig.from_payload(payload)
    layers, width = len(config.train.hidden), config.train.hidden[0]
    try:
        result = run_experiment(config, settings=settings)
    except ExperimentError as exc:
        return _failed_row(config, layers, width, str(exc))
    return {**result.row, "error": ""}


def run_sweep(config: ExperimentConfig, *, jobs: int = 1, settings: RuntimeSettings | None = None) -> SweepResult:
    """Run every (layers, width) combination; the reference is solved once and shared through the cache."""

    settings = settings or SETTINGS
    output = Path(config.output) if config.output is not None else settings.runs_dir / f"sweep-{config.train.scheme.value}-seed{config.seed}"
    reference_solution(config.problem, config.reference, n_times=config.comparison_times, settings=settings)

    cells = [
        config.with_topology(layers, width, output / f"L{layers}_W{width}")
        for layers in config.layer_counts
        for width in config.widths
    ]
    payloads = [dict(cell.payload) for cell in cells]
    if jobs <= 1:
        rows = [run_cell(payload, settings) for payload in payloads]
    else:
        with multiprocessing.Pool(processes=jobs) as pool:
            pending = [pool.apply_async(run_cell, args=(payload, settings)) for payload in payloads]
            rows = [task.get() for task in pending]

    return SweepResult(output=output, rows=rows, tables=write_sweep_tables(output, rows))


__all__ = ["SweepResult", "run_cell", "run_sweep"]
