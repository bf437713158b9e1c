"""Experiment harness: reference solutions, runs, snapshots and sweeps."""

from .config import DESK_SCALE, FULL_SCALE, ExperimentConfig, ExperimentError, ReferenceSettings, resolve_problem_ref
from .reference import aligned_record_every, reference_key, reference_solution
from .runner import ExperimentResult, comparison_grid, error_row, export_snapshots, run_experiment, run_fvm
from .sweep import SweepResult, run_cell, run_sweep

__all__ = [
    "DESK_SCALE",
    "ExperimentConfig",
    "ExperimentError",
    "ExperimentResult",
    "FULL_SCALE",
    "ReferenceSettings",
    "SweepResult",
    "aligned_record_every",
    "comparison_grid",
    "error_row",
    "export_snapshots",
    "reference_key",
    "reference_solution",
    "resolve_problem_ref",
    "run_cell",
    "run_experiment",
    "run_fvm",
    "run_sweep",
]
