"""Finite-volume reference solutions with an on-disk cache."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from graphdrift.app.fvm import FvTrajectory, build_grid, solve_fvm
from graphdrift.domain.problem import ProblemError, ProblemSpec
from graphdrift.settings import SETTINGS, RuntimeSettings
from graphdrift.utils.telemetry import record_structured_event

from .config import ReferenceSettings


def aligned_record_every(n_t: int, n_times: int) -> int:
    """Largest stride that still stores every step a comparison time falls on.

    Comparison times ``T j / (n_times - 1)`` land on stored steps whenever the
    stride divides ``n_t / (n_times - 1)``.
    """

    intervals = n_times - 1
    if intervals < 1 or n_t % intervals:
        return 1
    return max(1, n_t // intervals)


def reference_key(problem: ProblemSpec, cells: int, steps: int, alpha_stab: float, record_every: int = 1) -> str | None:
    """sha256 over the problem payload and the grid; ``None`` for problems built in code."""

    try:
        fingerprint = problem.fingerprint()
    except ProblemError:
        return None
    material = json.dumps(
        {"problem": fingerprint, "cells": cells, "steps": steps, "alpha_stab": alpha_stab, "record_every": record_every},
        sort_keys=True,
    )
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


def _store(path: Path, trajectory: FvTrajectory) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp.npz")
    np.savez(
        tmp,
        cells=np.asarray(trajectory.grid.cells, dtype=np.int64),
        n_t=np.array(trajectory.n_t),
        alpha_stab=np.array(trajectory.alpha_stab),
        steps=trajectory.steps,
        states=trajectory.states,
    )
    tmp.replace(path)


def _restore(path: Path, problem: ProblemSpec) -> FvTrajectory | None:
    try:
        with np.load(path, allow_pickle=False) as archive:
            cells = {e: int(n) for e, n in enumerate(archive["cells"])}
            n_t = int(archive["n_t"])
            alpha_stab = float(archive["alpha_stab"])
            steps = np.array(archive["steps"], dtype=np.int64)
            states = np.array(archive["states"], dtype=np.float64)
    except (OSError, KeyError, ValueError):
        return None
    grid = build_grid(problem.graph, cells)
    if states.shape[1] != grid.n_unknowns:
        return None
    return FvTrajectory(
        problem=problem,
        grid=grid,
        tau=problem.horizon / n_t,
        n_t=n_t,
        alpha_stab=alpha_stab,
        steps=steps,
        states=states,
        masses=states @ grid.mass_weights(),
        minima=states.min(axis=1),
        maxima=states.max(axis=1),
    )


def reference_solution(
    problem: ProblemSpec,
    reference: ReferenceSettings | None = None,
    *,
    n_times: int = 201,
    settings: RuntimeSettings | None = None,
    use_cache: bool = True,
) -> FvTrajectory:
    """Solve (or reload) the finite-volume reference at the configured resolution."""

    settings = settings or SETTINGS
    reference = reference or ReferenceSettings()
    record_every = aligned_record_every(reference.steps, n_times)
    key = reference_key(problem, reference.cells, reference.steps, reference.alpha_stab, record_every) if use_cache else None
    path = settings.reference_cache_path(key) if key else None

    if path is not None and path.is_file():
        cached = _restore(path, problem)
        if cached is not None:
            record_structured_event(
                settings, "reference.cache", payload={"key": key, "path": str(path)}, status="hit", component="experiment"
            )
            return cached

    grid = build_grid(problem.graph, reference.cells)
    trajectory = solve_fvm(
        problem, grid, reference.steps, reference.alpha_stab, record_every=record_every, settings=settings
    )
    if path is not None:
        _store(path, trajectory)
        record_structured_event(
            settings,
            "reference.cache",
            payload={"key": key, "path": str(path), "cells": reference.cells, "steps": reference.steps},
            status="miss",
            component="experiment",
        )
    return trajectory


__all__ = ["aligned_record_every", "reference_key", "reference_solution"]
