"""Time integration of the finite-volume scheme and trajectory evaluation."""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from graphdrift.domain.problem import ProblemSpec
from graphdrift.ports.solution import Solution, SolutionEvaluationError
from graphdrift.settings import RuntimeSettings
from graphdrift.utils.telemetry import record_structured_event

from .grid import FvGrid
from .scheme import FvState, assemble_system, project_initial, step

_TIME_SNAP = 1e-9


class BoundPreservationWarning(UserWarning):
    """Emitted when the run parameters do not guarantee densities in [0, 1]."""


@dataclass(frozen=True, eq=False)
class FvTrajectory(Solution):
    """Stored states of a finite-volume run with piecewise-constant reconstruction.

    ``states[i]`` is the solution at step ``steps[i]``; between stored steps the
    latest stored state is used.
    """

    problem: ProblemSpec
    grid: FvGrid
    tau: float
    n_t: int
    alpha_stab: float
    steps: np.ndarray
    states: np.ndarray
    masses: np.ndarray
    minima: np.ndarray
    maxima: np.ndarray

    @property
    def graph(self):  # type: ignore[override]
        return self.grid.graph

    @property
    def horizon(self) -> float:  # type: ignore[override]
        return self.problem.horizon

    @property
    def times(self) -> np.ndarray:
        return self.steps * self.tau

    def __len__(self) -> int:
        return int(self.steps.size)

    def state(self, index: int) -> FvState:
        return FvState(time=float(self.steps[index] * self.tau), values=self.states[index])

    def __iter__(self) -> Iterator[FvState]:
        for index in range(len(self)):
            yield self.state(index)

    def step_index(self, times: np.ndarray) -> np.ndarray:
        """Time step ``n`` with ``t in [t_n, t_{n+1})``; ``T`` maps to ``n_t``."""

        times = np.asarray(times, dtype=np.float64)
        if np.any(times < -_TIME_SNAP * self.tau) or np.any(times > self.horizon + _TIME_SNAP * self.tau):
            raise SolutionEvaluationError(f"fvm.time_range: times must lie in [0, {self.horizon}]")
        return np.clip(np.floor(times / self.tau + _TIME_SNAP).astype(np.int64), 0, self.n_t)

    def stored_index(self, times: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.steps, self.step_index(times), side="right") - 1

    def state_at(self, t: float) -> FvState:
        return self.state(int(self.stored_index(np.array([t]))[0]))

    def evaluate(self, edge_id: int, times: np.ndarray, xs: np.ndarray) -> np.ndarray:
        rows = self.stored_index(times)
        cells = self.grid.cell_of(edge_id, xs)
        profiles = self.states[:, self.grid.edge_columns(edge_id)]
        return profiles[np.ix_(rows, cells)]

    def mass_drift(self) -> float:
        """Largest relative deviation of the mass from its initial value."""

        reference = abs(self.masses[0])
        scale = reference if reference > 0.0 else 1.0
        return float(np.max(np.abs(self.masses - self.masses[0])) / scale)

    def diagnostics(self) -> dict[str, float]:
        return {
            "min": float(self.minima.min()),
            "max": float(self.maxima.max()),
            "mass_initial": float(self.masses[0]),
            "mass_final": float(self.masses[-1]),
            "mass_drift": self.mass_drift(),
        }

    def label(self) -> str:
        return f"fvm(n_e={max(self.grid.cells)}, n_t={self.n_t})"


def bound_hypothesis_violations(problem: ProblemSpec, grid: FvGrid, tau: float, alpha_stab: float) -> list[str]:
    """Reasons why densities in [0, 1] are not guaranteed for these parameters."""

    reasons: list[str] = []
    if tau > grid.min_spacing:
        reasons.append(f"tau={tau:.6g} exceeds the smallest mesh size {grid.min_spacing:.6g}")
    if not math.isclose(alpha_stab, 1.0):
        reasons.append(f"alpha_stab={alpha_stab:g} differs from 1")
    if not problem.mobility.preserves_bounds:
        reasons.append(f"mobility '{problem.mobility.name}' is not rho(1-rho)")
    return reasons


def solve_fvm(
    problem: ProblemSpec,
    grid: FvGrid,
    n_t: int,
    alpha_stab: float = 1.0,
    *,
    record_every: int = 1,
    settings: RuntimeSettings | None = None,
) -> FvTrajectory:
    """Integrate from the projected initial data to the horizon in ``n_t`` equal steps.

    States at steps divisible by ``record_every`` and the final state are kept.
    """

    if n_t < 1:
        raise ValueError(f"fvm.steps: n_t must be positive, got {n_t}")
    if record_every < 1:
        raise ValueError(f"fvm.record_every: must be positive, got {record_every}")
    if alpha_stab <= 0.0:
        raise ValueError(f"fvm.alpha_stab: must be positive, got {alpha_stab}")
    if settings is None:
        from graphdrift.settings import SETTINGS

        settings = SETTINGS

    tau = problem.horizon / n_t
    violations = bound_hypothesis_violations(problem, grid, tau, alpha_stab)
    if violations:
        message = "bound preservation not guaranteed: " + "; ".join(violations)
        warnings.warn(message, BoundPreservationWarning, stacklevel=2)
        record_structured_event(
            settings,
            "fvm.hypothesis",
            payload={"reasons": violations, "tau": tau, "min_h": grid.min_spacing},
            level="warn",
            component="fvm",
        )

    started = time.perf_counter()
    system = assemble_system(grid, problem.epsilon, tau)
    weights = grid.mass_weights()
    state = project_initial(problem, grid)

    stored_steps = [0]
    stored_states = [state.values]
    for n in range(1, n_t + 1):
        state = step(state, system, problem, grid, alpha_stab)
        # avoid drift of the accumulated time
        state = FvState(time=n * tau, values=state.values)
        if n % record_every == 0 or n == n_t:
            stored_steps.append(n)
            stored_states.append(state.values)

    states = np.vstack(stored_states)
    trajectory = FvTrajectory(
        problem=problem,
        grid=grid,
        tau=tau,
        n_t=n_t,
        alpha_stab=alpha_stab,
        steps=np.asarray(stored_steps, dtype=np.int64),
        states=states,
        masses=states @ weights,
        minima=states.min(axis=1),
        maxima=states.max(axis=1),
    )
    duration_ms = (time.perf_counter() - started) * 1000.0
    record_structured_event(
        settings,
        "fvm.solve",
        payload={
            "cells": list(grid.cells),
            "n_t": n_t,
            "alpha_stab": alpha_stab,
            "stored": len(trajectory),
            **trajectory.diagnostics(),
        },
        component="fvm",
        duration_ms=duration_ms,
    )
    return trajectory


__all__ = ["BoundPreservationWarning", "FvTrajectory", "bound_hypothesis_violations", "solve_fvm"]
