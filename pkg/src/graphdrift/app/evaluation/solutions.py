"""Solution evaluators backed by trained networks or stored grids."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch

from graphdrift.app.losses import EdgeNetBinding, NetworkField
from graphdrift.domain.graph import MetricGraph
from graphdrift.domain.problem import ProblemSpec
from graphdrift.ports.solution import Solution, SolutionEvaluationError

_TIME_SNAP = 1e-9


def _check_times(times: np.ndarray, horizon: float) -> np.ndarray:
    times = np.asarray(times, dtype=np.float64)
    if np.any(times < -_TIME_SNAP * horizon) or np.any(times > horizon * (1.0 + _TIME_SNAP)):
        raise SolutionEvaluationError(f"solution.time_range: times must lie in [0, {horizon}]")
    return times


class PinnSolution(Solution):
    """Space-time networks evaluated directly at ``(t, x)``."""

    def __init__(self, binding: EdgeNetBinding, problem: ProblemSpec) -> None:
        self.binding = binding
        self.graph = problem.graph
        self.horizon = problem.horizon
        self._field = NetworkField.from_binding(binding)

    def evaluate(self, edge_id: int, times: np.ndarray, xs: np.ndarray) -> np.ndarray:
        times = _check_times(times, self.horizon)
        xs = np.asarray(xs, dtype=np.float64)
        tt, xx = np.meshgrid(times, xs, indexing="ij")
        with torch.no_grad():
            values = self._field.value(edge_id, tt.ravel(), xx.ravel()).numpy()
        return values.reshape(tt.shape)

    def label(self) -> str:
        return "pinn-shared" if self.binding.shared else "pinn"


class SteppedPinnSolution(Solution):
    """One network set per time step; ``t in [t_n, t_{n+1})`` uses step ``n`` at ``t_n``.

    Step 0 is the initial data.
    """

    def __init__(self, bindings: Sequence[EdgeNetBinding], problem: ProblemSpec) -> None:
        if not bindings:
            raise SolutionEvaluationError("solution.steps: at least one trained step is required")
        self.bindings = tuple(bindings)
        self.problem = problem
        self.graph = problem.graph
        self.horizon = problem.horizon
        self.n_t = len(self.bindings)
        self.tau = problem.horizon / self.n_t
        self._fields = [NetworkField.from_binding(b) for b in self.bindings]

    def step_index(self, times: np.ndarray) -> np.ndarray:
        times = _check_times(times, self.horizon)
        return np.clip(np.floor(times / self.tau + _TIME_SNAP).astype(np.int64), 0, self.n_t)

    def evaluate(self, edge_id: int, times: np.ndarray, xs: np.ndarray) -> np.ndarray:
        steps = self.step_index(times)
        xs = np.asarray(xs, dtype=np.float64)
        out = np.empty((steps.size, xs.size))
        cache: dict[int, np.ndarray] = {}
        for row, n in enumerate(steps):
            if n not in cache:
                cache[int(n)] = self._profile(edge_id, int(n), xs)
            out[row] = cache[int(n)]
        return out

    def _profile(self, edge_id: int, n: int, xs: np.ndarray) -> np.ndarray:
        if n == 0:
            return np.broadcast_to(self.problem.initial_values(edge_id, xs), xs.shape).copy()
        with torch.no_grad():
            return self._fields[n - 1].value(edge_id, np.full_like(xs, n * self.tau), xs).numpy()

    def label(self) -> str:
        return f"pinn-discrete(n_t={self.n_t})"


@dataclass(frozen=True, eq=False)
class GridSolution(Solution):
    """Values stored on a comparison grid, evaluated by nearest stored sample."""

    graph: MetricGraph
    horizon: float
    times: np.ndarray
    xs: tuple[np.ndarray, ...]
    values: tuple[np.ndarray, ...]

    def evaluate(self, edge_id: int, times: np.ndarray, xs: np.ndarray) -> np.ndarray:
        times = _check_times(times, self.horizon)
        rows = _nearest(self.times, times)
        cols = _nearest(self.xs[edge_id], np.asarray(xs, dtype=np.float64))
        return self.values[edge_id][np.ix_(rows, cols)]


def _nearest(grid: np.ndarray, queries: np.ndarray) -> np.ndarray:
    index = np.clip(np.searchsorted(grid, queries), 1, grid.size - 1)
    left = grid[index - 1]
    right = grid[index]
    return np.where(np.abs(queries - left) <= np.abs(right - queries), index - 1, index)


__all__ = ["GridSolution", "PinnSolution", "SteppedPinnSolution"]
