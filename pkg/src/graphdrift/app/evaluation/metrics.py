"""Discrete space-time L2 norms on the graph."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from graphdrift.domain.graph import MetricGraph
from graphdrift.ports.solution import Solution


class ComparisonError(ValueError):
    """Raised when two solutions cannot be compared."""


@dataclass(frozen=True)
class ErrorReport:
    absolute: float
    relative: float | None
    reference_norm: float

    def to_dict(self) -> dict[str, float | None]:
        return {"absolute": self.absolute, "relative": self.relative, "reference_norm": self.reference_norm}


@dataclass(frozen=True, eq=False)
class ComparisonGrid:
    """Equidistant ``n_times x n_points`` grid on every edge including both ends."""

    graph: MetricGraph
    horizon: float
    n_times: int = 201
    n_points: int = 201

    def __post_init__(self) -> None:
        if self.n_times < 2 or self.n_points < 2:
            raise ComparisonError("compare.grid: need at least two points per axis")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_times)

    @property
    def dt(self) -> float:
        return self.horizon / (self.n_times - 1)

    def xs(self, edge_id: int) -> np.ndarray:
        return np.linspace(0.0, self.graph.edge(edge_id).length, self.n_points)

    def dx(self, edge_id: int) -> float:
        return self.graph.edge(edge_id).length / (self.n_points - 1)

    def sample(self, solution: Solution) -> list[np.ndarray]:
        """Values of ``solution`` on every edge, each of shape ``(n_times, n_points)``."""

        return [np.asarray(solution.evaluate(e.edge_id, self.times, self.xs(e.edge_id))) for e in self.graph.edges]

    def norm(self, values: list[np.ndarray]) -> float:
        total = 0.0
        for edge, block in zip(self.graph.edges, values):
            total += self.dx(edge.edge_id) * self.dt * float(np.sum(block * block))
        return float(np.sqrt(total))


def l2_error_values(grid: ComparisonGrid, a: list[np.ndarray], b: list[np.ndarray]) -> ErrorReport:
    if len(a) != len(b):
        raise ComparisonError("compare.edges: solutions cover different edge counts")
    diff = []
    for block_a, block_b in zip(a, b):
        if block_a.shape != block_b.shape:
            raise ComparisonError(f"compare.shape: {block_a.shape} vs {block_b.shape}")
        diff.append(block_a - block_b)
    absolute = grid.norm(diff)
    reference = grid.norm(b)
    relative = absolute / reference if reference > 0.0 else (0.0 if absolute == 0.0 else None)
    return ErrorReport(absolute=absolute, relative=relative, reference_norm=reference)


def l2_error(solution_a: Solution, solution_b: Solution, grid: ComparisonGrid) -> ErrorReport:
    """``||a - b||`` on the grid and its ratio to ``||b||`` (``None`` when ``b`` vanishes and ``a`` does not)."""

    return l2_error_values(grid, grid.sample(solution_a), grid.sample(solution_b))


__all__ = ["ComparisonError", "ComparisonGrid", "ErrorReport", "l2_error", "l2_error_values"]
