"""Port definitions for space-time solution evaluators."""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from graphdrift.domain.graph import MetricGraph


class SolutionEvaluationError(ValueError):
    """Raised when a solution is queried outside its domain."""


class Solution(ABC):
    """A density ``rho_e(t, x)`` defined on every edge of a metric graph."""

    graph: MetricGraph
    horizon: float

    @abstractmethod
    def evaluate(self, edge_id: int, times: np.ndarray, xs: np.ndarray) -> np.ndarray:
        """Return values on the tensor grid ``times x xs`` with shape ``(len(times), len(xs))``."""

    def label(self) -> str:
        """Short human-readable description."""
        return type(self).__name__
