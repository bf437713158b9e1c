"""Training results."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from graphdrift.app.evaluation import ErrorReport, PinnSolution, SteppedPinnSolution
from graphdrift.app.losses import EdgeNetBinding
from graphdrift.app.optim import IterationRecord
from graphdrift.domain.problem import ProblemSpec
from graphdrift.ports.solution import Solution

from .config import Scheme, TrainConfig


@dataclass
class TrainReport:
    scheme: Scheme
    config: TrainConfig
    binding: EdgeNetBinding
    history: list[IterationRecord] = field(default_factory=list)
    phase_iterations: dict[str, int] = field(default_factory=dict)
    reasons: dict[str, str] = field(default_factory=dict)
    wall_time: float = 0.0
    final_loss: float | None = None
    breakdown: dict[str, float] = field(default_factory=dict)
    error: ErrorReport | None = None
    aux: dict[int, np.ndarray] = field(default_factory=dict)
    step_bindings: list[EdgeNetBinding] = field(default_factory=list)

    @property
    def params(self) -> list[np.ndarray]:
        """Final parameter vector of every network."""

        return [net.params for net in self.binding.nets]

    @property
    def relative_error(self) -> float | None:
        return None if self.error is None else self.error.relative

    def solution(self, problem: ProblemSpec) -> Solution:
        if self.scheme is Scheme.DISCRETE:
            return SteppedPinnSolution(self.step_bindings, problem)
        return PinnSolution(self.binding, problem)

    def count(self, phase: str, iterations: int) -> None:
        self.phase_iterations[phase] = self.phase_iterations.get(phase, 0) + iterations

    def to_dict(self) -> dict[str, Any]:
        return {
            "scheme": self.scheme.value,
            "config": self.config.to_dict(),
            "phase_iterations": dict(self.phase_iterations),
            "reasons": dict(self.reasons),
            "wall_time": self.wall_time,
            "final_loss": self.final_loss,
            "breakdown": dict(self.breakdown),
            "error": None if self.error is None else self.error.to_dict(),
            "relative_error": self.relative_error,
            "n_params": int(sum(p.size for p in self.params)),
            "time_steps": len(self.step_bindings) or None,
        }


__all__ = ["TrainReport"]
