"""Shared optimizer types."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from graphdrift.app.nn import NonFiniteLossError

LossFunction = Callable[[np.ndarray], tuple[float, np.ndarray]]


class OptimizerError(ValueError):
    """Raised for invalid optimizer settings."""


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    phase: str
    loss: float
    grad_norm: float
    wall_clock: float

    def to_dict(self) -> dict[str, object]:
        return asdict(self)


IterationCallback = Callable[[IterationRecord], None]


@dataclass
class PhaseClock:
    """Wall-clock offset shared by consecutive phases of one run."""

    started: float = field(default_factory=time.perf_counter)

    def elapsed(self) -> float:
        return time.perf_counter() - self.started


def safe_evaluate(loss_fn: LossFunction, theta: np.ndarray) -> tuple[float, np.ndarray] | None:
    """Evaluate the loss, returning ``None`` when the value or gradient is not finite."""

    try:
        value, grad = loss_fn(theta)
    except NonFiniteLossError:
        return None
    grad = np.asarray(grad, dtype=np.float64)
    if not np.isfinite(value) or not np.all(np.isfinite(grad)):
        return None
    return float(value), grad


__all__ = [
    "IterationCallback",
    "IterationRecord",
    "LossFunction",
    "OptimizerError",
    "PhaseClock",
    "safe_evaluate",
]
