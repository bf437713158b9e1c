"""Full-batch ADAM over a flat parameter vector."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .common import IterationCallback, IterationRecord, LossFunction, OptimizerError, PhaseClock, safe_evaluate

LearningRate = float | Callable[[int], float]


@dataclass
class AdamState:
    step: int
    m: np.ndarray
    v: np.ndarray
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, size: int, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        return cls(step=0, m=np.zeros(size), v=np.zeros(size), beta1=beta1, beta2=beta2, eps=eps)

    def update(self, theta: np.ndarray, grad: np.ndarray, learning_rate: float) -> np.ndarray:
        """One bias-corrected ADAM step; returns the new parameters."""

        if self.m.shape != theta.shape:
            raise OptimizerError(f"optim.adam_state: moments sized {self.m.shape}, parameters {theta.shape}")
        self.step += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * (grad * grad)
        m_hat = self.m / (1.0 - self.beta1**self.step)
        v_hat = self.v / (1.0 - self.beta2**self.step)
        return theta - learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class AdamResult:
    theta: np.ndarray
    history: list[float] = field(default_factory=list)
    records: list[IterationRecord] = field(default_factory=list)
    iterations: int = 0
    reason: str = "max steps"
    state: AdamState | None = None

    @property
    def final_loss(self) -> float | None:
        return self.history[-1] if self.history else None


def constant_schedule(learning_rate: float) -> Callable[[int], float]:
    return lambda _step: learning_rate


def step_schedule(n_steps: int, rates: tuple[float, ...] = (1e-2, 1e-3, 1e-4)) -> Callable[[int], float]:
    """Piecewise-constant rate, switching to the next value after each equal share of the budget."""

    if not rates:
        raise OptimizerError("optim.schedule: at least one rate is required")
    share = max(1, -(-n_steps // len(rates)))

    def rate(step: int) -> float:
        return rates[min(step // share, len(rates) - 1)]

    return rate


def adam_run(
    loss_fn: LossFunction,
    theta0: np.ndarray,
    learning_rate: LearningRate,
    n_steps: int,
    *,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    callback: IterationCallback | None = None,
    clock: PhaseClock | None = None,
    phase: str = "adam",
) -> AdamResult:
    """Run ``n_steps`` ADAM updates; stops early keeping the last finite iterate."""

    if n_steps < 0:
        raise OptimizerError(f"optim.adam_steps: must be nonnegative, got {n_steps}")
    schedule = learning_rate if callable(learning_rate) else constant_schedule(float(learning_rate))
    clock = clock or PhaseClock()
    theta = np.array(theta0, dtype=np.float64)
    state = AdamState.zeros(theta.size, beta1, beta2, eps)
    result = AdamResult(theta=theta, state=state)
    last_good = theta
    for step in range(n_steps):
        evaluation = safe_evaluate(loss_fn, theta)
        if evaluation is None:
            result.theta = last_good
            result.reason = "non-finite"
            break
        last_good = theta
        value, grad = evaluation
        record = IterationRecord(step, phase, value, float(np.linalg.norm(grad)), clock.elapsed())
        result.history.append(value)
        result.records.append(record)
        if callback is not None:
            callback(record)
        theta = state.update(theta, grad, schedule(step))
        result.theta = theta
        result.iterations = step + 1
    return result


__all__ = ["AdamResult", "AdamState", "LearningRate", "adam_run", "constant_schedule", "step_schedule"]
