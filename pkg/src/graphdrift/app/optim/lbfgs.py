"""Limited-memory BFGS with a strong-Wolfe line search."""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import line_search

from .common import IterationCallback, IterationRecord, LossFunction, OptimizerError, PhaseClock, safe_evaluate

GRADIENT_CONVERGED = "gradient converged"
FTOL_REACHED = "ftol"
MAXITER_REACHED = "maxiter"
MAXFUN_REACHED = "maxfun"
LINE_SEARCH_FAILED = "line search failed"
NON_FINITE = "non-finite"


@dataclass(frozen=True)
class LbfgsConfig:
    maxiter: int = 50000
    maxfun: int = 500000
    maxcor: int = 50
    maxls: int = 50
    ftol: float = float(np.finfo(float).eps)
    gtol: float = 1e-10
    c1: float = 1e-4
    c2: float = 0.9

    def __post_init__(self) -> None:
        if self.maxiter < 0 or self.maxfun < 1 or self.maxcor < 1 or self.maxls < 1:
            raise OptimizerError("optim.lbfgs_config: iteration caps must be positive")
        if not 0.0 < self.c1 < self.c2 < 1.0:
            raise OptimizerError(f"optim.lbfgs_config: need 0 < c1 < c2 < 1, got c1={self.c1}, c2={self.c2}")
        if self.ftol < 0.0 or self.gtol < 0.0:
            raise OptimizerError("optim.lbfgs_config: tolerances must be nonnegative")


@dataclass
class LbfgsState:
    """Curvature pairs and evaluation counters.

    ``nfev`` and ``njev`` count value and gradient requests of the line search;
    ``evaluations`` counts actual loss evaluations, which ``maxfun`` caps.
    """

    maxcor: int
    s: deque = field(default_factory=deque)
    y: deque = field(default_factory=deque)
    iterations: int = 0
    nfev: int = 0
    njev: int = 0
    evaluations: int = 0

    def __post_init__(self) -> None:
        self.s = deque(maxlen=self.maxcor)
        self.y = deque(maxlen=self.maxcor)

    def store(self, s: np.ndarray, y: np.ndarray) -> bool:
        """Keep the pair only when the curvature condition ``s.y > 0`` holds."""

        if float(s @ y) <= 0.0:
            return False
        self.s.append(s)
        self.y.append(y)
        return True

    def reset(self) -> None:
        self.s.clear()
        self.y.clear()

    def direction(self, grad: np.ndarray) -> np.ndarray:
        """Two-loop recursion for ``-H grad``."""

        q = grad.copy()
        alphas: list[float] = []
        rhos = [1.0 / float(s @ y) for s, y in zip(self.s, self.y)]
        for s, y, rho in zip(reversed(self.s), reversed(self.y), reversed(rhos)):
            alpha = rho * float(s @ q)
            alphas.append(alpha)
            q -= alpha * y
        if self.s:
            s_last, y_last = self.s[-1], self.y[-1]
            q *= float(s_last @ y_last) / float(y_last @ y_last)
        for (s, y, rho), alpha in zip(zip(self.s, self.y, rhos), reversed(alphas)):
            beta = rho * float(y @ q)
            q += (alpha - beta) * s
        return -q


@dataclass
class LbfgsResult:
    theta: np.ndarray
    loss: float
    grad_norm: float
    reason: str
    iterations: int = 0
    nfev: int = 0
    njev: int = 0
    evaluations: int = 0
    history: list[float] = field(default_factory=list)
    records: list[IterationRecord] = field(default_factory=list)


class _CachedObjective:
    """Splits a value-and-gradient function into the two callables the line search expects."""

    def __init__(self, loss_fn: LossFunction, state: LbfgsState) -> None:
        self._loss_fn = loss_fn
        self._state = state
        self._cache: dict[bytes, tuple[float, np.ndarray]] = {}

    def evaluate(self, theta: np.ndarray) -> tuple[float, np.ndarray] | None:
        key = theta.tobytes()
        if key in self._cache:
            return self._cache[key]
        evaluation = safe_evaluate(self._loss_fn, theta)
        self._state.evaluations += 1
        if evaluation is None:
            return None
        if len(self._cache) > 8:
            self._cache.clear()
        self._cache[key] = evaluation
        return evaluation

    def value(self, theta: np.ndarray) -> float:
        self._state.nfev += 1
        evaluation = self.evaluate(theta)
        return np.inf if evaluation is None else evaluation[0]

    def gradient(self, theta: np.ndarray) -> np.ndarray:
        self._state.njev += 1
        evaluation = self.evaluate(theta)
        return np.full_like(theta, np.nan) if evaluation is None else evaluation[1]


def lbfgs_run(
    loss_fn: LossFunction,
    theta0: np.ndarray,
    config: LbfgsConfig | None = None,
    *,
    callback: IterationCallback | None = None,
    clock: PhaseClock | None = None,
    phase: str = "lbfgs",
) -> LbfgsResult:
    """Minimize until the gradient, relative-decrease or budget criteria stop the run."""

    config = config or LbfgsConfig()
    clock = clock or PhaseClock()
    state = LbfgsState(maxcor=config.maxcor)
    objective = _CachedObjective(loss_fn, state)
    theta = np.array(theta0, dtype=np.float64)

    evaluation = objective.evaluate(theta)
    if evaluation is None:
        return LbfgsResult(theta, float("nan"), float("nan"), NON_FINITE, nfev=state.nfev, njev=state.njev)
    value, grad = evaluation
    result = LbfgsResult(theta, value, _norm(grad), MAXITER_REACHED)

    def finish(reason: str) -> LbfgsResult:
        result.theta, result.loss, result.grad_norm, result.reason = theta, value, _norm(grad), reason
        result.iterations, result.nfev, result.njev = state.iterations, state.nfev, state.njev
        result.evaluations = state.evaluations
        return result

    if _sup(grad) <= config.gtol:
        return finish(GRADIENT_CONVERGED)

    while state.iterations < config.maxiter:
        direction = state.direction(grad)
        if float(grad @ direction) >= 0.0:
            state.reset()
            direction = -grad
        if not state.s:
            # first trial step of length min(1, 1/|g|_1) along steepest descent
            direction = direction * min(1.0, 1.0 / float(np.abs(grad).sum()))

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            alpha, *_ = line_search(
                objective.value,
                objective.gradient,
                theta,
                direction,
                gfk=grad,
                old_fval=value,
                c1=config.c1,
                c2=config.c2,
                maxiter=config.maxls,
            )
        if alpha is None:
            return finish(LINE_SEARCH_FAILED)

        theta_new = theta + alpha * direction
        evaluation = objective.evaluate(theta_new)
        if evaluation is None:
            return finish(NON_FINITE)
        value_new, grad_new = evaluation
        state.store(theta_new - theta, grad_new - grad)
        state.iterations += 1
        decrease = value - value_new
        theta, value, grad = theta_new, value_new, grad_new

        record = IterationRecord(state.iterations, phase, value, _norm(grad), clock.elapsed())
        result.history.append(value)
        result.records.append(record)
        if callback is not None:
            callback(record)

        if _sup(grad) <= config.gtol:
            return finish(GRADIENT_CONVERGED)
        if decrease <= config.ftol * max(abs(value + decrease), abs(value), 1.0):
            return finish(FTOL_REACHED)
        if state.evaluations >= config.maxfun:
            return finish(MAXFUN_REACHED)
    return finish(MAXITER_REACHED)


def _norm(grad: np.ndarray) -> float:
    return float(np.linalg.norm(grad))


def _sup(grad: np.ndarray) -> float:
    """Largest gradient component, the quantity gtol bounds."""

    return float(np.max(np.abs(grad))) if grad.size else 0.0


__all__ = [
    "FTOL_REACHED",
    "GRADIENT_CONVERGED",
    "LINE_SEARCH_FAILED",
    "LbfgsConfig",
    "LbfgsResult",
    "LbfgsState",
    "MAXFUN_REACHED",
    "MAXITER_REACHED",
    "NON_FINITE",
    "lbfgs_run",
]
