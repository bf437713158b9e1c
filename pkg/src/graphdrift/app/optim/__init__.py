"""Minimizers over flat parameter vectors."""

from .adam import AdamResult, AdamState, adam_run, constant_schedule, step_schedule
from .common import IterationCallback, IterationRecord, LossFunction, OptimizerError, PhaseClock
from .lbfgs import (
    FTOL_REACHED,
    GRADIENT_CONVERGED,
    LINE_SEARCH_FAILED,
    MAXFUN_REACHED,
    MAXITER_REACHED,
    NON_FINITE,
    LbfgsConfig,
    LbfgsResult,
    LbfgsState,
    lbfgs_run,
)

__all__ = [
    "AdamResult",
    "AdamState",
    "FTOL_REACHED",
    "GRADIENT_CONVERGED",
    "IterationCallback",
    "IterationRecord",
    "LINE_SEARCH_FAILED",
    "LbfgsConfig",
    "LbfgsResult",
    "LbfgsState",
    "LossFunction",
    "MAXFUN_REACHED",
    "MAXITER_REACHED",
    "NON_FINITE",
    "OptimizerError",
    "PhaseClock",
    "adam_run",
    "constant_schedule",
    "lbfgs_run",
    "step_schedule",
]
