"""Comparison grids, error norms and solution evaluators."""

from .metrics import ComparisonError, ComparisonGrid, ErrorReport, l2_error, l2_error_values
from .solutions import GridSolution, PinnSolution, SteppedPinnSolution

__all__ = [
    "ComparisonError",
    "ComparisonGrid",
    "ErrorReport",
    "GridSolution",
    "PinnSolution",
    "SteppedPinnSolution",
    "l2_error",
    "l2_error_values",
]
