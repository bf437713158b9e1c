"""Finite-volume reference solver."""

from .grid import FvGrid, GridError, build_grid
from .scheme import (
    FvSolveError,
    FvState,
    FvSystem,
    assemble_system,
    lax_friedrichs_flux,
    project_initial,
    step,
)
from .solver import BoundPreservationWarning, FvTrajectory, bound_hypothesis_violations, solve_fvm

__all__ = [
    "BoundPreservationWarning",
    "FvGrid",
    "FvSolveError",
    "FvState",
    "FvSystem",
    "FvTrajectory",
    "GridError",
    "assemble_system",
    "bound_hypothesis_violations",
    "build_grid",
    "lax_friedrichs_flux",
    "project_initial",
    "solve_fvm",
    "step",
]
