"""Fully discrete finite-volume scheme: implicit diffusion, explicit Lax-Friedrichs convection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from numpy.polynomial.legendre import leggauss
from scipy.sparse.linalg import splu

from graphdrift.domain.problem import Mobility, ProblemSpec

from .grid import FvGrid

RESIDUAL_TOLERANCE = 1e-12

_GAUSS_POINTS, _GAUSS_WEIGHTS = leggauss(3)


class FvSolveError(RuntimeError):
    """Raised when the linear system is not an M-matrix or cannot be solved accurately."""


@dataclass(frozen=True, eq=False)
class FvState:
    """Cell averages in unknown order (see :class:`FvGrid`) at time ``time``."""

    time: float
    values: np.ndarray

    def interior(self, grid: FvGrid, edge_id: int) -> np.ndarray:
        return self.values[grid.interior_slice(edge_id)]

    def vertex(self, grid: FvGrid, vertex_id: int) -> float:
        return float(self.values[grid.vertex_index(vertex_id)])

    def edge_profile(self, grid: FvGrid, edge_id: int) -> np.ndarray:
        """Values of cells ``0..n_e`` with vertex patches at both ends."""

        return self.values[grid.edge_columns(edge_id)]

    def mass(self, grid: FvGrid) -> float:
        return float(grid.mass_weights() @ self.values)


@dataclass(frozen=True, eq=False)
class FvSystem:
    """Factorized ``M + tau * eps * A`` for a fixed grid and time step."""

    grid: FvGrid
    epsilon: float
    tau: float
    matrix: sp.csc_matrix
    factor: object

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        solution = self.factor.solve(rhs)
        residual = _relative_residual(self.matrix, solution, rhs)
        if residual > RESIDUAL_TOLERANCE:
            # one step of iterative refinement
            solution = solution + self.factor.solve(rhs - self.matrix @ solution)
            residual = _relative_residual(self.matrix, solution, rhs)
        if not np.all(np.isfinite(solution)) or residual > RESIDUAL_TOLERANCE:
            raise FvSolveError(f"fvm.linear_solve: relative residual {residual:.3e} exceeds {RESIDUAL_TOLERANCE:g}")
        return solution


def _relative_residual(matrix: sp.spmatrix, solution: np.ndarray, rhs: np.ndarray) -> float:
    scale = float(np.linalg.norm(rhs))
    residual = float(np.linalg.norm(matrix @ solution - rhs))
    return residual / scale if scale > 0.0 else residual


def cell_averages(problem: ProblemSpec, grid: FvGrid, edge_id: int) -> np.ndarray:
    """Three-point Gauss averages of the initial data over cells ``0..n_e``."""

    nodes = grid.nodes(edge_id)
    centers = 0.5 * (nodes[:-1] + nodes[1:])
    half = 0.5 * grid.spacing[edge_id]
    points = centers[:, None] + half * _GAUSS_POINTS[None, :]
    values = problem.initial_values(edge_id, points)
    return 0.5 * (values * _GAUSS_WEIGHTS[None, :]).sum(axis=1)


def project_initial(problem: ProblemSpec, grid: FvGrid) -> FvState:
    """L2 projection of the initial density onto piecewise constants."""

    values = np.zeros(grid.n_unknowns)
    patch_integral = np.zeros(grid.graph.n_vertices)
    for edge in grid.graph.edges:
        averages = cell_averages(problem, grid, edge.edge_id)
        values[grid.interior_slice(edge.edge_id)] = averages[1:-1]
        h = grid.spacing[edge.edge_id]
        patch_integral[edge.origin] += h * averages[0]
        patch_integral[edge.terminal] += h * averages[-1]
    values[grid.n_interior :] = patch_integral / np.asarray(grid.patch_measure)
    return FvState(time=0.0, values=values)


def lax_friedrichs_flux(rho_left, rho_right, drift, alpha_stab: float, mobility: Mobility | None = None):
    """``(f(rho_l) + f(rho_r)) d / 2 - alpha_stab (rho_r - rho_l) / 2``, broadcasting over arrays."""

    mobility = mobility or Mobility()
    rho_left = np.asarray(rho_left, dtype=np.float64)
    rho_right = np.asarray(rho_right, dtype=np.float64)
    flux = 0.5 * (mobility.value(rho_left) + mobility.value(rho_right)) * drift - 0.5 * alpha_stab * (rho_right - rho_left)
    return float(flux) if np.ndim(flux) == 0 else flux


def assemble_system(grid: FvGrid, epsilon: float, tau: float) -> FvSystem:
    """Assemble and factorize the time-independent implicit diffusion matrix."""

    if tau <= 0.0:
        raise FvSolveError(f"fvm.tau: time step must be positive, got {tau}")
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    data: list[np.ndarray] = []
    diagonal = grid.mass_weights().copy()

    def couple(i: np.ndarray, j: np.ndarray, weight: np.ndarray) -> None:
        # symmetric diffusive coupling between unknowns i and j
        rows.extend((i, j))
        cols.extend((j, i))
        data.extend((-weight, -weight))
        np.add.at(diagonal, i, weight)
        np.add.at(diagonal, j, weight)

    for edge in grid.graph.edges:
        columns = grid.edge_columns(edge.edge_id)
        weight = np.full(columns.size - 1, tau * epsilon / grid.spacing[edge.edge_id])
        couple(columns[:-1], columns[1:], weight)

    n = grid.n_unknowns
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    data.append(diagonal)
    matrix = sp.coo_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)).tocsc()
    matrix.sum_duplicates()
    matrix.eliminate_zeros()
    check_m_matrix(matrix)
    return FvSystem(grid=grid, epsilon=epsilon, tau=tau, matrix=matrix, factor=splu(matrix))


def check_m_matrix(matrix: sp.spmatrix) -> None:
    """Positive diagonal, nonpositive off-diagonals, strict row diagonal dominance."""

    diagonal = matrix.diagonal()
    off = (matrix - sp.diags(diagonal)).tocsr()
    off.eliminate_zeros()
    if np.any(diagonal <= 0.0):
        row = int(np.argmin(diagonal))
        raise FvSolveError(f"fvm.m_matrix: nonpositive diagonal {diagonal[row]:.3e} in row {row}")
    if off.nnz and off.data.max() > 0.0:
        raise FvSolveError(f"fvm.m_matrix: positive off-diagonal entry {off.data.max():.3e}")
    off_sum = np.asarray(abs(off).sum(axis=1)).ravel()
    margin = diagonal - off_sum
    if np.any(margin <= 0.0):
        row = int(np.argmin(margin))
        raise FvSolveError(
            f"fvm.m_matrix: row {row} not strictly diagonally dominant (diag={diagonal[row]:.3e}, off={off_sum[row]:.3e})"
        )


def edge_fluxes(state: FvState, problem: ProblemSpec, grid: FvGrid, edge_id: int, alpha_stab: float) -> np.ndarray:
    """Numerical fluxes ``F_{k+1/2}`` at interfaces ``k = 0..n_e-1`` at the state's time."""

    profile = state.edge_profile(grid, edge_id)
    drift = problem.drift(edge_id, state.time, grid.faces(edge_id))
    return lax_friedrichs_flux(profile[:-1], profile[1:], drift, alpha_stab, problem.mobility)


def explicit_rhs(state: FvState, problem: ProblemSpec, grid: FvGrid, tau: float, alpha_stab: float) -> np.ndarray:
    """``M rho^{n-1} + F(rho^{n-1})`` including vertex influx and outflux."""

    rhs = grid.mass_weights() * state.values
    graph = grid.graph
    for edge in graph.edges:
        flux = edge_fluxes(state, problem, grid, edge.edge_id, alpha_stab)
        rhs[grid.interior_slice(edge.edge_id)] += tau * (flux[:-1] - flux[1:])
        # outgoing edges drain the origin patch, incoming edges feed the terminal patch
        rhs[grid.vertex_index(edge.origin)] -= tau * flux[0]
        rhs[grid.vertex_index(edge.terminal)] += tau * flux[-1]
    for vertex_id in graph.exterior_vertices:
        rho_v = state.vertex(grid, vertex_id)
        alpha = float(problem.inflow(vertex_id, state.time))
        beta = float(problem.outflow(vertex_id, state.time))
        rhs[grid.vertex_index(vertex_id)] += tau * alpha * (1.0 - rho_v) - tau * beta * rho_v
    return rhs


def step(state: FvState, system: FvSystem, problem: ProblemSpec, grid: FvGrid, alpha_stab: float = 1.0) -> FvState:
    """Advance one time step of size ``system.tau``."""

    rhs = explicit_rhs(state, problem, grid, system.tau, alpha_stab)
    values = system.solve(rhs)
    return FvState(time=state.time + system.tau, values=values)


__all__ = [
    "FvSolveError",
    "FvState",
    "FvSystem",
    "RESIDUAL_TOLERANCE",
    "assemble_system",
    "cell_averages",
    "check_m_matrix",
    "edge_fluxes",
    "explicit_rhs",
    "lax_friedrichs_flux",
    "project_initial",
    "step",
]
