"""Misfit terms for the continuous and time-discrete training schemes.

Every term returns a 0-d float64 tensor that stays differentiable with respect
to the parameters of the fields involved.
"""

from __future__ import annotations

from enum import Enum

import numpy as np
import torch

from graphdrift.app.nn import DTYPE
from graphdrift.domain.graph import GraphError, MetricGraph
from graphdrift.domain.problem import ProblemSpec

from .binding import LossError, NetworkField


class ContinuityVariant(str, Enum):
    AUX = "aux"
    AVG_PRINTED = "avg-printed"
    AVG_SQUARED = "avg-squared-inside"


def _array(values) -> np.ndarray:
    return np.atleast_1d(np.asarray(values, dtype=np.float64))


def _as_tensor(values: np.ndarray) -> torch.Tensor:
    return torch.as_tensor(np.array(values, dtype=np.float64), dtype=DTYPE)


def _require_kind(graph: MetricGraph, vertex_id: int, interior: bool) -> None:
    if graph.is_interior(vertex_id) != interior:
        kind = "interior" if interior else "exterior"
        name = graph.vertex(vertex_id).name
        raise LossError(f"loss.vertex_kind: vertex {name!r} is not an {kind} vertex")


def pde_residual(field: NetworkField, edge_id: int, t, x, problem: ProblemSpec) -> torch.Tensor:
    """Pointwise ``d_t rho - eps rho_xx + f'(rho) rho_x d + f(rho) d_x``."""

    t, x = np.broadcast_arrays(_array(t), _array(x))
    jet = field.jet(edge_id, t, x)
    drift = _as_tensor(np.broadcast_to(problem.drift(edge_id, t, x), t.shape))
    drift_dx = _as_tensor(np.broadcast_to(problem.drift_dx(edge_id, t, x), t.shape))
    mobility = problem.mobility
    return (
        jet.dt
        - problem.epsilon * jet.dxx
        + mobility.derivative(jet.value) * jet.dx * drift
        + mobility.value(jet.value) * drift_dx
    )


def residual_misfit(field: NetworkField, edge_id: int, t, x, problem: ProblemSpec) -> torch.Tensor:
    residual = pde_residual(field, edge_id, t, x, problem)
    return torch.mean(residual * residual)


def _vertex_coordinate(graph: MetricGraph, edge_id: int, vertex_id: int) -> float:
    try:
        return graph.edge(edge_id).endpoint_coordinate(vertex_id)
    except GraphError as exc:
        raise LossError(f"loss.not_incident: vertex {vertex_id} is not an endpoint of edge {edge_id}") from exc


def vertex_trace(field: NetworkField, edge_id: int, times, vertex_id: int, problem: ProblemSpec) -> torch.Tensor:
    times = _array(times)
    x_v = _vertex_coordinate(problem.graph, edge_id, vertex_id)
    return field.value(edge_id, times, np.full_like(times, x_v))


def vertex_flux(field: NetworkField, edge_id: int, times, vertex_id: int, problem: ProblemSpec) -> torch.Tensor:
    """``J = -eps rho_x + f(rho) d`` at the vertex end of the edge, in edge coordinates."""

    times = _array(times)
    x_v = _vertex_coordinate(problem.graph, edge_id, vertex_id)
    xs = np.full_like(times, x_v)
    jet = field.jet(edge_id, times, xs)
    drift = _as_tensor(np.broadcast_to(problem.drift(edge_id, times, xs), times.shape))
    return -problem.epsilon * jet.dx + problem.mobility.value(jet.value) * drift


def signed_flux_sum(field: NetworkField, vertex_id: int, times, problem: ProblemSpec) -> torch.Tensor:
    graph = problem.graph
    total = torch.zeros(_array(times).shape, dtype=DTYPE)
    for edge_id in graph.incident_edges(vertex_id):
        total = total + graph.normal(edge_id, vertex_id) * vertex_flux(field, edge_id, times, vertex_id, problem)
    return total


def kirchhoff_misfit(field: NetworkField, vertex_id: int, times, problem: ProblemSpec) -> torch.Tensor:
    _require_kind(problem.graph, vertex_id, interior=True)
    total = signed_flux_sum(field, vertex_id, times, problem)
    return torch.mean(total * total)


def _traces(field: NetworkField, vertex_id: int, times, problem: ProblemSpec) -> torch.Tensor:
    """Stacked traces, shape ``(|E_v|, n_b)``."""

    return torch.stack(
        [vertex_trace(field, e, times, vertex_id, problem) for e in problem.graph.incident_edges(vertex_id)]
    )


def continuity_misfit_aux(
    field: NetworkField, vertex_id: int, times, aux: torch.Tensor, problem: ProblemSpec
) -> torch.Tensor:
    _require_kind(problem.graph, vertex_id, interior=True)
    times = _array(times)
    if aux.shape != (times.size,):
        raise LossError(f"loss.aux_size: expected {times.size} auxiliary values, got {tuple(aux.shape)}")
    deviations = _traces(field, vertex_id, times, problem) - aux.unsqueeze(0)
    return torch.sum(deviations * deviations) / times.size


def continuity_misfit_avg(
    field: NetworkField,
    vertex_id: int,
    times,
    problem: ProblemSpec,
    variant: ContinuityVariant | str = ContinuityVariant.AVG_SQUARED,
) -> torch.Tensor:
    """Deviation of each incident trace from the vertex average.

    ``avg-printed`` sums the deviations before squaring, which cancels
    identically; ``avg-squared-inside`` squares each deviation.
    """

    _require_kind(problem.graph, vertex_id, interior=True)
    variant = ContinuityVariant(variant)
    traces = _traces(field, vertex_id, times, problem)
    deviations = traces - traces.mean(dim=0, keepdim=True)
    if variant is ContinuityVariant.AVG_PRINTED:
        summed = deviations.sum(dim=0)
        return torch.mean(summed * summed)
    if variant is ContinuityVariant.AVG_SQUARED:
        return torch.mean((deviations * deviations).sum(dim=0))
    raise LossError("loss.continuity_variant: the auxiliary variant needs trainable vertex values")


def dirichlet_misfit(field: NetworkField, vertex_id: int, times, problem: ProblemSpec) -> torch.Tensor:
    """Flux balance ``sum J n + alpha (1 - rho) - beta rho`` at an exterior vertex.

    With several incident edges the density is the mean of their traces.
    """

    _require_kind(problem.graph, vertex_id, interior=False)
    times = _array(times)
    rho = _traces(field, vertex_id, times, problem).mean(dim=0)
    alpha = _as_tensor(np.broadcast_to(problem.inflow(vertex_id, times), times.shape))
    beta = _as_tensor(np.broadcast_to(problem.outflow(vertex_id, times), times.shape))
    balance = signed_flux_sum(field, vertex_id, times, problem) + alpha * (1.0 - rho) - beta * rho
    return torch.mean(balance * balance)


def initial_misfit(field: NetworkField, edge_id: int, xs, problem: ProblemSpec) -> torch.Tensor:
    xs = _array(xs)
    predicted = field.value(edge_id, np.zeros_like(xs), xs)
    target = _as_tensor(np.broadcast_to(problem.initial_values(edge_id, xs), xs.shape))
    diff = predicted - target
    return torch.mean(diff * diff)


def discrete_residual_misfit(
    field: NetworkField,
    previous: NetworkField | None,
    edge_id: int,
    xs,
    t_n: float,
    tau: float,
    problem: ProblemSpec,
) -> torch.Tensor:
    """Implicit Euler residual of the step network at ``t_n``.

    ``previous`` is the network of step ``n-1`` evaluated at ``t_n - tau`` and
    treated as a constant; ``None`` means the initial data.
    """

    if tau <= 0.0:
        raise LossError(f"loss.tau: time step must be positive, got {tau}")
    xs = _array(xs)
    times = np.full_like(xs, t_n)
    jet = field.jet(edge_id, times, xs)
    if previous is None:
        before = _as_tensor(np.broadcast_to(problem.initial_values(edge_id, xs), xs.shape))
    else:
        before = previous.value(edge_id, np.full_like(xs, t_n - tau), xs).detach()
    drift = _as_tensor(np.broadcast_to(problem.drift(edge_id, times, xs), xs.shape))
    drift_dx = _as_tensor(np.broadcast_to(problem.drift_dx(edge_id, times, xs), xs.shape))
    mobility = problem.mobility
    residual = (
        (jet.value - before) / tau
        - problem.epsilon * jet.dxx
        + mobility.derivative(jet.value) * jet.dx * drift
        + mobility.value(jet.value) * drift_dx
    )
    return torch.mean(residual * residual)


__all__ = [
    "ContinuityVariant",
    "continuity_misfit_aux",
    "continuity_misfit_avg",
    "dirichlet_misfit",
    "discrete_residual_misfit",
    "initial_misfit",
    "kirchhoff_misfit",
    "pde_residual",
    "residual_misfit",
    "signed_flux_sum",
    "vertex_flux",
    "vertex_trace",
]
