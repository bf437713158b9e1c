"""Cost functions assembled from the misfit terms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np
import torch

from graphdrift.app.nn import DTYPE
from graphdrift.domain.graph import MetricGraph
from graphdrift.domain.problem import CollocationSet, ProblemSpec

from .binding import EdgeNetBinding, LossError, NetworkField
from .misfits import (
    ContinuityVariant,
    continuity_misfit_aux,
    continuity_misfit_avg,
    dirichlet_misfit,
    discrete_residual_misfit,
    initial_misfit,
    kirchhoff_misfit,
    residual_misfit,
)

TERMS = ("residual", "initial", "kirchhoff", "continuity", "flux")


@dataclass(frozen=True)
class LossWeights:
    residual: float = 1.0
    initial: float = 1.0
    kirchhoff: float = 1.0
    continuity: float = 1.0
    flux: float = 1.0

    def __post_init__(self) -> None:
        for name in TERMS:
            if getattr(self, name) < 0.0:
                raise LossError(f"loss.weights: weight '{name}' must be nonnegative")

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any] | None) -> "LossWeights":
        payload = payload or {}
        unknown = set(payload) - set(TERMS)
        if unknown:
            raise LossError(f"loss.weights: unknown terms {sorted(unknown)}")
        return cls(**{name: float(value) for name, value in payload.items()})

    def to_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in TERMS}

    def combine(self, terms: Mapping[str, torch.Tensor]) -> torch.Tensor:
        total = torch.zeros((), dtype=DTYPE)
        for name, value in terms.items():
            total = total + getattr(self, name) * value
        return total


@dataclass(frozen=True, eq=False)
class ParameterLayout:
    """Flat trainable vector: network parameters followed by auxiliary vertex values."""

    binding: EdgeNetBinding
    graph: MetricGraph
    aux_vertices: tuple[int, ...] = ()
    aux_size: int = 0

    @classmethod
    def for_variant(
        cls, binding: EdgeNetBinding, graph: MetricGraph, collocation: CollocationSet, variant: ContinuityVariant | str
    ) -> "ParameterLayout":
        binding.check_graph(graph)
        if ContinuityVariant(variant) is ContinuityVariant.AUX:
            return cls(binding, graph, tuple(graph.interior_vertices), collocation.sizes.boundary)
        return cls(binding, graph)

    @property
    def n_params(self) -> int:
        return self.binding.n_params + len(self.aux_vertices) * self.aux_size

    def initial_vector(self, collocation: CollocationSet | None = None) -> np.ndarray:
        """Network parameters, then auxiliary values started at the current vertex averages."""

        blocks = [self.binding.flatten()]
        if self.aux_vertices:
            field = NetworkField.from_binding(self.binding)
            with torch.no_grad():
                for vertex_id in self.aux_vertices:
                    if collocation is None:
                        blocks.append(np.zeros(self.aux_size))
                        continue
                    times = collocation.vertex_times(vertex_id)
                    traces = [
                        field.value(e, times, np.full_like(times, self.graph.edge(e).endpoint_coordinate(vertex_id)))
                        for e in self.graph.incident_edges(vertex_id)
                    ]
                    blocks.append(torch.stack(traces).mean(dim=0).numpy())
        return np.concatenate(blocks)

    def field(self, theta: torch.Tensor) -> NetworkField:
        return NetworkField(self.binding, theta[: self.binding.n_params])

    def aux(self, theta: torch.Tensor) -> dict[int, torch.Tensor]:
        start = self.binding.n_params
        values: dict[int, torch.Tensor] = {}
        for index, vertex_id in enumerate(self.aux_vertices):
            offset = start + index * self.aux_size
            values[vertex_id] = theta[offset : offset + self.aux_size]
        return values

    def split(self, theta: np.ndarray) -> tuple[EdgeNetBinding, dict[int, np.ndarray]]:
        theta = np.asarray(theta, dtype=np.float64)
        binding = self.binding.with_params(theta[: self.binding.n_params])
        aux = {v: t.numpy().copy() for v, t in self.aux(torch.from_numpy(theta.copy())).items()}
        return binding, aux


def graph_loss_terms(
    field: NetworkField,
    problem: ProblemSpec,
    collocation: CollocationSet,
    variant: ContinuityVariant | str = ContinuityVariant.AVG_SQUARED,
    aux: Mapping[int, torch.Tensor] | None = None,
) -> dict[str, torch.Tensor]:
    """Unweighted sums of every misfit family over the whole graph."""

    graph = problem.graph
    field.binding.check_graph(graph)
    variant = ContinuityVariant(variant)
    if variant is ContinuityVariant.AUX and aux is None:
        raise LossError("loss.aux_size: auxiliary continuity needs trainable vertex values")
    zero = torch.zeros((), dtype=DTYPE)
    terms = {name: zero for name in TERMS}
    for edge in graph.edges:
        t, x = collocation.interior(edge.edge_id)
        terms["residual"] = terms["residual"] + residual_misfit(field, edge.edge_id, t, x, problem)
        terms["initial"] = terms["initial"] + initial_misfit(field, edge.edge_id, collocation.initial_x[edge.edge_id], problem)
    for vertex in graph.vertices:
        times = collocation.vertex_times(vertex.vertex_id)
        if graph.is_interior(vertex.vertex_id):
            terms["kirchhoff"] = terms["kirchhoff"] + kirchhoff_misfit(field, vertex.vertex_id, times, problem)
            if variant is ContinuityVariant.AUX:
                continuity = continuity_misfit_aux(field, vertex.vertex_id, times, aux[vertex.vertex_id], problem)
            else:
                continuity = continuity_misfit_avg(field, vertex.vertex_id, times, problem, variant)
            terms["continuity"] = terms["continuity"] + continuity
        else:
            terms["flux"] = terms["flux"] + dirichlet_misfit(field, vertex.vertex_id, times, problem)
    return terms


def graph_loss(
    field: NetworkField,
    problem: ProblemSpec,
    collocation: CollocationSet,
    variant: ContinuityVariant | str = ContinuityVariant.AVG_SQUARED,
    aux: Mapping[int, torch.Tensor] | None = None,
    weights: LossWeights | None = None,
) -> torch.Tensor:
    terms = graph_loss_terms(field, problem, collocation, variant, aux)
    return (weights or LossWeights()).combine(terms)


def vertex_terms(
    field: NetworkField,
    vertex_id: int,
    times,
    problem: ProblemSpec,
    variant: ContinuityVariant | str = ContinuityVariant.AVG_SQUARED,
) -> dict[str, torch.Tensor]:
    """Misfits attached to one vertex: Kirchhoff and continuity inside, flux balance outside."""

    if problem.graph.is_interior(vertex_id):
        return {
            "kirchhoff": kirchhoff_misfit(field, vertex_id, times, problem),
            "continuity": continuity_misfit_avg(field, vertex_id, times, problem, variant),
        }
    return {"flux": dirichlet_misfit(field, vertex_id, times, problem)}


def _accumulate(terms: dict[str, torch.Tensor], extra: Mapping[str, torch.Tensor]) -> None:
    for name, value in extra.items():
        terms[name] = terms[name] + value


def edge_loss_terms(
    field: NetworkField,
    edge_id: int,
    problem: ProblemSpec,
    collocation: CollocationSet,
    variant: ContinuityVariant | str = ContinuityVariant.AVG_SQUARED,
) -> dict[str, torch.Tensor]:
    """Residual and initial misfit of one edge plus the terms of both its end vertices."""

    graph = problem.graph
    if not 0 <= edge_id < graph.n_edges:
        raise LossError(f"loss.edge: unknown edge {edge_id}")
    edge = graph.edge(edge_id)
    zero = torch.zeros((), dtype=DTYPE)
    terms = {name: zero for name in TERMS}
    t, x = collocation.interior(edge_id)
    terms["residual"] = residual_misfit(field, edge_id, t, x, problem)
    terms["initial"] = initial_misfit(field, edge_id, collocation.initial_x[edge_id], problem)
    for vertex_id in (edge.origin, edge.terminal):
        _accumulate(terms, vertex_terms(field, vertex_id, collocation.vertex_times(vertex_id), problem, variant))
    return terms


def edge_loss(
    field: NetworkField,
    edge_id: int,
    problem: ProblemSpec,
    collocation: CollocationSet,
    variant: ContinuityVariant | str = ContinuityVariant.AVG_SQUARED,
    weights: LossWeights | None = None,
) -> torch.Tensor:
    """Single-edge cost; parameters of other edges are frozen when ``field`` was built from a restricted tensor."""

    return (weights or LossWeights()).combine(edge_loss_terms(field, edge_id, problem, collocation, variant))


def discrete_loss_terms(
    field: NetworkField,
    previous: NetworkField | None,
    problem: ProblemSpec,
    points: Sequence[np.ndarray],
    t_n: float,
    tau: float,
    snapshot_times: Sequence[np.ndarray] | np.ndarray,
    variant: ContinuityVariant | str = ContinuityVariant.AVG_SQUARED,
) -> dict[str, torch.Tensor]:
    """Implicit Euler residual on every edge plus vertex misfits at the step's snapshot times."""

    graph = problem.graph
    zero = torch.zeros((), dtype=DTYPE)
    terms = {name: zero for name in TERMS}
    for edge in graph.edges:
        terms["residual"] = terms["residual"] + discrete_residual_misfit(
            field, previous, edge.edge_id, points[edge.edge_id], t_n, tau, problem
        )
    for vertex in graph.vertices:
        times = snapshot_times[vertex.vertex_id] if isinstance(snapshot_times, (list, tuple)) else snapshot_times
        _accumulate(terms, vertex_terms(field, vertex.vertex_id, times, problem, variant))
    return terms


def breakdown(terms: Mapping[str, torch.Tensor]) -> dict[str, float]:
    return {name: float(value.detach()) for name, value in terms.items()}


__all__ = [
    "LossWeights",
    "ParameterLayout",
    "TERMS",
    "breakdown",
    "discrete_loss_terms",
    "edge_loss",
    "edge_loss_terms",
    "graph_loss",
    "graph_loss_terms",
    "vertex_terms",
]
