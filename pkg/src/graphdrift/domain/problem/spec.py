"""Drift-diffusion problem data attached to a metric graph."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from graphdrift.domain.graph import GraphError, MetricGraph, build_graph

from .functions import Constant, Mobility, PotentialGradient, SineProfile

RateFunction = Callable[[Any], Any]
InitialFunction = Callable[[Any], Any]

_INITIAL_CHECK_POINTS = 33
_BOUND_TOLERANCE = 1e-12


class ProblemError(ValueError):
    """Raised when problem data violates its invariants."""


@dataclass(frozen=True)
class ProblemSpec:
    """Coefficients, vertex rates and initial data of a graph drift-diffusion problem.

    ``alpha`` and ``beta`` are keyed by exterior vertex id; ``potential_gradient``
    and ``initial`` hold one entry per edge.
    """

    graph: MetricGraph
    epsilon: float
    horizon: float
    mobility: Mobility = field(default_factory=Mobility)
    potential_gradient: tuple[PotentialGradient, ...] = ()
    alpha: Mapping[int, RateFunction] = field(default_factory=dict)
    beta: Mapping[int, RateFunction] = field(default_factory=dict)
    initial: tuple[InitialFunction, ...] = ()
    source: Mapping[str, Any] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not np.isfinite(self.epsilon) or self.epsilon <= 0.0:
            raise ProblemError(f"problem.epsilon: diffusion constant must be positive, got {self.epsilon}")
        if not np.isfinite(self.horizon) or self.horizon <= 0.0:
            raise ProblemError(f"problem.horizon: horizon must be positive, got {self.horizon}")
        n_edges = self.graph.n_edges
        if not self.potential_gradient:
            object.__setattr__(self, "potential_gradient", tuple(PotentialGradient.constant(1.0) for _ in range(n_edges)))
        if not self.initial:
            object.__setattr__(self, "initial", tuple(Constant(0.0) for _ in range(n_edges)))
        if len(self.potential_gradient) != n_edges:
            raise ProblemError("problem.potential_gradient: expected one entry per edge")
        if len(self.initial) != n_edges:
            raise ProblemError("problem.initial: expected one entry per edge")
        exterior = set(self.graph.exterior_vertices)
        alpha = {v: self.alpha.get(v, Constant(0.0)) for v in sorted(exterior)}
        beta = {v: self.beta.get(v, Constant(0.0)) for v in sorted(exterior)}
        extra = (set(self.alpha) | set(self.beta)) - exterior
        if extra:
            names = sorted(str(self.graph.vertex(v).name) for v in extra)
            raise ProblemError(f"problem.boundary_vertex: rates given for interior vertices {names}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        self._check_initial_bounds()

    def _check_initial_bounds(self) -> None:
        for edge in self.graph.edges:
            xs = np.linspace(0.0, edge.length, _INITIAL_CHECK_POINTS)
            values = np.asarray(self.initial[edge.edge_id](xs), dtype=np.float64)
            if not np.all(np.isfinite(values)):
                raise ProblemError(f"problem.initial: non-finite initial data on edge {edge.edge_id}")
            if values.min() < -_BOUND_TOLERANCE or values.max() > 1.0 + _BOUND_TOLERANCE:
                raise ProblemError(
                    f"problem.initial: initial data on edge {edge.edge_id} leaves [0, 1] "
                    f"(min={values.min():.3g}, max={values.max():.3g})"
                )

    # evaluation helpers -------------------------------------------------

    def drift(self, edge_id: int, t, x) -> np.ndarray:
        return np.asarray(self.potential_gradient[edge_id](t, x), dtype=np.float64)

    def drift_dx(self, edge_id: int, t, x) -> np.ndarray:
        return np.asarray(self.potential_gradient[edge_id].derivative(t, x), dtype=np.float64)

    def initial_values(self, edge_id: int, x) -> np.ndarray:
        return np.asarray(self.initial[edge_id](x), dtype=np.float64)

    def inflow(self, vertex_id: int, t) -> np.ndarray:
        return np.asarray(self.alpha[vertex_id](t), dtype=np.float64)

    def outflow(self, vertex_id: int, t) -> np.ndarray:
        return np.asarray(self.beta[vertex_id](t), dtype=np.float64)

    def has_closed_boundary(self) -> bool:
        """True when every vertex rate is identically zero (mass-conserving setting)."""

        rates = list(self.alpha.values()) + list(self.beta.values())
        return all(isinstance(rate, Constant) and rate.value == 0.0 for rate in rates)

    # serialization -----------------------------------------------------

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "ProblemSpec":
        """Build a problem from a validated configuration payload."""

        try:
            graph = build_graph(
                [(edge["origin"], edge["terminal"], edge["length"]) for edge in payload["edges"]],
                vertices=payload.get("vertices"),
            )
        except KeyError as exc:
            raise ProblemError(f"problem.missing_key: {exc.args[0]}") from exc
        potential = float(payload.get("potential_gradient", 1.0))
        alpha: dict[int, RateFunction] = {}
        beta: dict[int, RateFunction] = {}
        for name, rates in (payload.get("boundary") or {}).items():
            try:
                vertex_id = graph.vertex_id(name)
            except GraphError:
                vertex_id = _coerce_vertex(graph, name)
            alpha[vertex_id] = Constant(float(rates.get("alpha", 0.0)))
            beta[vertex_id] = Constant(float(rates.get("beta", 0.0)))
        initial = payload.get("initial", 0.0)
        if isinstance(initial, Mapping):
            profiles = tuple(
                SineProfile(
                    offset=float(initial.get("offset", 0.0)),
                    amplitude=float(initial.get("amplitude", 0.0)),
                    wavenumber=float(initial.get("wavenumber", 1.0)),
                    length=edge.length,
                )
                for edge in graph.edges
            )
        else:
            profiles = tuple(Constant(float(initial)) for _ in graph.edges)
        return cls(
            graph=graph,
            epsilon=float(payload["epsilon"]),
            horizon=float(payload["horizon"]),
            mobility=Mobility(payload.get("mobility", "quadratic")),
            potential_gradient=tuple(PotentialGradient.constant(potential) for _ in graph.edges),
            alpha=alpha,
            beta=beta,
            initial=profiles,
            source=dict(payload),
        )

    def to_dict(self) -> dict[str, Any]:
        if self.source is None:
            raise ProblemError("problem.not_serializable: problem was not built from a configuration payload")
        return json.loads(json.dumps(self.source, sort_keys=True))

    def fingerprint(self) -> str:
        """sha256 over the canonical configuration payload."""

        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _coerce_vertex(graph: MetricGraph, name: Any) -> int:
    # YAML keys may arrive as strings for integer vertex names
    for vertex in graph.vertices:
        if str(vertex.name) == str(name):
            return vertex.vertex_id
    raise ProblemError(f"problem.boundary_vertex: unknown vertex {name!r}")


__all__ = ["InitialFunction", "ProblemError", "ProblemSpec", "RateFunction"]
