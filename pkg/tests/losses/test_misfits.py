from __future__ import annotations

import numpy as np
import pytest
import torch

from graphdrift.app.losses import (
    ContinuityVariant,
    EdgeNetBinding,
    LossError,
    NetworkField,
    continuity_misfit_aux,
    continuity_misfit_avg,
    dirichlet_misfit,
    discrete_residual_misfit,
    initial_misfit,
    kirchhoff_misfit,
    pde_residual,
    vertex_flux,
)
from graphdrift.app.nn import Activation, Mlp
from graphdrift.domain.graph import build_graph
from graphdrift.domain.problem import Constant, ProblemSpec

TIMES = np.array([0.1, 0.4, 0.9])


def constant_binding(values) -> EdgeNetBinding:
    """One single-layer net per edge whose output is the given constant."""

    nets = tuple(Mlp((2, 1), Activation.TANH, np.array([0.0, 0.0, np.arctanh(v)])) for v in values)
    return EdgeNetBinding(nets=nets, slots=tuple((e, 0) for e in range(len(values))))


@pytest.fixture()
def path_problem() -> ProblemSpec:
    graph = build_graph([("a", "b", 1.0), ("b", "c", 1.0)])
    return ProblemSpec(
        graph=graph,
        epsilon=0.01,
        horizon=1.0,
        alpha={0: Constant(0.5)},
        beta={2: Constant(0.3)},
    )


def test_constant_fields_have_no_residual(path_problem: ProblemSpec) -> None:
    field = NetworkField.from_binding(constant_binding([0.2, 0.4]))
    residual = pde_residual(field, 0, TIMES, np.array([0.0, 0.5, 1.0]), path_problem)

    assert torch.allclose(residual, torch.zeros(3, dtype=torch.float64), atol=1e-15)


def test_initial_misfit_against_zero_data(path_problem: ProblemSpec) -> None:
    field = NetworkField.from_binding(constant_binding([0.5, 0.5]))

    assert float(initial_misfit(field, 1, np.linspace(0.0, 1.0, 5), path_problem)) == pytest.approx(0.25)


def test_flux_and_kirchhoff_at_interior_vertex(path_problem: ProblemSpec) -> None:
    field = NetworkField.from_binding(constant_binding([0.2, 0.4]))
    b = path_problem.graph.vertex_id("b")

    assert np.allclose(vertex_flux(field, 0, TIMES, b, path_problem).numpy(), 0.16)
    assert np.allclose(vertex_flux(field, 1, TIMES, b, path_problem).numpy(), 0.24)
    # inflow through edge 0 minus outflow through edge 1
    assert float(kirchhoff_misfit(field, b, TIMES, path_problem)) == pytest.approx(0.08**2)


def test_continuity_variants(path_problem: ProblemSpec) -> None:
    field = NetworkField.from_binding(constant_binding([0.2, 0.4]))
    b = path_problem.graph.vertex_id("b")

    squared = continuity_misfit_avg(field, b, TIMES, path_problem, ContinuityVariant.AVG_SQUARED)
    printed = continuity_misfit_avg(field, b, TIMES, path_problem, "avg-printed")
    assert float(squared) == pytest.approx(0.02)
    assert float(printed) <= 1e-24

    aux = torch.full((3,), 0.3, dtype=torch.float64)
    assert float(continuity_misfit_aux(field, b, TIMES, aux, path_problem)) == pytest.approx(0.02)
    with pytest.raises(LossError, match="loss.aux_size"):
        continuity_misfit_aux(field, b, TIMES, aux[:2], path_problem)
    with pytest.raises(LossError, match="loss.continuity_variant"):
        continuity_misfit_avg(field, b, TIMES, path_problem, ContinuityVariant.AUX)


def test_flux_balance_at_exterior_vertices(path_problem: ProblemSpec) -> None:
    field = NetworkField.from_binding(constant_binding([0.2, 0.4]))
    a, c = path_problem.graph.vertex_id("a"), path_problem.graph.vertex_id("c")

    # origin: -J + alpha (1 - rho) = -0.16 + 0.5 * 0.8
    assert float(dirichlet_misfit(field, a, TIMES, path_problem)) == pytest.approx(0.24**2)
    # terminal: +J - beta rho = 0.24 - 0.3 * 0.4
    assert float(dirichlet_misfit(field, c, TIMES, path_problem)) == pytest.approx(0.12**2)


def test_vertex_kind_is_checked(path_problem: ProblemSpec) -> None:
    field = NetworkField.from_binding(constant_binding([0.2, 0.4]))
    with pytest.raises(LossError, match="loss.vertex_kind"):
        kirchhoff_misfit(field, 0, TIMES, path_problem)
    with pytest.raises(LossError, match="loss.vertex_kind"):
        dirichlet_misfit(field, 1, TIMES, path_problem)
    with pytest.raises(LossError, match="loss.not_incident"):
        vertex_flux(field, 0, TIMES, 2, path_problem)


def test_discrete_residual_uses_previous_step(path_problem: ProblemSpec) -> None:
    field = NetworkField.from_binding(constant_binding([0.2, 0.4]))
    previous = NetworkField.from_binding(constant_binding([0.1, 0.1]))
    xs = np.linspace(0.0, 1.0, 6)

    first = discrete_residual_misfit(field, None, 0, xs, 0.5, 0.5, path_problem)
    later = discrete_residual_misfit(field, previous, 1, xs, 1.0, 0.5, path_problem)
    assert float(first) == pytest.approx((0.2 / 0.5) ** 2)
    assert float(later) == pytest.approx((0.3 / 0.5) ** 2)
    with pytest.raises(LossError, match="loss.tau"):
        discrete_residual_misfit(field, None, 0, xs, 0.5, 0.0, path_problem)
