from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphdrift.app.fvm import assemble_system, build_grid, lax_friedrichs_flux, solve_fvm
from graphdrift.domain.graph import MetricGraph, build_graph
from graphdrift.domain.problem import Constant, Mobility, ProblemSpec
from graphdrift.settings import RuntimeSettings

_lengths = st.floats(min_value=0.2, max_value=3.0, allow_nan=False)
_density = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@st.composite
def star_grid(draw: st.DrawFn):
    """A hub with 1-4 spokes pointing in either direction, random lengths and cell counts."""

    n_spokes = draw(st.integers(min_value=1, max_value=4))
    edges = []
    for k in range(n_spokes):
        length = draw(_lengths)
        if draw(st.booleans()):
            edges.append(("hub", f"s{k}", length))
        else:
            edges.append((f"s{k}", "hub", length))
    graph = build_graph(edges)
    cells = {e: draw(st.integers(min_value=2, max_value=25)) for e in range(n_spokes)}
    return graph, build_grid(graph, cells)


@settings(max_examples=30, deadline=None)
@given(star_grid())
def test_control_volumes_cover_the_graph(case: tuple[MetricGraph, object]) -> None:
    graph, grid = case

    assert grid.total_measure() == pytest.approx(graph.total_length, rel=1e-12)
    assert np.all(grid.mass_weights() > 0.0)


@settings(max_examples=30, deadline=None)
@given(star_grid(), st.floats(min_value=1e-4, max_value=1.0), st.floats(min_value=1e-3, max_value=1.0))
def test_diffusion_matrix_columns_sum_to_measures(case, epsilon: float, tau: float) -> None:
    _, grid = case
    system = assemble_system(grid, epsilon, tau)

    column_sums = np.asarray(system.matrix.sum(axis=0)).ravel()
    assert np.allclose(column_sums, grid.mass_weights(), rtol=1e-12, atol=1e-14)


@settings(max_examples=50)
@given(_density, _density, st.floats(min_value=-5.0, max_value=5.0), st.floats(min_value=0.0, max_value=2.0))
def test_numerical_flux_is_antisymmetric_and_consistent(left: float, right: float, drift: float, alpha: float) -> None:
    forward = lax_friedrichs_flux(left, right, drift, alpha)
    backward = lax_friedrichs_flux(right, left, -drift, alpha)

    assert forward == pytest.approx(-backward, abs=1e-14)
    assert lax_friedrichs_flux(left, left, drift, alpha) == pytest.approx(left * (1.0 - left) * drift, abs=1e-14)
    assert lax_friedrichs_flux(left, right, drift, alpha, Mobility("zero")) == pytest.approx(
        -0.5 * alpha * (right - left), abs=1e-14
    )


@settings(max_examples=15, deadline=None)
@given(levels=st.lists(_density, min_size=3, max_size=3), cells=st.integers(min_value=4, max_value=12))
def test_closed_network_keeps_bounds_and_mass(levels: list[float], cells: int, tmp_path_factory) -> None:
    graph = build_graph([("a", "m", 1.0), ("m", "b", 1.0), ("m", "c", 1.0)])
    h = 1.0 / (cells + 1)
    n_t = 8
    problem = ProblemSpec(graph=graph, epsilon=0.01, horizon=0.9 * n_t * h, initial=tuple(Constant(v) for v in levels))
    base = tmp_path_factory.mktemp("runtime")
    runtime = RuntimeSettings(home_dir=base, cache_dir=base / "cache", log_dir=base / "logs", runs_dir=base / "runs")

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        trajectory = solve_fvm(problem, build_grid(graph, cells), n_t, settings=runtime)

    assert trajectory.minima.min() >= -1e-12
    assert trajectory.maxima.max() <= 1.0 + 1e-12
    assert abs(trajectory.mass_drift()) <= 1e-11
