from __future__ import annotations

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from graphdrift.app.losses import EdgeNetBinding, NetworkField, continuity_misfit_avg
from graphdrift.app.nn import init_mlp
from graphdrift.domain.graph import model_graph
from graphdrift.domain.problem import ProblemSpec

_GRAPH = model_graph()
_PROBLEM = ProblemSpec(graph=_GRAPH, epsilon=0.01, horizon=10.0)
_seeds = st.integers(min_value=0, max_value=2**31 - 1)
_times = st.lists(st.floats(min_value=0.0, max_value=10.0, allow_nan=False), min_size=1, max_size=6)


def _time_only_binding(seed: int, hidden: int) -> EdgeNetBinding:
    """The same net on every edge with the x column of the first layer zeroed, so all traces agree."""

    net = init_mlp((2, hidden, 1), seed)
    params = net.params + np.random.default_rng(seed).normal(scale=0.3, size=net.n_params)
    params[1 : 2 * hidden : 2] = 0.0
    shared = net.with_params(params)
    return EdgeNetBinding(nets=(shared,) * _GRAPH.n_edges, slots=tuple((e, 0) for e in range(_GRAPH.n_edges)))


@settings(max_examples=40, deadline=None)
@given(_seeds, st.integers(min_value=1, max_value=5), _times, st.sampled_from(_GRAPH.interior_vertices))
def test_equal_traces_give_zero_continuity(seed: int, hidden: int, times: list[float], vertex: int) -> None:
    field = NetworkField.from_binding(_time_only_binding(seed, hidden))

    assert float(continuity_misfit_avg(field, vertex, times, _PROBLEM, "avg-squared-inside")) <= 1e-28


@settings(max_examples=40, deadline=None)
@given(
    _seeds,
    st.integers(min_value=1, max_value=5),
    _times,
    st.sampled_from(_GRAPH.interior_vertices),
    st.floats(min_value=0.05, max_value=0.5),
)
def test_one_differing_trace_gives_positive_continuity(
    seed: int, hidden: int, times: list[float], vertex: int, shift: float
) -> None:
    binding = _time_only_binding(seed, hidden)
    edge_id = _GRAPH.incident_edges(vertex)[0]
    moved = binding.nets[edge_id].params.copy()
    moved[-1] += shift
    nets = tuple(net.with_params(moved) if e == edge_id else net for e, net in enumerate(binding.nets))
    field = NetworkField.from_binding(EdgeNetBinding(nets=nets, slots=binding.slots))

    assert float(continuity_misfit_avg(field, vertex, times, _PROBLEM, "avg-squared-inside")) > 0.0


@settings(max_examples=40, deadline=None)
@given(_seeds, _times, st.sampled_from(_GRAPH.interior_vertices))
def test_random_nets_separate_the_two_average_variants(seed: int, times: list[float], vertex: int) -> None:
    field = NetworkField.from_binding(EdgeNetBinding.per_edge(_GRAPH, (4, 4), seed))

    assert float(continuity_misfit_avg(field, vertex, times, _PROBLEM, "avg-printed")) <= 1e-24
    assert float(continuity_misfit_avg(field, vertex, times, _PROBLEM, "avg-squared-inside")) > 0.0
