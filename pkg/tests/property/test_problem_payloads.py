from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from graphdrift.adapters.config import PROBLEM_SCHEMA, iter_schema_errors
from graphdrift.domain.problem import ProblemSpec

_rate = st.floats(min_value=0.0, max_value=2.0, allow_nan=False)


@st.composite
def path_payload(draw: st.DrawFn) -> dict:
    n_edges = draw(st.integers(min_value=1, max_value=5))
    names = [f"v{k}" for k in range(n_edges + 1)]
    edges = [
        {"origin": names[k], "terminal": names[k + 1], "length": draw(st.floats(min_value=0.1, max_value=4.0))}
        for k in range(n_edges)
    ]
    return {
        "edges": edges,
        "epsilon": draw(st.floats(min_value=1e-4, max_value=1.0)),
        "horizon": draw(st.floats(min_value=0.1, max_value=20.0)),
        "boundary": {
            names[0]: {"alpha": draw(_rate), "beta": draw(_rate)},
            names[-1]: {"alpha": draw(_rate), "beta": draw(_rate)},
        },
        "initial": draw(st.floats(min_value=0.0, max_value=1.0)),
    }


@settings(max_examples=30, deadline=None)
@given(path_payload())
def test_generated_payloads_are_valid_and_stable(payload: dict) -> None:
    assert list(iter_schema_errors(payload, PROBLEM_SCHEMA)) == []

    problem = ProblemSpec.from_dict(payload)
    assert problem.graph.n_edges == len(payload["edges"])
    assert problem.graph.exterior_vertices == (0, problem.graph.n_vertices - 1)
    again = ProblemSpec.from_dict(problem.to_dict())
    assert again.fingerprint() == problem.fingerprint()


@settings(max_examples=30, deadline=None)
@given(path_payload(), st.sampled_from(["viscosity", "source", "dt"]))
def test_unknown_keys_are_reported(payload: dict, key: str) -> None:
    errors = list(iter_schema_errors({**payload, key: 1.0}, PROBLEM_SCHEMA))

    assert [validator for _, validator, _ in errors] == ["additionalProperties"]
