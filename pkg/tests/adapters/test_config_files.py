from __future__ import annotations

from pathlib import Path

import pytest

from graphdrift.adapters.config import (
    EXPERIMENT_SCHEMA,
    PROBLEM_SCHEMA,
    ConfigError,
    iter_schema_errors,
    load_experiment,
    load_problem,
    problem_payload,
    read_mapping,
)

PATH_PROBLEM = """
edges:
  - {origin: a, terminal: b, length: 2.0}
epsilon: 0.05
horizon: 0.5
boundary:
  a: {alpha: 0.4}
  b: {beta: 0.2}
initial: {offset: 0.5, amplitude: 0.3}
"""


def test_model_alias_loads_packaged_problem() -> None:
    problem = load_problem("model")

    assert problem.graph.n_edges == 5
    assert problem.epsilon == 0.01 and problem.horizon == 10.0
    assert problem_payload("model")[1] == "packaged:model_graph"
    assert load_problem("model_graph").fingerprint() == problem.fingerprint()


def test_problem_file(tmp_path: Path) -> None:
    path = tmp_path / "path.yaml"
    path.write_text(PATH_PROBLEM, encoding="utf-8")
    problem = load_problem(path)

    assert problem.graph.total_length == 2.0
    assert problem.inflow(problem.graph.vertex_id("a"), 0.0) == pytest.approx(0.4)
    assert problem.outflow(problem.graph.vertex_id("b"), 0.0) == pytest.approx(0.2)


def test_unknown_keys_are_named(tmp_path: Path) -> None:
    path = tmp_path / "bad.yaml"
    path.write_text(PATH_PROBLEM + "diffusion: 1.0\n", encoding="utf-8")

    with pytest.raises(ConfigError, match="config.unknown_key") as caught:
        load_problem(path)
    assert caught.value.code == "config.unknown_key"
    assert "diffusion" in str(caught.value)


def test_domain_errors_become_config_errors(tmp_path: Path) -> None:
    path = tmp_path / "loop.yaml"
    path.write_text(PATH_PROBLEM.replace("terminal: b", "terminal: a"), encoding="utf-8")

    with pytest.raises(ConfigError, match="graph.self_loop"):
        load_problem(path)


def test_unreadable_files(tmp_path: Path) -> None:
    with pytest.raises(ConfigError, match="config.missing_file"):
        read_mapping(tmp_path / "absent.yaml")

    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="cannot parse"):
        read_mapping(broken)

    listing = tmp_path / "list.yaml"
    listing.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="must be a mapping"):
        read_mapping(listing)

    empty = tmp_path / "empty.yaml"
    empty.write_text("", encoding="utf-8")
    assert read_mapping(empty) == {}


def test_experiment_file_overrides_flags(tmp_path: Path) -> None:
    path = tmp_path / "exp.yaml"
    path.write_text("problem: model\nscheme: edgepinn\nsweeps: 2\n", encoding="utf-8")

    merged = load_experiment(path, {"scheme": "graphpinn-discrete", "seed": 4, "layers": None})
    assert merged == {"problem": "model", "scheme": "edgepinn", "sweeps": 2, "seed": 4}
    assert load_experiment(None, {"problem": "model"}) == {"problem": "model"}


def test_experiment_schema_errors() -> None:
    with pytest.raises(ConfigError, match="config.unknown_key"):
        load_experiment(None, {"problem": "model", "epochs": 3})
    with pytest.raises(ConfigError, match="config.invalid"):
        load_experiment(None, {"scheme": "pinn"})

    errors = list(iter_schema_errors({"collocation": {"interior": 0}, "reference": {"cells": 1}}, EXPERIMENT_SCHEMA))
    assert [path for path, _, _ in errors] == ["collocation.interior", "reference.cells"]
    assert list(iter_schema_errors({"edges": []}, PROBLEM_SCHEMA))
