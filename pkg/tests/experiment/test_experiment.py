from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import yaml

from graphdrift.adapters.config import ConfigError, load_problem
from graphdrift.app.evaluation import ComparisonGrid
from graphdrift.app.fvm import FvSolveError
from graphdrift.app.experiment import (
    ExperimentConfig,
    ExperimentError,
    ReferenceSettings,
    aligned_record_every,
    export_snapshots,
    reference_key,
    reference_solution,
    run_experiment,
    run_fvm,
    run_sweep,
)
from graphdrift.app.experiment import runner
from graphdrift.app.training import TrainingError
from graphdrift.domain.graph import model_graph
from graphdrift.domain.problem import ProblemSpec
from graphdrift.settings import RuntimeSettings

SMALL_REFERENCE = ReferenceSettings(cells=9, steps=40)


@pytest.fixture()
def short_problem(tmp_path: Path) -> Path:
    payload = load_problem("model").to_dict()
    payload["horizon"] = 1.0
    path = tmp_path / "short.yaml"
    path.write_text(yaml.safe_dump(payload), encoding="utf-8")
    return path


@pytest.fixture()
def payload(short_problem: Path) -> dict:
    return {
        "problem": str(short_problem),
        "scheme": "graphpinn-continuous",
        "seed": 3,
        "layers": 1,
        "width": 3,
        "adam_steps": 2,
        "lbfgs_maxiter": 0,
        "collocation": {"interior": 20, "initial": 5, "boundary": 4},
        "reference": {"cells": 9, "steps": 40},
        "comparison": {"times": 11, "points": 5},
        "snapshots": [0.5, 1.0],
        "log_every": 1,
    }


def _events(settings: RuntimeSettings, name: str) -> list[dict]:
    if not settings.telemetry_file.exists():
        return []
    lines = settings.telemetry_file.read_text().splitlines()
    return [event for event in map(json.loads, lines) if event["event"] == name]


def test_config_from_payload(payload: dict, short_problem: Path) -> None:
    config = ExperimentConfig.from_payload(payload)

    assert config.problem_ref == str(short_problem.resolve())
    assert config.problem.horizon == 1.0
    assert config.run_name == "graphpinn-continuous-L1xW3-seed3"
    assert config.reference == SMALL_REFERENCE
    assert (config.comparison_times, config.comparison_points) == (11, 5)
    assert config.snapshots == (0.5, 1.0)

    wider = config.with_topology(2, 5, Path("elsewhere"))
    assert wider.train.hidden == (5, 5)
    assert wider.payload["layers"] == 2 and wider.payload["output"] == "elsewhere"
    assert config.train.hidden == (3,)


def test_config_relative_problem_path(short_problem: Path) -> None:
    config = ExperimentConfig.from_payload({"problem": short_problem.name}, base_dir=short_problem.parent)
    assert config.problem_ref == str(short_problem.resolve())
    assert ExperimentConfig.from_payload({"problem": "model"}).problem.graph.n_edges == 5


@pytest.mark.parametrize(
    "changes, code",
    [
        ({"problem": None}, "config.invalid"),
        ({"problem": "missing.yaml"}, "config.missing_file"),
        ({"snapshots": [2.0]}, "config.invalid"),
        ({"layers": 2, "width": 0}, "config.invalid"),
    ],
)
def test_config_rejects_bad_payloads(payload: dict, changes: dict, code: str) -> None:
    payload = {**payload, **changes}
    if payload["problem"] is None:
        del payload["problem"]
    with pytest.raises(ConfigError, match=code):
        ExperimentConfig.from_payload(payload)


def test_reference_settings_scale() -> None:
    assert ReferenceSettings.from_dict(None) == ReferenceSettings(2000, 1000)
    full = ReferenceSettings.from_dict({"full_scale": True})
    assert (full.cells, full.steps) == (8000, 4000)
    assert ReferenceSettings.from_dict({"full_scale": True, "cells": 50}).cells == 50


def test_aligned_record_every() -> None:
    assert aligned_record_every(1000, 201) == 5
    assert aligned_record_every(40, 11) == 4
    assert aligned_record_every(1000, 7) == 1
    assert aligned_record_every(10, 1) == 1


def test_reference_cache_hit_after_miss(short_problem: Path, runtime_settings: RuntimeSettings) -> None:
    problem = load_problem(short_problem)
    first = reference_solution(problem, SMALL_REFERENCE, n_times=11, settings=runtime_settings)
    second = reference_solution(problem, SMALL_REFERENCE, n_times=11, settings=runtime_settings)

    assert [e["status"] for e in _events(runtime_settings, "reference.cache")] == ["miss", "hit"]
    assert len(_events(runtime_settings, "fvm.solve")) == 1
    assert list(first.steps) == [0, 4, 8, 12, 16, 20, 24, 28, 32, 36, 40]
    assert np.array_equal(first.states, second.states)
    assert second.evaluate(2, np.array([0.5]), np.array([0.5]))[0, 0] == pytest.approx(
        first.evaluate(2, np.array([0.5]), np.array([0.5]))[0, 0]
    )


def test_reference_key_depends_on_resolution(short_problem: Path) -> None:
    problem = load_problem(short_problem)
    key = reference_key(problem, 9, 40, 1.0)

    assert key == reference_key(load_problem(short_problem), 9, 40, 1.0)
    assert key != reference_key(problem, 9, 80, 1.0)
    assert key != reference_key(problem, 9, 40, 1.0, record_every=4)
    in_code = ProblemSpec(graph=model_graph(), epsilon=0.01, horizon=1.0)
    assert reference_key(in_code, 9, 40, 1.0) is None


def test_uncached_reference_writes_nothing(short_problem: Path, runtime_settings: RuntimeSettings) -> None:
    reference_solution(load_problem(short_problem), SMALL_REFERENCE, n_times=11, settings=runtime_settings, use_cache=False)

    assert not (runtime_settings.cache_dir / "reference").exists()


def test_run_experiment_writes_artifacts(payload: dict, tmp_path: Path, runtime_settings: RuntimeSettings) -> None:
    config = ExperimentConfig.from_payload({**payload, "output": str(tmp_path / "run")})
    result = run_experiment(config, settings=runtime_settings)

    names = sorted(p.relative_to(result.output).as_posix() for p in result.files)
    assert names == [
        "loss_history.csv",
        "report.json",
        "snapshots/snapshot_t0.5.csv",
        "snapshots/snapshot_t1.csv",
        "solution.npz",
    ]
    report = json.loads((result.output / "report.json").read_text())
    assert report["problem"] == config.problem_ref
    assert report["reference"]["label"] == "fvm(n_e=9, n_t=40)"
    assert report["comparison"] == {"times": 11, "points": 5}

    history = pd.read_csv(result.output / "loss_history.csv")
    assert list(history.columns) == ["iteration", "phase", "loss", "grad_norm", "wall_clock", "stage"]
    assert len(history) == 2
    snapshot = pd.read_csv(result.output / "snapshots" / "snapshot_t1.csv")
    assert list(snapshot.columns) == ["edge_id", "x", "value"]
    assert len(snapshot) == 5 * 5

    assert np.isfinite(result.row["relative_error"])
    assert result.row["layers"] == 1 and result.row["adam_iterations"] == 2
    runs = _events(runtime_settings, "experiment.run")
    assert runs[-1]["status"] == "success" and runs[-1]["runId"] == config.run_name


def test_failed_training_leaves_failure_record(
    payload: dict, tmp_path: Path, runtime_settings: RuntimeSettings, monkeypatch: pytest.MonkeyPatch
) -> None:
    def failing(*args, **kwargs):
        raise TrainingError("training.non_finite: step3.adam diverged", step=3)

    monkeypatch.setattr(runner, "train", failing)
    config = ExperimentConfig.from_payload({**payload, "output": str(tmp_path / "run")})
    with pytest.raises(ExperimentError, match="experiment.train"):
        run_experiment(config, settings=runtime_settings)

    failure = json.loads((tmp_path / "run" / "failure.json").read_text())
    assert failure["step"] == 3 and failure["stage"] == "train"
    assert "non_finite" in failure["error"]
    assert _events(runtime_settings, "experiment.run")[-1]["level"] == "error"


def test_failed_reference_solve_leaves_failure_record(
    payload: dict, tmp_path: Path, runtime_settings: RuntimeSettings, monkeypatch: pytest.MonkeyPatch
) -> None:
    def failing(*args, **kwargs):
        raise FvSolveError("fvm.non_finite: density left [0, 1] at step 7")

    def never(*args, **kwargs):
        raise AssertionError("training must not start without a reference")

    monkeypatch.setattr(runner, "reference_solution", failing)
    monkeypatch.setattr(runner, "train", never)
    config = ExperimentConfig.from_payload({**payload, "output": str(tmp_path / "run")})
    with pytest.raises(ExperimentError, match="experiment.reference"):
        run_experiment(config, settings=runtime_settings)

    failure = json.loads((tmp_path / "run" / "failure.json").read_text())
    assert failure["stage"] == "reference"
    assert failure["step"] is None
    assert "fvm.non_finite" in failure["error"]
    assert _events(runtime_settings, "experiment.run")[-1]["payload"]["stage"] == "reference"


def test_export_snapshots_checks_time_range(short_problem: Path, tmp_path: Path, runtime_settings: RuntimeSettings) -> None:
    problem = load_problem(short_problem)
    trajectory = reference_solution(problem, SMALL_REFERENCE, n_times=11, settings=runtime_settings)
    grid = ComparisonGrid(problem.graph, 1.0, 11, 5)

    with pytest.raises(ExperimentError, match="experiment.snapshot_time"):
        export_snapshots(trajectory, [1.5], tmp_path / "snaps", grid)
    assert not (tmp_path / "snaps").exists()
    (path,) = export_snapshots(trajectory, [1.0 + 1e-12], tmp_path / "snaps", grid)
    assert path.is_file()


def test_run_fvm_outputs(short_problem: Path, tmp_path: Path, runtime_settings: RuntimeSettings) -> None:
    trajectory, files = run_fvm(
        load_problem(short_problem),
        SMALL_REFERENCE,
        record_every=10,
        output=tmp_path / "fvm",
        write_csv=True,
        snapshots=[0.25],
        comparison=(11, 5),
        settings=runtime_settings,
    )

    assert [p.name for p in files] == ["solution.npz", "fvm.json", "trajectory.csv", "snapshot_t0.25.csv"]
    summary = json.loads((tmp_path / "fvm" / "fvm.json").read_text())
    assert summary["cells"] == 9 and summary["mass_drift"] == pytest.approx(trajectory.mass_drift())
    rows = pd.read_csv(tmp_path / "fvm" / "trajectory.csv")
    # five records, each with 5 * 8 interior cells and 6 vertex patches
    assert len(rows) == 5 * (5 * 8 + 6)


def test_sweep_tables(payload: dict, tmp_path: Path, runtime_settings: RuntimeSettings) -> None:
    config = ExperimentConfig.from_payload(
        {**payload, "layer_counts": [1, 2], "widths": [2, 3], "snapshots": [], "output": str(tmp_path / "sweep")}
    )
    result = run_sweep(config, settings=runtime_settings)

    assert len(result.rows) == 4 and result.failures == []
    assert {(row["layers"], row["width"]) for row in result.rows} == {(1, 2), (1, 3), (2, 2), (2, 3)}
    assert all((tmp_path / "sweep" / f"L{row['layers']}_W{row['width']}" / "report.json").is_file() for row in result.rows)
    table = pd.read_csv(result.tables[1], index_col=0)
    assert list(table.index) == [1, 2]
    assert [int(c) for c in table.columns] == [2, 3]
    assert result.tables[2].read_text().startswith("|")
    # the reference is solved once, every cell loads it from the cache
    statuses = [e["status"] for e in _events(runtime_settings, "reference.cache")]
    assert statuses == ["miss"] + ["hit"] * 4
