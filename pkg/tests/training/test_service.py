from __future__ import annotations

import json

import numpy as np
import pytest
import torch

from graphdrift.adapters.checkpoints import completed_steps, step_directory
from graphdrift.app.evaluation import ComparisonGrid, PinnSolution, SteppedPinnSolution
from graphdrift.app.fvm import build_grid, solve_fvm
from graphdrift.app.losses import EdgeNetBinding
from graphdrift.app.optim import AdamResult, LbfgsConfig
from graphdrift.app.training import (
    StepBudget,
    TrainConfig,
    TrainingError,
    train,
    train_edgepinn,
    train_graphpinn_continuous,
    train_graphpinn_discrete,
)
from graphdrift.app.training import service
from graphdrift.domain.graph import build_graph
from graphdrift.domain.problem import CollocationSizes, ProblemSpec
from graphdrift.settings import RuntimeSettings

TINY = CollocationSizes(interior=20, initial=5, boundary=4)


def _config(scheme: str, **overrides) -> TrainConfig:
    base = {
        "hidden": (3,),
        "collocation": TINY,
        "adam_steps": 5,
        "lbfgs": LbfgsConfig(maxiter=3),
        "log_every": 1,
        "seed": 5,
    }
    base.update(overrides)
    return TrainConfig.for_scheme(scheme, **base)


def _events(settings: RuntimeSettings) -> list[dict]:
    path = settings.telemetry_file
    if not path.exists():
        return []
    return [json.loads(line) for line in path.read_text().splitlines()]


def test_zero_budget_returns_initialization(model_problem: ProblemSpec, runtime_settings: RuntimeSettings) -> None:
    config = _config("graphpinn-continuous", adam_steps=0, lbfgs=LbfgsConfig(maxiter=0))
    report = train_graphpinn_continuous(model_problem.graph, model_problem, config, settings=runtime_settings)

    initial = EdgeNetBinding.per_edge(model_problem.graph, (3,), 5)
    assert np.array_equal(report.binding.flatten(), initial.flatten())
    assert report.history == []
    assert report.reasons == {"adam": "max steps", "lbfgs": "skipped"}
    assert report.final_loss == pytest.approx(sum(report.breakdown.values()))
    assert report.error is None and report.relative_error is None
    assert isinstance(report.solution(model_problem), PinnSolution)


def test_continuous_training_lowers_the_loss(model_problem: ProblemSpec, runtime_settings: RuntimeSettings) -> None:
    config = _config("graphpinn-continuous")
    report = train_graphpinn_continuous(model_problem.graph, model_problem, config, settings=runtime_settings, run_id="c1")

    assert report.phase_iterations["adam"] == 5
    assert report.phase_iterations["lbfgs"] <= 3
    assert [r.phase for r in report.history[:5]] == ["adam"] * 5
    assert report.final_loss <= report.history[0].loss
    assert set(report.breakdown) == {"residual", "initial", "kirchhoff", "continuity", "flux"}

    events = _events(runtime_settings)
    progress = [e for e in events if e["event"] == "train.progress"]
    phases = [e for e in events if e["event"] == "train.phase"]
    assert len(progress) == len(report.history)
    assert progress[0]["runId"] == "c1" and "terms" in progress[0]["payload"]
    assert [e["payload"]["phase"] for e in phases] == ["adam", "lbfgs"]


def test_same_seed_reproduces_parameters(model_problem: ProblemSpec, runtime_settings: RuntimeSettings) -> None:
    config = _config("graphpinn-continuous", lbfgs=LbfgsConfig(maxiter=0))
    first = train_graphpinn_continuous(model_problem.graph, model_problem, config, settings=runtime_settings)
    again = train_graphpinn_continuous(model_problem.graph, model_problem, config, settings=runtime_settings)

    assert np.array_equal(first.binding.flatten(), again.binding.flatten())
    assert [r.loss for r in first.history] == [r.loss for r in again.history]


def test_onenet_trains_one_shared_network(model_problem: ProblemSpec, runtime_settings: RuntimeSettings) -> None:
    config = _config("graphpinn-onenet", hidden=(4, 4), lbfgs=LbfgsConfig(maxiter=0))
    report = train(model_problem, config, settings=runtime_settings)

    assert report.binding.shared
    assert len(report.binding.nets) == 1
    assert report.binding.nets[0].n_outputs == 5
    assert report.to_dict()["n_params"] == 12 + 20 + 25


def test_aux_variant_returns_vertex_values(model_problem: ProblemSpec, runtime_settings: RuntimeSettings) -> None:
    config = _config("graphpinn-continuous", continuity="aux", adam_steps=2, lbfgs=LbfgsConfig(maxiter=0))
    report = train_graphpinn_continuous(model_problem.graph, model_problem, config, settings=runtime_settings)

    assert set(report.aux) == set(model_problem.graph.interior_vertices)
    assert all(values.shape == (TINY.boundary,) for values in report.aux.values())


def test_edgepinn_visits_every_edge_each_sweep(model_problem: ProblemSpec, runtime_settings: RuntimeSettings) -> None:
    config = _config("edgepinn", sweeps=2, adam_steps=2, lbfgs=LbfgsConfig(maxiter=0))
    report = train_edgepinn(model_problem.graph, model_problem, config, settings=runtime_settings)

    stages = [f"sweep{s}.edge{e}.adam" for s in range(2) for e in range(5)]
    assert [key for key in report.reasons if key.endswith(".adam")] == stages
    assert report.phase_iterations["adam"] == 2 * 5 * 2
    assert report.history[0].phase == "sweep0.edge0.adam"
    initial = EdgeNetBinding.per_edge(model_problem.graph, (3,), 5)
    assert all(not np.array_equal(a.params, b.params) for a, b in zip(report.binding.nets, initial.nets))


def test_edgepinn_optimizes_one_edge_block_at_a_time(
    model_problem: ProblemSpec, runtime_settings: RuntimeSettings, monkeypatch: pytest.MonkeyPatch
) -> None:
    config = _config("edgepinn", sweeps=1, adam_steps=1, lbfgs=LbfgsConfig(maxiter=0))
    seen: list[np.ndarray] = []
    original = service._optimize

    def spy(tracker, theta, **kwargs):
        result = original(tracker, theta, **kwargs)
        seen.append(result - theta)
        return result

    monkeypatch.setattr(service, "_optimize", spy)
    report = train_edgepinn(model_problem.graph, model_problem, config, settings=runtime_settings)

    size = report.binding.nets[0].n_params
    assert len(seen) == 5
    assert all(delta.shape == (size,) and np.any(delta != 0.0) for delta in seen)


def test_edgepinn_sub_problems_see_updates_from_the_same_sweep(
    model_problem: ProblemSpec, runtime_settings: RuntimeSettings, monkeypatch: pytest.MonkeyPatch
) -> None:
    config = _config("edgepinn", sweeps=1, adam_steps=2, lbfgs=LbfgsConfig(maxiter=0))
    contexts: list[np.ndarray] = []
    results: list[np.ndarray] = []
    original = service._optimize

    def spy(tracker, theta, **kwargs):
        contexts.append(tracker._embed(torch.from_numpy(theta.copy())).detach().numpy().copy())
        result = original(tracker, theta, **kwargs)
        results.append(result)
        return result

    monkeypatch.setattr(service, "_optimize", spy)
    report = train_edgepinn(model_problem.graph, model_problem, config, settings=runtime_settings)

    blocks = [report.binding.edge_slice(e) for e in range(model_problem.graph.n_edges)]
    for later in range(1, len(blocks)):
        for earlier in range(later):
            assert np.array_equal(contexts[later][blocks[earlier]], results[earlier])
    assert np.array_equal(report.binding.flatten(), np.concatenate(results))


def test_discrete_scheme_steps_and_checkpoints(
    model_problem: ProblemSpec, runtime_settings: RuntimeSettings, tmp_path
) -> None:
    config = _config(
        "graphpinn-discrete",
        time_steps=2,
        spatial_points=5,
        first_step=StepBudget(3, 0.01, 2),
        later_steps=StepBudget(0, 0.001, 0),
    )
    report = train_graphpinn_discrete(
        model_problem.graph, model_problem, config, settings=runtime_settings, checkpoint_root=tmp_path
    )

    assert len(report.step_bindings) == 2
    assert report.reasons["step1.adam"] == "max steps"
    assert report.reasons["step2.lbfgs"] == "skipped"
    # a step without budget keeps the warm start from the previous step
    assert np.array_equal(report.step_bindings[1].flatten(), report.step_bindings[0].flatten())
    assert completed_steps(tmp_path, "graphpinn-discrete", 5) == 2
    assert (step_directory(tmp_path, "graphpinn-discrete", 1) / "edge_4.npz").is_file()

    solution = report.solution(model_problem)
    assert isinstance(solution, SteppedPinnSolution)
    assert np.allclose(solution.evaluate(0, np.array([0.0]), np.linspace(0.0, 1.0, 3)), 0.0)
    assert report.to_dict()["time_steps"] == 2

    resumed = train_graphpinn_discrete(
        model_problem.graph, model_problem, config, settings=runtime_settings, checkpoint_root=tmp_path, resume=True
    )
    assert resumed.history == []
    assert np.array_equal(resumed.step_bindings[1].flatten(), report.step_bindings[1].flatten())


def test_non_finite_phase_names_the_step(
    model_problem: ProblemSpec, runtime_settings: RuntimeSettings, monkeypatch: pytest.MonkeyPatch
) -> None:
    def broken(loss_fn, theta0, learning_rate, n_steps, **kwargs):
        return AdamResult(theta=np.array(theta0), iterations=0, reason="non-finite")

    monkeypatch.setattr(service, "adam_run", broken)
    config = _config("graphpinn-discrete", time_steps=2, spatial_points=5)
    with pytest.raises(TrainingError, match="training.non_finite") as caught:
        train(model_problem, config, settings=runtime_settings)
    assert caught.value.step == 1
    phases = [e for e in _events(runtime_settings) if e["event"] == "train.phase"]
    assert phases[-1]["status"] == "error"


def test_reference_error_is_reported(model_problem: ProblemSpec, runtime_settings: RuntimeSettings) -> None:
    payload = model_problem.to_dict()
    payload["horizon"] = 1.0
    problem = ProblemSpec.from_dict(payload)
    reference = solve_fvm(problem, build_grid(problem.graph, 10), 30, settings=runtime_settings)
    config = _config("graphpinn-continuous", adam_steps=1, lbfgs=LbfgsConfig(maxiter=0))

    report = train(problem, config, reference=reference, comparison=ComparisonGrid(problem.graph, 1.0, 11, 11),
                   settings=runtime_settings)
    assert report.error is not None
    assert report.relative_error is not None and report.relative_error > 0.0
    assert report.to_dict()["error"]["reference_norm"] > 0.0


def test_scheme_mismatch_is_rejected(model_problem: ProblemSpec, runtime_settings: RuntimeSettings) -> None:
    with pytest.raises(TrainingError, match="training.scheme"):
        train_edgepinn(model_problem.graph, model_problem, _config("graphpinn-continuous"), settings=runtime_settings)
    other = _config("graphpinn-continuous")

    graph = build_graph([("a", "b", 1.0), ("b", "c", 1.0)])
    with pytest.raises(TrainingError, match="training.graph"):
        train_graphpinn_continuous(graph, model_problem, other, settings=runtime_settings)
