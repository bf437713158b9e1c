"""Training schemes for drift-diffusion densities on metric graphs."""

from __future__ import annotations

import time
from dataclasses import replace
from pathlib import Path
from typing import Callable

import numpy as np
import torch

from graphdrift.adapters.checkpoints import completed_steps, load_step, save_step
from graphdrift.app.evaluation import ComparisonGrid, l2_error
from graphdrift.app.losses import (
    EdgeNetBinding,
    NetworkField,
    ParameterLayout,
    breakdown,
    discrete_loss_terms,
    edge_loss_terms,
    graph_loss_terms,
)
from graphdrift.app.optim import NON_FINITE, LbfgsConfig, PhaseClock, adam_run, constant_schedule, lbfgs_run, step_schedule
from graphdrift.domain.graph import MetricGraph
from graphdrift.domain.problem import ProblemSpec, sample_collocation
from graphdrift.ports.solution import Solution
from graphdrift.settings import SETTINGS, RuntimeSettings

from .config import Schedule, Scheme, SnapshotMode, TrainConfig, TrainingError
from .monitor import ProgressMonitor, TrackedLoss
from .report import TrainReport


def _schedule(config: TrainConfig, n_steps: int, learning_rate: float) -> Callable[[int], float]:
    if config.schedule is Schedule.STEP:
        return step_schedule(n_steps, (learning_rate, learning_rate / 10.0, learning_rate / 100.0))
    return constant_schedule(learning_rate)


def _optimize(
    tracker: TrackedLoss,
    theta: np.ndarray,
    *,
    config: TrainConfig,
    adam_steps: int,
    learning_rate: float,
    lbfgs: LbfgsConfig,
    monitor: ProgressMonitor,
    clock: PhaseClock,
    report: TrainReport,
    prefix: str = "",
    step: int | None = None,
) -> np.ndarray:
    """ADAM phase followed by an L-BFGS phase from the ADAM result."""

    monitor.watch(tracker)
    adam_phase = f"{prefix}adam"
    adam = adam_run(
        tracker, theta, _schedule(config, adam_steps, learning_rate), adam_steps,
        callback=monitor, clock=clock, phase=adam_phase,
    )
    report.count("adam", adam.iterations)
    report.reasons[adam_phase] = adam.reason
    monitor.phase_done(adam_phase, iterations=adam.iterations, reason=adam.reason, loss=adam.final_loss)
    if adam.reason == NON_FINITE:
        last = adam.final_loss
        raise TrainingError(
            f"training.non_finite: {adam_phase} diverged after {adam.iterations} steps (last finite loss {last})",
            step=step,
        )
    if lbfgs.maxiter == 0:
        report.reasons[f"{prefix}lbfgs"] = "skipped"
        return adam.theta

    lbfgs_phase = f"{prefix}lbfgs"
    result = lbfgs_run(tracker, adam.theta, lbfgs, callback=monitor, clock=clock, phase=lbfgs_phase)
    report.count("lbfgs", result.iterations)
    report.reasons[lbfgs_phase] = result.reason
    monitor.phase_done(lbfgs_phase, iterations=result.iterations, reason=result.reason, loss=result.loss)
    if result.reason == NON_FINITE:
        raise TrainingError(
            f"training.non_finite: {lbfgs_phase} hit a non-finite loss after {result.iterations} iterations "
            f"(last finite loss {result.loss})",
            step=step,
        )
    return result.theta


def _finish(
    report: TrainReport,
    problem: ProblemSpec,
    reference: Solution | None,
    comparison: ComparisonGrid | None,
    started: float,
) -> TrainReport:
    if report.history:
        report.final_loss = report.history[-1].loss
    elif report.breakdown:
        report.final_loss = sum(getattr(report.config.weights, k) * v for k, v in report.breakdown.items())
    if reference is not None:
        grid = comparison or ComparisonGrid(problem.graph, problem.horizon)
        report.error = l2_error(report.solution(problem), reference, grid)
    report.wall_time = time.perf_counter() - started
    return report


def train_graphpinn_continuous(
    graph: MetricGraph,
    problem: ProblemSpec,
    config: TrainConfig,
    *,
    reference: Solution | None = None,
    comparison: ComparisonGrid | None = None,
    settings: RuntimeSettings | None = None,
    run_id: str | None = None,
) -> TrainReport:
    """Minimize the whole-graph cost over every edge network at once.

    Handles both per-edge networks and the one-shared-network variant.
    """

    settings = settings or SETTINGS
    _check(graph, problem, config, (Scheme.CONTINUOUS, Scheme.ONENET))
    started = time.perf_counter()
    if config.shared:
        binding = EdgeNetBinding.shared_net(graph, config.hidden, config.seed, config.activation)
    else:
        binding = EdgeNetBinding.per_edge(graph, config.hidden, config.seed, config.activation)
    collocation = sample_collocation(graph, problem, config.collocation, config.sampling, config.seed)
    layout = ParameterLayout.for_variant(binding, graph, collocation, config.continuity)
    aux_enabled = bool(layout.aux_vertices)

    def terms(theta: torch.Tensor):
        aux = layout.aux(theta) if aux_enabled else None
        return graph_loss_terms(layout.field(theta), problem, collocation, config.continuity, aux)

    tracker = TrackedLoss(terms, config.weights)
    monitor = ProgressMonitor(settings, log_every=config.log_every, run_id=run_id)
    report = TrainReport(scheme=config.scheme, config=config, binding=binding)
    theta = _optimize(
        tracker, layout.initial_vector(collocation),
        config=config, adam_steps=config.adam_steps, learning_rate=config.learning_rate,
        lbfgs=config.lbfgs, monitor=monitor, clock=PhaseClock(), report=report,
    )
    report.binding, report.aux = layout.split(theta)
    report.breakdown = tracker.terms_at(theta)
    report.history = monitor.records
    return _finish(report, problem, reference, comparison, started)


def train_edgepinn(
    graph: MetricGraph,
    problem: ProblemSpec,
    config: TrainConfig,
    *,
    reference: Solution | None = None,
    comparison: ComparisonGrid | None = None,
    settings: RuntimeSettings | None = None,
    run_id: str | None = None,
) -> TrainReport:
    """Alternating minimization: each sweep visits the edges in order and trains only that edge's network."""

    settings = settings or SETTINGS
    _check(graph, problem, config, (Scheme.EDGE,))
    started = time.perf_counter()
    binding = EdgeNetBinding.per_edge(graph, config.hidden, config.seed, config.activation)
    collocation = sample_collocation(graph, problem, config.collocation, config.sampling, config.seed)
    monitor = ProgressMonitor(settings, log_every=config.log_every, run_id=run_id)
    report = TrainReport(scheme=config.scheme, config=config, binding=binding)
    clock = PhaseClock()
    theta = binding.flatten()

    for sweep in range(config.sweeps):
        for edge in graph.edges:
            block = binding.edge_slice(edge.edge_id)
            frozen = torch.from_numpy(theta.copy())
            edge_id = edge.edge_id

            def embed(sub: torch.Tensor, block=block, frozen=frozen, edge_id=edge_id) -> torch.Tensor:
                full = torch.cat([frozen[: block.start], sub, frozen[block.stop :]])
                return binding.restrict(full, edge_id)

            def terms(full: torch.Tensor, edge_id=edge_id):
                return edge_loss_terms(NetworkField(binding, full), edge_id, problem, collocation, config.continuity)

            tracker = TrackedLoss(terms, config.weights, embed=embed)
            sub = _optimize(
                tracker, theta[block].copy(),
                config=config, adam_steps=config.adam_steps, learning_rate=config.learning_rate,
                lbfgs=config.lbfgs, monitor=monitor, clock=clock, report=report,
                prefix=f"sweep{sweep}.edge{edge_id}.",
            )
            theta = theta.copy()
            theta[block] = sub

    report.binding = binding.with_params(theta)
    with torch.no_grad():
        report.breakdown = breakdown(
            graph_loss_terms(NetworkField.from_binding(report.binding), problem, collocation, config.continuity)
        )
    report.history = monitor.records
    return _finish(report, problem, reference, comparison, started)


def snapshot_times(config: TrainConfig, t_n: float, tau: float) -> np.ndarray:
    """Times at which vertex misfits of step ``n`` are evaluated."""

    if config.boundary_snapshots is SnapshotMode.CURRENT:
        return np.array([t_n])
    return np.linspace(t_n - tau, t_n, config.collocation.boundary + 1)[1:]


def train_graphpinn_discrete(
    graph: MetricGraph,
    problem: ProblemSpec,
    config: TrainConfig,
    *,
    reference: Solution | None = None,
    comparison: ComparisonGrid | None = None,
    settings: RuntimeSettings | None = None,
    run_id: str | None = None,
    checkpoint_root: Path | None = None,
    resume: bool = False,
) -> TrainReport:
    """Implicit Euler in time with one set of edge networks per step.

    Step ``n`` starts from the parameters of step ``n - 1``; step 1 starts from
    the seeded initialization and uses the first-step budget.
    """

    settings = settings or SETTINGS
    _check(graph, problem, config, (Scheme.DISCRETE,))
    started = time.perf_counter()
    n_t = config.time_steps
    tau = problem.horizon / n_t
    binding = EdgeNetBinding.per_edge(graph, config.hidden, config.seed, config.activation)
    points = [np.linspace(0.0, edge.length, config.spatial_points) for edge in graph.edges]
    monitor = ProgressMonitor(settings, log_every=config.log_every, run_id=run_id)
    report = TrainReport(scheme=config.scheme, config=config, binding=binding)
    clock = PhaseClock()
    layout = ParameterLayout(binding, graph)

    step_bindings: list[EdgeNetBinding] = []
    first = 1
    if checkpoint_root is not None and resume:
        done = min(completed_steps(checkpoint_root, config.scheme.value, len(binding.nets)), n_t)
        step_bindings = [load_step(checkpoint_root, config.scheme.value, n, binding) for n in range(1, done + 1)]
        first = done + 1

    current = step_bindings[-1] if step_bindings else binding
    tracker: TrackedLoss | None = None
    for n in range(first, n_t + 1):
        t_n = n * tau
        budget = config.first_step if n == 1 else config.later_steps
        previous = NetworkField.from_binding(step_bindings[-1]) if step_bindings else None
        times = snapshot_times(config, t_n, tau)

        def terms(theta: torch.Tensor, previous=previous, t_n=t_n, times=times):
            return discrete_loss_terms(
                layout.field(theta), previous, problem, points, t_n, tau, times, config.continuity
            )

        tracker = TrackedLoss(terms, config.weights)
        theta = _optimize(
            tracker, current.flatten(),
            config=config, adam_steps=budget.adam_steps, learning_rate=budget.learning_rate,
            lbfgs=replace(config.lbfgs, maxiter=budget.lbfgs_maxiter),
            monitor=monitor, clock=clock, report=report, prefix=f"step{n}.", step=n,
        )
        current = binding.with_params(theta)
        step_bindings.append(current)
        if checkpoint_root is not None:
            save_step(checkpoint_root, config.scheme.value, n, current)

    report.binding = current
    report.step_bindings = step_bindings
    if tracker is not None:
        report.breakdown = tracker.terms_at(current.flatten())
    report.history = monitor.records
    return _finish(report, problem, reference, comparison, started)


def _check(graph: MetricGraph, problem: ProblemSpec, config: TrainConfig, schemes: tuple[Scheme, ...]) -> None:
    if config.scheme not in schemes:
        raise TrainingError(f"training.scheme: '{config.scheme.value}' cannot run here")
    if graph is not problem.graph and graph.edge_list() != problem.graph.edge_list():
        raise TrainingError("training.graph: problem is defined on a different graph")
    config.check_graph(graph)


_TRAINERS = {
    Scheme.CONTINUOUS: train_graphpinn_continuous,
    Scheme.ONENET: train_graphpinn_continuous,
    Scheme.EDGE: train_edgepinn,
}


def train(
    problem: ProblemSpec,
    config: TrainConfig,
    *,
    reference: Solution | None = None,
    comparison: ComparisonGrid | None = None,
    settings: RuntimeSettings | None = None,
    run_id: str | None = None,
    checkpoint_root: Path | None = None,
    resume: bool = False,
) -> TrainReport:
    """Run the scheme named by ``config.scheme``."""

    if config.scheme is Scheme.DISCRETE:
        return train_graphpinn_discrete(
            problem.graph, problem, config,
            reference=reference, comparison=comparison, settings=settings, run_id=run_id,
            checkpoint_root=checkpoint_root, resume=resume,
        )
    return _TRAINERS[config.scheme](
        problem.graph, problem, config, reference=reference, comparison=comparison, settings=settings, run_id=run_id
    )


__all__ = [
    "snapshot_times",
    "train",
    "train_edgepinn",
    "train_graphpinn_continuous",
    "train_graphpinn_discrete",
]
