"""Training configuration for the neural schemes."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Mapping

from graphdrift.app.losses import ContinuityVariant, LossWeights
from graphdrift.app.nn import Activation
from graphdrift.app.optim import LbfgsConfig
from graphdrift.domain.graph import MetricGraph
from graphdrift.domain.problem import CollocationSizes, SamplingMode


class TrainingError(RuntimeError):
    """Raised when a training run cannot continue; ``step`` names the failing time step."""

    def __init__(self, message: str, *, step: int | None = None) -> None:
        super().__init__(message)
        self.step = step


class Scheme(str, Enum):
    CONTINUOUS = "graphpinn-continuous"
    ONENET = "graphpinn-onenet"
    EDGE = "edgepinn"
    DISCRETE = "graphpinn-discrete"


class Schedule(str, Enum):
    CONSTANT = "constant"
    STEP = "step"


class SnapshotMode(str, Enum):
    CURRENT = "current"
    EQUIDISTANT = "equidistant"


@dataclass(frozen=True)
class StepBudget:
    adam_steps: int
    learning_rate: float
    lbfgs_maxiter: int

    def to_dict(self) -> dict[str, Any]:
        return {"adam_steps": self.adam_steps, "learning_rate": self.learning_rate, "lbfgs_maxiter": self.lbfgs_maxiter}


@dataclass(frozen=True)
class TrainConfig:
    scheme: Scheme = Scheme.CONTINUOUS
    hidden: tuple[int, ...] = (20, 20, 20)
    activation: Activation = Activation.TANH
    continuity: ContinuityVariant = ContinuityVariant.AVG_SQUARED
    adam_steps: int = 1000
    learning_rate: float = 0.01
    schedule: Schedule = Schedule.CONSTANT
    lbfgs: LbfgsConfig = field(default_factory=LbfgsConfig)
    collocation: CollocationSizes = field(default_factory=CollocationSizes)
    sampling: SamplingMode = SamplingMode.UNIFORM
    seed: int = 0
    weights: LossWeights = field(default_factory=LossWeights)
    sweeps: int = 5
    time_steps: int = 200
    first_step: StepBudget = StepBudget(2000, 0.01, 10000)
    later_steps: StepBudget = StepBudget(100, 0.001, 10000)
    spatial_points: int = 200
    boundary_snapshots: SnapshotMode = SnapshotMode.CURRENT
    log_every: int = 100

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "activation", Activation(self.activation))
        object.__setattr__(self, "continuity", ContinuityVariant(self.continuity))
        object.__setattr__(self, "schedule", Schedule(self.schedule))
        object.__setattr__(self, "sampling", SamplingMode(self.sampling))
        object.__setattr__(self, "boundary_snapshots", SnapshotMode(self.boundary_snapshots))
        object.__setattr__(self, "hidden", tuple(int(n) for n in self.hidden))
        if not self.hidden or any(n < 1 for n in self.hidden):
            raise TrainingError(f"training.layers: hidden layer sizes must be positive, got {list(self.hidden)}")
        if self.adam_steps < 0 or self.sweeps < 1 or self.time_steps < 1 or self.log_every < 1:
            raise TrainingError("training.budget: step counts must be nonnegative and sweeps/time steps positive")
        if self.learning_rate <= 0.0:
            raise TrainingError(f"training.learning_rate: must be positive, got {self.learning_rate}")
        if self.spatial_points < 2:
            raise TrainingError("training.spatial_points: need at least two points per edge")
        if self.scheme in (Scheme.EDGE, Scheme.DISCRETE) and self.continuity is ContinuityVariant.AUX:
            raise TrainingError(f"training.continuity: scheme '{self.scheme.value}' supports only the averaged continuity terms")

    @property
    def shared(self) -> bool:
        return self.scheme is Scheme.ONENET

    def check_graph(self, graph: MetricGraph) -> None:
        if self.shared and not graph.has_equal_lengths():
            raise TrainingError("training.onenet: one shared network requires equal edge lengths")

    def with_budget(self, *, adam_steps: int, lbfgs_maxiter: int) -> "TrainConfig":
        return replace(
            self,
            adam_steps=adam_steps,
            lbfgs=replace(self.lbfgs, maxiter=lbfgs_maxiter),
            first_step=replace(self.first_step, adam_steps=adam_steps, lbfgs_maxiter=lbfgs_maxiter),
            later_steps=replace(self.later_steps, adam_steps=adam_steps, lbfgs_maxiter=lbfgs_maxiter),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "scheme": self.scheme.value,
            "hidden": list(self.hidden),
            "activation": self.activation.value,
            "continuity": self.continuity.value,
            "adam_steps": self.adam_steps,
            "learning_rate": self.learning_rate,
            "schedule": self.schedule.value,
            "lbfgs": {"maxiter": self.lbfgs.maxiter, "maxfun": self.lbfgs.maxfun, "maxcor": self.lbfgs.maxcor, "maxls": self.lbfgs.maxls, "ftol": self.lbfgs.ftol},
            "collocation": {**self.collocation.to_dict(), "mode": self.sampling.value},
            "seed": self.seed,
            "weights": self.weights.to_dict(),
            "sweeps": self.sweeps,
            "time_steps": self.time_steps,
            "first_step": self.first_step.to_dict(),
            "later_steps": self.later_steps.to_dict(),
            "spatial_points": self.spatial_points,
            "boundary_snapshots": self.boundary_snapshots.value,
        }

    @classmethod
    def for_scheme(cls, scheme: Scheme | str, **overrides: Any) -> "TrainConfig":
        """Scheme defaults (L-BFGS caps follow the reference protocol) with overrides."""

        scheme = Scheme(scheme)
        defaults: dict[str, Any] = {"scheme": scheme}
        if scheme is Scheme.CONTINUOUS:
            defaults["lbfgs"] = LbfgsConfig(maxiter=50000)
        elif scheme is Scheme.ONENET:
            defaults["lbfgs"] = LbfgsConfig(maxiter=50000)
            defaults["hidden"] = (10, 10)
        elif scheme is Scheme.EDGE:
            defaults["lbfgs"] = LbfgsConfig(maxiter=2000)
        else:
            defaults["hidden"] = (20, 20)
            defaults["lbfgs"] = LbfgsConfig(maxiter=10000)
        defaults.update(overrides)
        return cls(**defaults)

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any], base: "TrainConfig | None" = None) -> "TrainConfig":
        """Overlay experiment-file keys on ``base`` (or the scheme defaults)."""

        scheme = Scheme(payload.get("scheme", base.scheme if base else Scheme.CONTINUOUS))
        config = base if base is not None and base.scheme is scheme else cls.for_scheme(scheme)
        changes: dict[str, Any] = {}
        layers = payload.get("layers")
        width = payload.get("width")
        if layers is not None or width is not None:
            n_layers = int(layers if layers is not None else len(config.hidden))
            n_width = int(width if width is not None else config.hidden[0])
            changes["hidden"] = (n_width,) * n_layers
        for key in ("activation", "continuity", "adam_steps", "learning_rate", "schedule", "seed", "sweeps",
                    "time_steps", "spatial_points", "boundary_snapshots", "log_every"):
            if key in payload:
                changes[key] = payload[key]
        lbfgs_changes = {}
        if "lbfgs_maxiter" in payload:
            lbfgs_changes["maxiter"] = int(payload["lbfgs_maxiter"])
        if "lbfgs_maxfun" in payload:
            lbfgs_changes["maxfun"] = int(payload["lbfgs_maxfun"])
        if lbfgs_changes:
            changes["lbfgs"] = replace(config.lbfgs, **lbfgs_changes)
        colloc = payload.get("collocation")
        if colloc:
            sizes = config.collocation.to_dict()
            sizes.update({k: int(v) for k, v in colloc.items() if k != "mode"})
            changes["collocation"] = CollocationSizes(**sizes)
            if "mode" in colloc:
                changes["sampling"] = colloc["mode"]
        if "weights" in payload:
            changes["weights"] = LossWeights.from_dict(payload["weights"])
        for key in ("first_step", "later_steps"):
            if key in payload:
                changes[key] = replace(getattr(config, key), **payload[key])
        return replace(config, **changes)


__all__ = ["Schedule", "Scheme", "SnapshotMode", "StepBudget", "TrainConfig", "TrainingError"]
