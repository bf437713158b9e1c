"""Experiment configuration: problem reference, training setup, reference and comparison grids."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from graphdrift.adapters.config import ConfigError, load_problem
from graphdrift.app.training import TrainConfig, TrainingError
from graphdrift.domain.problem import ProblemSpec
from graphdrift.resources import list_problem_resources

DESK_SCALE = (2000, 1000)
FULL_SCALE = (8000, 4000)


class ExperimentError(RuntimeError):
    """Raised when a stage of an experiment fails; outputs written so far are kept."""


@dataclass(frozen=True)
class ReferenceSettings:
    cells: int = DESK_SCALE[0]
    steps: int = DESK_SCALE[1]
    alpha_stab: float = 1.0
    full_scale: bool = False

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any] | None) -> "ReferenceSettings":
        payload = dict(payload or {})
        full = bool(payload.get("full_scale", False))
        cells, steps = FULL_SCALE if full else DESK_SCALE
        return cls(
            cells=int(payload.get("cells", cells)),
            steps=int(payload.get("steps", steps)),
            alpha_stab=float(payload.get("alpha_stab", 1.0)),
            full_scale=full,
        )

    def to_dict(self) -> dict[str, Any]:
        return {"cells": self.cells, "steps": self.steps, "alpha_stab": self.alpha_stab, "full_scale": self.full_scale}


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    problem_ref: str
    problem: ProblemSpec
    train: TrainConfig
    reference: ReferenceSettings = field(default_factory=ReferenceSettings)
    comparison_times: int = 201
    comparison_points: int = 201
    snapshots: tuple[float, ...] = ()
    output: Path | None = None
    layer_counts: tuple[int, ...] = (1, 2, 3, 4)
    widths: tuple[int, ...] = (10, 20, 30, 40)
    payload: Mapping[str, Any] = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.train.seed

    @property
    def run_name(self) -> str:
        return f"{self.train.scheme.value}-L{len(self.train.hidden)}xW{self.train.hidden[0]}-seed{self.seed}"

    @classmethod
    def from_payload(cls, payload: Mapping[str, Any], *, base_dir: Path | None = None) -> "ExperimentConfig":
        """Build from a schema-validated payload; relative problem paths resolve against ``base_dir``."""

        if "problem" not in payload:
            raise ConfigError("experiment needs a 'problem' (packaged name or file path)")
        problem_ref = resolve_problem_ref(str(payload["problem"]), base_dir)
        problem = load_problem(problem_ref)
        try:
            train = TrainConfig.from_dict(payload)
            train.check_graph(problem.graph)
        except (TrainingError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        comparison = payload.get("comparison") or {}
        output = payload.get("output")
        snapshots = tuple(float(t) for t in payload.get("snapshots", ()))
        for t in snapshots:
            if t > problem.horizon:
                raise ConfigError(f"snapshot time {t} lies beyond the horizon {problem.horizon}")
        return cls(
            problem_ref=problem_ref,
            problem=problem,
            train=train,
            reference=ReferenceSettings.from_dict(payload.get("reference")),
            comparison_times=int(comparison.get("times", 201)),
            comparison_points=int(comparison.get("points", 201)),
            snapshots=snapshots,
            output=Path(output) if output else None,
            layer_counts=tuple(int(n) for n in payload.get("layer_counts", (1, 2, 3, 4))),
            widths=tuple(int(n) for n in payload.get("widths", (10, 20, 30, 40))),
            payload={**payload, "problem": problem_ref},
        )

    def with_topology(self, layers: int, width: int, output: Path | None = None) -> "ExperimentConfig":
        payload = {**self.payload, "layers": layers, "width": width}
        if output is not None:
            payload["output"] = str(output)
        return replace(
            self,
            train=replace(self.train, hidden=(width,) * layers),
            output=output if output is not None else self.output,
            payload=payload,
        )


def resolve_problem_ref(reference: str, base_dir: Path | None) -> str:
    if reference in list_problem_resources() or reference == "model":
        return reference
    path = Path(reference).expanduser()
    if not path.is_absolute() and base_dir is not None and (base_dir / path).is_file():
        path = base_dir / path
    if not path.is_file():
        raise ConfigError(f"problem file {path} does not exist", code="config.missing_file")
    return str(path.resolve())


__all__ = ["DESK_SCALE", "ExperimentConfig", "ExperimentError", "FULL_SCALE", "ReferenceSettings", "resolve_problem_ref"]
