"""Loss evaluation bookkeeping and progress telemetry for training runs."""

from __future__ import annotations

from typing import Callable, Mapping

import numpy as np
import torch

from graphdrift.app.losses import LossWeights, breakdown
from graphdrift.app.nn import param_gradient
from graphdrift.app.optim import IterationRecord
from graphdrift.settings import RuntimeSettings
from graphdrift.utils.telemetry import record_structured_event

TermsFunction = Callable[[torch.Tensor], Mapping[str, torch.Tensor]]


class TrackedLoss:
    """Value-and-gradient function over a flat vector that remembers the last term breakdown.

    ``embed`` maps the optimized vector to the full parameter tensor the terms
    are evaluated at.
    """

    def __init__(
        self,
        terms_fn: TermsFunction,
        weights: LossWeights,
        *,
        embed: Callable[[torch.Tensor], torch.Tensor] | None = None,
    ) -> None:
        self._terms_fn = terms_fn
        self._weights = weights
        self._embed = embed
        self.last_terms: dict[str, float] = {}
        self.evaluations = 0

    def _loss(self, theta: torch.Tensor) -> torch.Tensor:
        full = theta if self._embed is None else self._embed(theta)
        terms = self._terms_fn(full)
        self.last_terms = breakdown(terms)
        return self._weights.combine(terms)

    def __call__(self, theta: np.ndarray) -> tuple[float, np.ndarray]:
        self.evaluations += 1
        return param_gradient(self._loss, theta)

    def terms_at(self, theta: np.ndarray) -> dict[str, float]:
        with torch.no_grad():
            full = torch.from_numpy(np.array(theta, dtype=np.float64))
            if self._embed is not None:
                full = self._embed(full)
            return breakdown(self._terms_fn(full))


class ProgressMonitor:
    """Collects iteration records and emits ``train.progress`` every ``log_every`` iterations."""

    def __init__(
        self,
        settings: RuntimeSettings,
        *,
        log_every: int = 100,
        run_id: str | None = None,
        tracker: TrackedLoss | None = None,
    ) -> None:
        self.settings = settings
        self.log_every = max(1, log_every)
        self.run_id = run_id
        self.tracker = tracker
        self.records: list[IterationRecord] = []

    def watch(self, tracker: TrackedLoss) -> "ProgressMonitor":
        self.tracker = tracker
        return self

    def __call__(self, record: IterationRecord) -> None:
        self.records.append(record)
        if record.iteration % self.log_every:
            return
        payload = {
            "phase": record.phase,
            "iteration": record.iteration,
            "loss": record.loss,
            "grad_norm": record.grad_norm,
            "wall_clock": record.wall_clock,
        }
        if self.tracker is not None:
            payload["terms"] = dict(self.tracker.last_terms)
        record_structured_event(
            self.settings, "train.progress", payload=payload, component="training", run_id=self.run_id
        )

    def phase_done(self, phase: str, *, iterations: int, reason: str, loss: float | None) -> None:
        status = "error" if reason == "non-finite" else "success"
        record_structured_event(
            self.settings,
            "train.phase",
            payload={"phase": phase, "iterations": iterations, "reason": reason, "loss": loss},
            status=status,
            level="warn" if status == "error" else "info",
            component="training",
            run_id=self.run_id,
        )


__all__ = ["ProgressMonitor", "TermsFunction", "TrackedLoss"]
