"""Training schemes and their configuration."""

from .config import Schedule, Scheme, SnapshotMode, StepBudget, TrainConfig, TrainingError
from .monitor import ProgressMonitor, TrackedLoss
from .report import TrainReport
from .service import snapshot_times, train, train_edgepinn, train_graphpinn_continuous, train_graphpinn_discrete

__all__ = [
    "ProgressMonitor",
    "Schedule",
    "Scheme",
    "SnapshotMode",
    "StepBudget",
    "TrackedLoss",
    "TrainConfig",
    "TrainReport",
    "TrainingError",
    "snapshot_times",
    "train",
    "train_edgepinn",
    "train_graphpinn_continuous",
    "train_graphpinn_discrete",
]
