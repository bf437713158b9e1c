"""Problem data and collocation exports."""

from .collocation import CollocationError, CollocationSet, CollocationSizes, SamplingMode, sample_collocation
from .functions import MOBILITIES, Constant, Mobility, PotentialGradient, SineProfile
from .spec import ProblemError, ProblemSpec

__all__ = [
    "CollocationError",
    "CollocationSet",
    "CollocationSizes",
    "Constant",
    "MOBILITIES",
    "Mobility",
    "PotentialGradient",
    "ProblemError",
    "ProblemSpec",
    "SamplingMode",
    "SineProfile",
    "sample_collocation",
]
