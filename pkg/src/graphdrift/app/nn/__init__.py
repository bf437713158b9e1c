"""Neural network substrate for the training schemes."""

from .mlp import (
    DTYPE,
    Activation,
    EvalJet,
    JetTensors,
    Mlp,
    NetworkError,
    NonFiniteLossError,
    eval_jet,
    forward,
    forward_tensor,
    init_mlp,
    iter_layers,
    jet_tensors,
    param_count,
    param_gradient,
)

__all__ = [
    "Activation",
    "DTYPE",
    "EvalJet",
    "JetTensors",
    "Mlp",
    "NetworkError",
    "NonFiniteLossError",
    "eval_jet",
    "forward",
    "forward_tensor",
    "init_mlp",
    "iter_layers",
    "jet_tensors",
    "param_count",
    "param_gradient",
]
