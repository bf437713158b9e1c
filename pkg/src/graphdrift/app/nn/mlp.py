"""Feed-forward networks with exact second-order input jets.

Parameters live in one flat float64 vector, layer-major with the weights of
a layer (row-major ``n_l x n_{l-1}``) before its biases. The activation is
applied on every layer, the output layer included.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, Sequence

import numpy as np
import torch

DTYPE = torch.float64


class NetworkError(ValueError):
    """Raised for inconsistent network shapes or parameters."""


class NonFiniteLossError(RuntimeError):
    """Raised when a loss or its gradient is not finite."""


class Activation(str, Enum):
    TANH = "tanh"
    SIGMOID = "sigmoid"


@dataclass(frozen=True)
class JetTensors:
    """Value and input derivatives, each of shape ``(N, n_outputs)``."""

    value: torch.Tensor
    dt: torch.Tensor
    dx: torch.Tensor
    dxx: torch.Tensor

    def column(self, index: int) -> "JetTensors":
        return JetTensors(self.value[:, index], self.dt[:, index], self.dx[:, index], self.dxx[:, index])


@dataclass(frozen=True, eq=False)
class EvalJet:
    value: np.ndarray
    dt: np.ndarray
    dx: np.ndarray
    dxx: np.ndarray

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(channel)) for channel in (self.value, self.dt, self.dx, self.dxx))


def param_count(layer_sizes: Sequence[int]) -> int:
    return int(sum(n_out * n_in + n_out for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:])))


@dataclass(frozen=True, eq=False)
class Mlp:
    layer_sizes: tuple[int, ...]
    activation: Activation
    params: np.ndarray

    def __post_init__(self) -> None:
        sizes = tuple(int(n) for n in self.layer_sizes)
        if len(sizes) < 2:
            raise NetworkError("nn.layers: need at least an input and an output layer")
        if sizes[0] != 2:
            raise NetworkError(f"nn.layers: input layer must have 2 neurons (t, x), got {sizes[0]}")
        if any(n < 1 for n in sizes):
            raise NetworkError(f"nn.layers: layer sizes must be positive, got {list(sizes)}")
        params = np.asarray(self.params, dtype=np.float64).ravel()
        if params.size != param_count(sizes):
            raise NetworkError(f"nn.params: expected {param_count(sizes)} parameters, got {params.size}")
        if not np.all(np.isfinite(params)):
            raise NetworkError("nn.params: parameters must be finite")
        object.__setattr__(self, "layer_sizes", sizes)
        object.__setattr__(self, "activation", Activation(self.activation))
        object.__setattr__(self, "params", params)

    @property
    def n_params(self) -> int:
        return int(self.params.size)

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]

    def with_params(self, params: np.ndarray) -> "Mlp":
        return Mlp(self.layer_sizes, self.activation, np.array(params, dtype=np.float64))

    def weights(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(w.numpy(), b.numpy()) for w, b in iter_layers(self.layer_sizes, torch.from_numpy(self.params))]


def iter_layers(layer_sizes: Sequence[int], theta: torch.Tensor) -> Iterator[tuple[torch.Tensor, torch.Tensor]]:
    """Yield ``(W, b)`` views of the flat parameter tensor."""

    position = 0
    for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        weight = theta[position : position + n_out * n_in].reshape(n_out, n_in)
        position += n_out * n_in
        bias = theta[position : position + n_out]
        position += n_out
        yield weight, bias


def init_mlp(layer_sizes: Sequence[int], seed: int | None, activation: Activation | str = Activation.TANH) -> Mlp:
    """Glorot-uniform weights and zero biases from a seeded numpy generator."""

    sizes = tuple(int(n) for n in layer_sizes)
    if len(sizes) < 2 or sizes[0] != 2 or any(n < 1 for n in sizes):
        raise NetworkError(f"nn.layers: invalid layer sizes {list(sizes)}")
    rng = np.random.default_rng(seed)
    blocks: list[np.ndarray] = []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (n_in + n_out))
        blocks.append(rng.uniform(-bound, bound, size=(n_out, n_in)).ravel())
        blocks.append(np.zeros(n_out))
    return Mlp(sizes, Activation(activation), np.concatenate(blocks))


def _activate(activation: Activation, z: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Activation value with its first and second derivative."""

    if activation is Activation.TANH:
        s = torch.tanh(z)
        d1 = 1.0 - s * s
        return s, d1, -2.0 * s * d1
    s = torch.sigmoid(z)
    d1 = s * (1.0 - s)
    return s, d1, d1 * (1.0 - 2.0 * s)


def _inputs(t, x) -> torch.Tensor:
    t = torch.as_tensor(t, dtype=DTYPE).reshape(-1)
    x = torch.as_tensor(x, dtype=DTYPE).reshape(-1)
    t, x = torch.broadcast_tensors(t, x)
    return torch.stack((t, x), dim=1)


def forward_tensor(layer_sizes: Sequence[int], activation: Activation, theta: torch.Tensor, t, x) -> torch.Tensor:
    a = _inputs(t, x)
    for weight, bias in iter_layers(layer_sizes, theta):
        a, _, _ = _activate(activation, a @ weight.T + bias)
    return a


def jet_tensors(layer_sizes: Sequence[int], activation: Activation, theta: torch.Tensor, t, x) -> JetTensors:
    """Propagate the second-order jet in ``(t, x)`` through every layer.

    Only ``x`` is differentiated twice, so the jet carries ``a``, ``a_t``,
    ``a_x`` and ``a_xx``. Gradients with respect to ``theta`` flow through all
    four channels.
    """

    a = _inputs(t, x)
    a_t = torch.zeros_like(a)
    a_t[:, 0] = 1.0
    a_x = torch.zeros_like(a)
    a_x[:, 1] = 1.0
    a_xx = torch.zeros_like(a)
    for weight, bias in iter_layers(layer_sizes, theta):
        z = a @ weight.T + bias
        z_t = a_t @ weight.T
        z_x = a_x @ weight.T
        z_xx = a_xx @ weight.T
        s, d1, d2 = _activate(activation, z)
        a, a_t, a_x, a_xx = s, d1 * z_t, d1 * z_x, d2 * z_x * z_x + d1 * z_xx
    return JetTensors(a, a_t, a_x, a_xx)


def forward(mlp: Mlp, t, x) -> np.ndarray:
    """Network outputs of shape ``(N, n_outputs)``."""

    with torch.no_grad():
        out = forward_tensor(mlp.layer_sizes, mlp.activation, torch.from_numpy(mlp.params), t, x)
    return out.numpy()


def eval_jet(mlp: Mlp, t, x, output_index: int = 0) -> EvalJet:
    if not 0 <= output_index < mlp.n_outputs:
        raise NetworkError(f"nn.output_index: {output_index} outside [0, {mlp.n_outputs})")
    with torch.no_grad():
        jet = jet_tensors(mlp.layer_sizes, mlp.activation, torch.from_numpy(mlp.params), t, x).column(output_index)
    return EvalJet(jet.value.numpy(), jet.dt.numpy(), jet.dx.numpy(), jet.dxx.numpy())


def param_gradient(loss_fn: Callable[[torch.Tensor], torch.Tensor], theta: np.ndarray) -> tuple[float, np.ndarray]:
    """Loss value and gradient with respect to the flat trainable vector ``theta``."""

    parameters = torch.tensor(np.asarray(theta, dtype=np.float64), dtype=DTYPE, requires_grad=True)
    loss = loss_fn(parameters)
    value = float(loss.detach())
    if not np.isfinite(value):
        raise NonFiniteLossError(f"nn.non_finite_loss: loss evaluated to {value}")
    (grad,) = torch.autograd.grad(loss, parameters, allow_unused=True)
    gradient = np.zeros_like(theta, dtype=np.float64) if grad is None else grad.detach().numpy().copy()
    if not np.all(np.isfinite(gradient)):
        raise NonFiniteLossError("nn.non_finite_gradient: gradient has non-finite entries")
    return value, gradient


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
