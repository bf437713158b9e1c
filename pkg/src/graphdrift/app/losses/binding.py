"""Assignment of network outputs to graph edges."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch

from graphdrift.app.nn import DTYPE, Activation, JetTensors, Mlp, init_mlp, jet_tensors
from graphdrift.app.nn.mlp import forward_tensor
from graphdrift.domain.graph import MetricGraph


class LossError(ValueError):
    """Raised when a misfit term is requested for an invalid configuration."""


@dataclass(frozen=True, eq=False)
class EdgeNetBinding:
    """Maps every edge to ``(net index, output index)``.

    Per-edge mode holds one single-output net per edge; shared mode holds one
    net whose ``i``-th output approximates the density on edge ``i``.
    """

    nets: tuple[Mlp, ...]
    slots: tuple[tuple[int, int], ...]
    shared: bool = False

    def __post_init__(self) -> None:
        if not self.nets:
            raise LossError("loss.binding: at least one network is required")
        for edge_id, (net_index, output_index) in enumerate(self.slots):
            if not 0 <= net_index < len(self.nets):
                raise LossError(f"loss.binding: edge {edge_id} refers to missing net {net_index}")
            if not 0 <= output_index < self.nets[net_index].n_outputs:
                raise LossError(f"loss.binding: edge {edge_id} refers to missing output {output_index}")
        if len(set(self.slots)) != len(self.slots):
            raise LossError("loss.binding: two edges share one network output")

    @classmethod
    def per_edge(
        cls,
        graph: MetricGraph,
        hidden: Sequence[int],
        seed: int | None,
        activation: Activation | str = Activation.TANH,
    ) -> "EdgeNetBinding":
        seeds = np.random.SeedSequence(seed).spawn(graph.n_edges)
        sizes = (2, *hidden, 1)
        nets = tuple(init_mlp(sizes, int(s.generate_state(1)[0]), activation) for s in seeds)
        return cls(nets=nets, slots=tuple((e, 0) for e in range(graph.n_edges)), shared=False)

    @classmethod
    def shared_net(
        cls,
        graph: MetricGraph,
        hidden: Sequence[int],
        seed: int | None,
        activation: Activation | str = Activation.TANH,
    ) -> "EdgeNetBinding":
        if not graph.has_equal_lengths():
            raise LossError("loss.shared_lengths: one shared network requires equal edge lengths")
        net = init_mlp((2, *hidden, graph.n_edges), seed, activation)
        return cls(nets=(net,), slots=tuple((0, e) for e in range(graph.n_edges)), shared=True)

    @property
    def n_edges(self) -> int:
        return len(self.slots)

    @property
    def offsets(self) -> tuple[int, ...]:
        positions = [0]
        for net in self.nets:
            positions.append(positions[-1] + net.n_params)
        return tuple(positions)

    @property
    def n_params(self) -> int:
        return self.offsets[-1]

    def net_slice(self, net_index: int) -> slice:
        offsets = self.offsets
        return slice(offsets[net_index], offsets[net_index + 1])

    def edge_slice(self, edge_id: int) -> slice:
        return self.net_slice(self.slots[edge_id][0])

    def check_graph(self, graph: MetricGraph) -> None:
        if self.n_edges != graph.n_edges:
            raise LossError(f"loss.binding: {self.n_edges} edges bound, graph has {graph.n_edges}")

    def flatten(self) -> np.ndarray:
        return np.concatenate([net.params for net in self.nets])

    def with_params(self, theta: np.ndarray) -> "EdgeNetBinding":
        theta = np.asarray(theta, dtype=np.float64)
        if theta.size != self.n_params:
            raise LossError(f"loss.binding: expected {self.n_params} parameters, got {theta.size}")
        nets = tuple(net.with_params(theta[self.net_slice(i)]) for i, net in enumerate(self.nets))
        return EdgeNetBinding(nets=nets, slots=self.slots, shared=self.shared)

    def restrict(self, theta: torch.Tensor, edge_id: int) -> torch.Tensor:
        """Detach every parameter block except the one driving ``edge_id``."""

        if self.shared:
            raise LossError("loss.restrict: edge restriction needs one network per edge")
        keep = self.slots[edge_id][0]
        pieces = [
            theta[self.net_slice(i)] if i == keep else theta[self.net_slice(i)].detach() for i in range(len(self.nets))
        ]
        return torch.cat(pieces)


class NetworkField:
    """Edge densities of a binding evaluated at a (possibly differentiable) parameter tensor."""

    def __init__(self, binding: EdgeNetBinding, theta: torch.Tensor | None = None) -> None:
        self.binding = binding
        if theta is None:
            theta = torch.from_numpy(binding.flatten())
        self.theta = theta

    @classmethod
    def from_binding(cls, binding: EdgeNetBinding) -> "NetworkField":
        return cls(binding)

    def _net_params(self, edge_id: int) -> tuple[Mlp, torch.Tensor, int]:
        net_index, output_index = self.binding.slots[edge_id]
        return self.binding.nets[net_index], self.theta[self.binding.net_slice(net_index)], output_index

    def jet(self, edge_id: int, t, x) -> JetTensors:
        net, theta, output_index = self._net_params(edge_id)
        return jet_tensors(net.layer_sizes, net.activation, theta, _tensor(t), _tensor(x)).column(output_index)

    def value(self, edge_id: int, t, x) -> torch.Tensor:
        net, theta, output_index = self._net_params(edge_id)
        return forward_tensor(net.layer_sizes, net.activation, theta, _tensor(t), _tensor(x))[:, output_index]


def _tensor(values) -> torch.Tensor:
    if isinstance(values, torch.Tensor):
        return values.to(DTYPE)
    return torch.as_tensor(np.array(values, dtype=np.float64), dtype=DTYPE)


__all__ = ["EdgeNetBinding", "LossError", "NetworkField"]
