"""Network parameter checkpoints stored as npz archives."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from packaging.version import InvalidVersion, Version

from graphdrift.app.losses import EdgeNetBinding
from graphdrift.app.nn import Mlp

FORMAT_VERSION = Version("1.0")


class CheckpointError(RuntimeError):
    """Raised when a checkpoint cannot be read."""


def save_mlp(path: Path, mlp: Mlp) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp.npz")
    np.savez(
        tmp,
        format_version=np.array(str(FORMAT_VERSION)),
        layer_sizes=np.asarray(mlp.layer_sizes, dtype=np.int64),
        activation=np.array(mlp.activation.value),
        theta=mlp.params,
    )
    tmp.replace(path)
    return path


def load_mlp(path: Path) -> Mlp:
    if not path.exists():
        raise CheckpointError(f"checkpoint.missing: {path}")
    with np.load(path, allow_pickle=False) as archive:
        try:
            version = Version(str(archive["format_version"]))
        except (KeyError, InvalidVersion) as exc:
            raise CheckpointError(f"checkpoint.format: {path} has no readable format version") from exc
        if version.major != FORMAT_VERSION.major:
            raise CheckpointError(f"checkpoint.format: unsupported version {version} in {path}")
        return Mlp(
            layer_sizes=tuple(int(n) for n in archive["layer_sizes"]),
            activation=str(archive["activation"]),
            params=np.array(archive["theta"], dtype=np.float64),
        )


def step_directory(root: Path, scheme: str, step: int) -> Path:
    return root / "checkpoints" / scheme / f"step_{step}"


def save_step(root: Path, scheme: str, step: int, binding: EdgeNetBinding) -> Path:
    """Write one file per edge network of a time step."""

    directory = step_directory(root, scheme, step)
    for index, net in enumerate(binding.nets):
        save_mlp(directory / f"edge_{index}.npz", net)
    return directory


def load_step(root: Path, scheme: str, step: int, template: EdgeNetBinding) -> EdgeNetBinding:
    directory = step_directory(root, scheme, step)
    nets = tuple(load_mlp(directory / f"edge_{index}.npz") for index in range(len(template.nets)))
    for net, reference in zip(nets, template.nets):
        if net.layer_sizes != reference.layer_sizes:
            raise CheckpointError(
                f"checkpoint.shape: {directory} holds sizes {list(net.layer_sizes)}, expected {list(reference.layer_sizes)}"
            )
    return EdgeNetBinding(nets=nets, slots=template.slots, shared=template.shared)


def completed_steps(root: Path, scheme: str, n_nets: int) -> int:
    """Number of leading time steps whose checkpoints are all present."""

    step = 0
    while True:
        directory = step_directory(root, scheme, step + 1)
        if not all((directory / f"edge_{index}.npz").exists() for index in range(n_nets)):
            return step
        step += 1


__all__ = [
    "CheckpointError",
    "FORMAT_VERSION",
    "completed_steps",
    "load_mlp",
    "load_step",
    "save_mlp",
    "save_step",
    "step_directory",
]
