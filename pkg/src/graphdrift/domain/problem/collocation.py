"""Collocation point sets for the neural training schemes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from graphdrift.domain.graph import MetricGraph

from .spec import ProblemSpec


class CollocationError(ValueError):
    """Raised for invalid collocation requests."""


class SamplingMode(str, Enum):
    UNIFORM = "uniform"
    EQUIDISTANT = "equidistant"


@dataclass(frozen=True)
class CollocationSizes:
    interior: int = 4000
    initial: int = 1000
    boundary: int = 1000

    def __post_init__(self) -> None:
        for name in ("interior", "initial", "boundary"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise CollocationError(f"collocation.size: {name} must be a positive integer, got {value}")

    def to_dict(self) -> dict[str, int]:
        return {"interior": self.interior, "initial": self.initial, "boundary": self.boundary}


@dataclass(frozen=True, eq=False)
class CollocationSet:
    """Per-edge interior and initial points plus per-vertex time snapshots."""

    interior_t: tuple[np.ndarray, ...]
    interior_x: tuple[np.ndarray, ...]
    initial_x: tuple[np.ndarray, ...]
    snapshots: tuple[np.ndarray, ...]
    sizes: CollocationSizes
    mode: SamplingMode
    seed: int | None

    def interior(self, edge_id: int) -> tuple[np.ndarray, np.ndarray]:
        return self.interior_t[edge_id], self.interior_x[edge_id]

    def vertex_times(self, vertex_id: int) -> np.ndarray:
        return self.snapshots[vertex_id]

    def same_points(self, other: "CollocationSet") -> bool:
        groups = ("interior_t", "interior_x", "initial_x", "snapshots")
        return all(
            len(getattr(self, name)) == len(getattr(other, name))
            and all(np.array_equal(a, b) for a, b in zip(getattr(self, name), getattr(other, name)))
            for name in groups
        )


def sample_collocation(
    graph: MetricGraph,
    problem: ProblemSpec,
    sizes: CollocationSizes,
    mode: SamplingMode | str = SamplingMode.UNIFORM,
    seed: int | None = None,
    *,
    share_edges: bool = False,
) -> CollocationSet:
    """Draw collocation points in ``(0, T) x [0, l_e]``, ``[0, l_e]`` and ``(0, T)``.

    Randomness is consumed edge by edge (interior t, interior x, initial x) and
    then vertex by vertex, so a fixed seed reproduces identical sets.
    ``share_edges`` reuses the first edge's points everywhere, which requires
    equal edge lengths.
    """

    mode = SamplingMode(mode)
    horizon = problem.horizon
    if share_edges and not graph.has_equal_lengths():
        raise CollocationError("collocation.shared: shared points require equal edge lengths")
    rng = np.random.default_rng(seed)

    interior_t: list[np.ndarray] = []
    interior_x: list[np.ndarray] = []
    initial_x: list[np.ndarray] = []
    for edge in graph.edges:
        if share_edges and edge.edge_id > 0:
            interior_t.append(interior_t[0])
            interior_x.append(interior_x[0])
            initial_x.append(initial_x[0])
            continue
        if mode is SamplingMode.UNIFORM:
            t = _open_uniform(rng, horizon, sizes.interior)
            x = rng.uniform(0.0, edge.length, sizes.interior)
            x0 = rng.uniform(0.0, edge.length, sizes.initial)
        else:
            t, x = _tensor_grid(horizon, edge.length, sizes.interior)
            x0 = np.linspace(0.0, edge.length, sizes.initial)
        interior_t.append(t)
        interior_x.append(x)
        initial_x.append(x0)

    snapshots: list[np.ndarray] = []
    for _vertex in graph.vertices:
        if mode is SamplingMode.UNIFORM:
            snapshots.append(_open_uniform(rng, horizon, sizes.boundary))
        else:
            snapshots.append(_open_linspace(horizon, sizes.boundary))

    for array in interior_t + interior_x + initial_x + snapshots:
        array.setflags(write=False)
    return CollocationSet(
        interior_t=tuple(interior_t),
        interior_x=tuple(interior_x),
        initial_x=tuple(initial_x),
        snapshots=tuple(snapshots),
        sizes=sizes,
        mode=mode,
        seed=seed,
    )


def _open_uniform(rng: np.random.Generator, horizon: float, count: int) -> np.ndarray:
    values = rng.uniform(0.0, horizon, count)
    # uniform() may return the closed left end
    values[values <= 0.0] = 0.5 * horizon
    return values


def _open_linspace(horizon: float, count: int) -> np.ndarray:
    return horizon * np.arange(1, count + 1, dtype=np.float64) / (count + 1)


def _tensor_grid(horizon: float, length: float, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor grid with exactly ``count`` points: interior times, endpoint-inclusive x.

    ``isqrt(count)`` time slices carry ``count // n_times`` equidistant x each;
    the first ``count % n_times`` slices take one extra point.
    """

    n_times = max(1, math.isqrt(count))
    n_space, extra = divmod(count, n_times)
    ts: list[np.ndarray] = []
    xs: list[np.ndarray] = []
    for slice_index, time in enumerate(_open_linspace(horizon, n_times)):
        points = np.linspace(0.0, length, n_space + (1 if slice_index < extra else 0))
        ts.append(np.full(points.size, time))
        xs.append(points)
    return np.concatenate(ts), np.concatenate(xs)


__all__ = [
    "CollocationError",
    "CollocationSet",
    "CollocationSizes",
    "SamplingMode",
    "sample_collocation",
]
