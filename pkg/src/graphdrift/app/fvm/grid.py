"""Control-volume geometry on a metric graph."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from graphdrift.domain.graph import MetricGraph


class GridError(ValueError):
    """Raised when a finite-volume grid cannot be built."""


@dataclass(frozen=True, eq=False)
class FvGrid:
    """Equidistant edge grids with interior cells and vertex patches.

    Edge ``e`` with ``n_e`` cells has nodes ``0 = x_{-1/2} < ... < x_{n_e+1/2} = l_e``
    and mesh size ``h_e = l_e / (n_e + 1)``. Cells ``1..n_e-1`` are unknowns of
    their own; the boundary cells ``0`` and ``n_e`` belong to the patches of
    the origin and terminal vertex. Unknowns are ordered edge by edge
    (interior cells), followed by one unknown per vertex.
    """

    graph: MetricGraph
    cells: tuple[int, ...]
    spacing: tuple[float, ...]
    offsets: tuple[int, ...]
    patch_measure: tuple[float, ...]

    @property
    def n_interior(self) -> int:
        return int(sum(n - 1 for n in self.cells))

    @property
    def n_unknowns(self) -> int:
        return self.n_interior + self.graph.n_vertices

    @property
    def min_spacing(self) -> float:
        return float(min(self.spacing))

    def vertex_index(self, vertex_id: int) -> int:
        return self.n_interior + vertex_id

    def interior_slice(self, edge_id: int) -> slice:
        start = self.offsets[edge_id]
        return slice(start, start + self.cells[edge_id] - 1)

    def edge_columns(self, edge_id: int) -> np.ndarray:
        """Unknown indices of cells ``0..n_e`` along the edge (vertex aliases at both ends)."""

        edge = self.graph.edge(edge_id)
        inner = np.arange(self.offsets[edge_id], self.offsets[edge_id] + self.cells[edge_id] - 1)
        return np.concatenate(([self.vertex_index(edge.origin)], inner, [self.vertex_index(edge.terminal)]))

    def nodes(self, edge_id: int) -> np.ndarray:
        """Cell interfaces ``x_{-1/2}, ..., x_{n_e+1/2}``."""

        n = self.cells[edge_id]
        return np.linspace(0.0, self.graph.edge(edge_id).length, n + 2)

    def faces(self, edge_id: int) -> np.ndarray:
        """Interior interfaces ``x_{1/2}, ..., x_{n_e-1/2}`` where numerical fluxes live."""

        return self.nodes(edge_id)[1:-1]

    def cell_of(self, edge_id: int, xs: np.ndarray) -> np.ndarray:
        """Cell index ``0..n_e`` containing each coordinate."""

        h = self.spacing[edge_id]
        n = self.cells[edge_id]
        return np.clip(np.floor(np.asarray(xs, dtype=np.float64) / h).astype(np.int64), 0, n)

    def mass_weights(self) -> np.ndarray:
        """Control-volume measures in unknown order (the diagonal of ``M``)."""

        weights = np.empty(self.n_unknowns)
        for edge in self.graph.edges:
            weights[self.interior_slice(edge.edge_id)] = self.spacing[edge.edge_id]
        weights[self.n_interior :] = self.patch_measure
        return weights

    def total_measure(self) -> float:
        return float(self.mass_weights().sum())


def build_grid(graph: MetricGraph, cells_per_edge: int | Mapping[int, int]) -> FvGrid:
    if isinstance(cells_per_edge, Mapping):
        missing = [e.edge_id for e in graph.edges if e.edge_id not in cells_per_edge]
        if missing:
            raise GridError(f"fvm.grid_cells: no cell count for edges {missing}")
        cells = tuple(int(cells_per_edge[e.edge_id]) for e in graph.edges)
    else:
        cells = tuple(int(cells_per_edge) for _ in graph.edges)
    for edge_id, n in enumerate(cells):
        if n < 2:
            raise GridError(f"fvm.grid_cells: edge {edge_id} needs at least 2 cells, got {n}")

    spacing = tuple(edge.length / (n + 1) for edge, n in zip(graph.edges, cells))
    offsets: list[int] = []
    position = 0
    for n in cells:
        offsets.append(position)
        position += n - 1
    patch = tuple(float(sum(spacing[e] for e in vertex.incident)) for vertex in graph.vertices)
    return FvGrid(graph=graph, cells=cells, spacing=spacing, offsets=tuple(offsets), patch_measure=patch)


__all__ = ["FvGrid", "GridError", "build_grid"]
