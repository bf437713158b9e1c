"""Value objects describing a directed metric graph."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Hashable, Iterator


class GraphError(ValueError):
    """Raised when an edge list does not describe an admissible metric graph."""


class VertexKind(str, Enum):
    INTERIOR = "interior"
    EXTERIOR = "exterior"


@dataclass(frozen=True)
class Edge:
    """Directed edge ``origin -> terminal`` identified with the interval ``[0, length]``."""

    edge_id: int
    origin: int
    terminal: int
    length: float

    def endpoint_coordinate(self, vertex: int) -> float:
        if vertex == self.origin:
            return 0.0
        if vertex == self.terminal:
            return self.length
        raise GraphError(f"graph.not_incident: vertex {vertex} is not an endpoint of edge {self.edge_id}")


@dataclass(frozen=True)
class Vertex:
    vertex_id: int
    name: Hashable
    incoming: tuple[int, ...]
    outgoing: tuple[int, ...]

    @property
    def kind(self) -> VertexKind:
        if self.incoming and self.outgoing:
            return VertexKind.INTERIOR
        return VertexKind.EXTERIOR

    @property
    def incident(self) -> tuple[int, ...]:
        return self.incoming + self.outgoing

    @property
    def degree(self) -> int:
        return len(self.incoming) + len(self.outgoing)


@dataclass(frozen=True)
class MetricGraph:
    """Immutable directed graph with edge lengths and vertex classification.

    Vertex and edge identifiers are dense integers assigned in input order.
    """

    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def interior_vertices(self) -> tuple[int, ...]:
        return tuple(v.vertex_id for v in self.vertices if v.kind is VertexKind.INTERIOR)

    @property
    def exterior_vertices(self) -> tuple[int, ...]:
        return tuple(v.vertex_id for v in self.vertices if v.kind is VertexKind.EXTERIOR)

    @property
    def total_length(self) -> float:
        return float(sum(edge.length for edge in self.edges))

    def vertex(self, vertex_id: int) -> Vertex:
        return self.vertices[vertex_id]

    def edge(self, edge_id: int) -> Edge:
        return self.edges[edge_id]

    def vertex_id(self, name: Hashable) -> int:
        for vertex in self.vertices:
            if vertex.name == name:
                return vertex.vertex_id
        raise GraphError(f"graph.unknown_vertex: {name!r}")

    def is_interior(self, vertex_id: int) -> bool:
        return self.vertices[vertex_id].kind is VertexKind.INTERIOR

    def incident_edges(self, vertex_id: int) -> tuple[int, ...]:
        return self.vertices[vertex_id].incident

    def normal(self, edge_id: int, vertex_id: int) -> int:
        """Outer normal ``n_e(v)``: -1 at the origin, +1 at the terminal vertex."""

        edge = self.edges[edge_id]
        if vertex_id == edge.origin:
            return -1
        if vertex_id == edge.terminal:
            return 1
        raise GraphError(f"graph.not_incident: vertex {vertex_id} is not an endpoint of edge {edge_id}")

    def iter_incidences(self) -> Iterator[tuple[int, int, int]]:
        """Yield ``(vertex_id, edge_id, normal)`` for every vertex-edge incidence."""

        for vertex in self.vertices:
            for edge_id in vertex.incident:
                yield vertex.vertex_id, edge_id, self.normal(edge_id, vertex.vertex_id)

    def edge_list(self) -> list[tuple[Hashable, Hashable, float]]:
        return [(self.vertices[e.origin].name, self.vertices[e.terminal].name, e.length) for e in self.edges]

    def vertex_names(self) -> list[Hashable]:
        return [v.name for v in self.vertices]

    def has_equal_lengths(self) -> bool:
        lengths = {edge.length for edge in self.edges}
        return len(lengths) == 1

    def describe(self) -> dict[str, object]:
        return {
            "vertices": [str(v.name) for v in self.vertices],
            "edges": [
                {"origin": str(self.vertices[e.origin].name), "terminal": str(self.vertices[e.terminal].name), "length": e.length}
                for e in self.edges
            ],
            "interior": [str(self.vertices[v].name) for v in self.interior_vertices],
            "exterior": [str(self.vertices[v].name) for v in self.exterior_vertices],
        }


__all__ = ["Edge", "GraphError", "MetricGraph", "Vertex", "VertexKind"]
