"""Construction and validation of metric graphs from edge lists."""

from __future__ import annotations

import math
from typing import Hashable, Iterable, Sequence

import networkx as nx

from .value_objects import Edge, GraphError, MetricGraph, Vertex, VertexKind

EdgeSpec = tuple[Hashable, Hashable, float]


def build_graph(edge_list: Iterable[EdgeSpec], vertices: Sequence[Hashable] | None = None) -> MetricGraph:
    """Build a :class:`MetricGraph` and classify its vertices.

    ``vertices`` fixes the vertex order; otherwise vertices are numbered in
    order of first appearance along the edge list.
    """

    specs = [tuple(item) for item in edge_list]
    if not specs:
        raise GraphError("graph.empty: edge list must not be empty")

    names: list[Hashable] = list(vertices) if vertices is not None else []
    if len(set(names)) != len(names):
        raise GraphError("graph.duplicate_vertex: vertex names must be unique")
    index: dict[Hashable, int] = {name: i for i, name in enumerate(names)}

    raw_edges: list[tuple[int, int, float]] = []
    for position, spec in enumerate(specs):
        if len(spec) != 3:
            raise GraphError(f"graph.invalid_edge: edge {position} must be (origin, terminal, length)")
        origin, terminal, length = spec
        if origin == terminal:
            raise GraphError(f"graph.self_loop: edge {position} starts and ends in {origin!r}")
        length = float(length)
        if not math.isfinite(length) or length <= 0.0:
            raise GraphError(f"graph.invalid_length: edge {position} has length {length}")
        for name in (origin, terminal):
            if name not in index:
                if vertices is not None:
                    raise GraphError(f"graph.unknown_vertex: {name!r} is not declared")
                index[name] = len(names)
                names.append(name)
        raw_edges.append((index[origin], index[terminal], length))

    incoming: list[list[int]] = [[] for _ in names]
    outgoing: list[list[int]] = [[] for _ in names]
    for edge_id, (origin, terminal, _) in enumerate(raw_edges):
        outgoing[origin].append(edge_id)
        incoming[terminal].append(edge_id)

    for vertex_id, name in enumerate(names):
        if not incoming[vertex_id] and not outgoing[vertex_id]:
            raise GraphError(f"graph.disconnected: vertex {name!r} has no incident edge")

    topology = nx.MultiDiGraph()
    topology.add_nodes_from(range(len(names)))
    topology.add_edges_from((origin, terminal) for origin, terminal, _ in raw_edges)
    if not nx.is_weakly_connected(topology):
        raise GraphError("graph.disconnected: graph has more than one connected component")

    graph_vertices = tuple(
        Vertex(vertex_id=i, name=name, incoming=tuple(incoming[i]), outgoing=tuple(outgoing[i]))
        for i, name in enumerate(names)
    )
    graph_edges = tuple(
        Edge(edge_id=i, origin=origin, terminal=terminal, length=length)
        for i, (origin, terminal, length) in enumerate(raw_edges)
    )

    for edge in graph_edges:
        if (
            graph_vertices[edge.origin].kind is VertexKind.EXTERIOR
            and graph_vertices[edge.terminal].kind is VertexKind.EXTERIOR
        ):
            raise GraphError(
                "graph.closed_system: edge "
                f"{edge.edge_id} ({names[edge.origin]!r} -> {names[edge.terminal]!r}) joins two exterior vertices"
            )

    return MetricGraph(vertices=graph_vertices, edges=graph_edges)


def model_graph(length: float = 1.0) -> MetricGraph:
    """The five-edge, six-vertex network used by the reference experiments."""

    return build_graph(
        [
            ("v1", "v3", length),
            ("v2", "v3", length),
            ("v3", "v4", length),
            ("v4", "v5", length),
            ("v4", "v6", length),
        ],
        vertices=["v1", "v2", "v3", "v4", "v5", "v6"],
    )


__all__ = ["EdgeSpec", "build_graph", "model_graph"]
