"""Metric graph domain exports."""

from .builder import EdgeSpec, build_graph, model_graph
from .value_objects import Edge, GraphError, MetricGraph, Vertex, VertexKind

__all__ = [
    "Edge",
    "EdgeSpec",
    "GraphError",
    "MetricGraph",
    "Vertex",
    "VertexKind",
    "build_graph",
    "model_graph",
]
