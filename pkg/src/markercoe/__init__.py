"""Marker orbit equivalences, periodic measures and groupoid homology of edge shifts."""

from .graph import Graph, GraphError, classify, from_adjacency, higman_thompson, rose, subdivided_circle, theta
from .marker import MarkerCoe, MarkerData, MarkerError, check_overlap_conditions, f_phi, type_one, type_two
from .words import CyclicClass, EpPoint, cyclic_class, enumerate_primitive_classes

__all__ = [
    "CyclicClass",
    "EpPoint",
    "Graph",
    "GraphError",
    "MarkerCoe",
    "MarkerData",
    "MarkerError",
    "check_overlap_conditions",
    "classify",
    "cyclic_class",
    "enumerate_primitive_classes",
    "f_phi",
    "from_adjacency",
    "higman_thompson",
    "rose",
    "subdivided_circle",
    "theta",
    "type_one",
    "type_two",
]
