"""Graph C*-algebras, their gauge and modular spectral triples, and index pairings."""

from .algebra import Element, ElementMatrix, adjoint, expectation, gauge_act, gauge_component, multiply, normal_form
from .expr import parse_element
from .graph import DirectedGraph, Path, cuntz_graph, cycle_graph, circle_graph, ktheory, load_graph, paths_with_range
from .scalar import GaussianRational
from .traces import CuntzKMS, InducedTrace, NoFaithfulTrace, kms_check, solve_graph_trace

__version__ = "0.1.0"

__all__ = [
    "CuntzKMS",
    "DirectedGraph",
    "Element",
    "ElementMatrix",
    "GaussianRational",
    "InducedTrace",
    "NoFaithfulTrace",
    "Path",
    "adjoint",
    "circle_graph",
    "cuntz_graph",
    "cycle_graph",
    "expectation",
    "gauge_act",
    "gauge_component",
    "kms_check",
    "ktheory",
    "load_graph",
    "multiply",
    "normal_form",
    "parse_element",
    "paths_with_range",
    "solve_graph_trace",
]
