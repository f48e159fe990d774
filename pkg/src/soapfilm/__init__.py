"""Watertight lattice-structure meshes from lattice graphs via nodal soap films."""

from .graph import LatticeGraph, Node, Edge, load_graph, node_star
from .pipeline import PipelineConfig, build_lattice, run_star

__all__ = ["LatticeGraph", "Node", "Edge", "load_graph", "node_star",
           "PipelineConfig", "build_lattice", "run_star"]
__version__ = "0.1.0"
