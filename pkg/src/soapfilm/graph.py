"""Lattice graph ingestion, validation and per-node views."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable

import numpy as np

# Two strut directions closer than this (radians) make a degenerate star.
DIRECTION_TOLERANCE = 1e-6


class GraphError(ValueError):
    """Invalid lattice graph. ``element`` names the offending node/edge."""

    def __init__(self, message, element=None):
        super().__init__(message)
        self.element = element

    def to_dict(self):
        return {"error": "graph", "message": str(self), "element": self.element}


@dataclass(frozen=True)
class Node:
    id: int
    position: tuple

    @property
    def xyz(self) -> np.ndarray:
        return np.asarray(self.position, dtype=float)


@dataclass(frozen=True)
class Edge:
    id: int
    a: int
    b: int
    radius: float | None = None

    @property
    def endpoints(self):
        return (self.a, self.b)


@dataclass(frozen=True)
class StrutEnd:
    """One incident strut as seen from a node."""

    edge_id: int
    other: int
    direction: np.ndarray
    length: float
    radius: float


@dataclass(frozen=True)
class NodeStar:
    node: Node
    incident: tuple

    @property
    def valence(self) -> int:
        return len(self.incident)

    @property
    def directions(self) -> np.ndarray:
        return np.array([s.direction for s in self.incident]).reshape(-1, 3)

    @property
    def radii(self) -> np.ndarray:
        return np.array([s.radius for s in self.incident])

    @property
    def edge_ids(self) -> list[int]:
        return [s.edge_id for s in self.incident]


@dataclass
class LatticeGraph:
    nodes: list
    edges: list
    default_radius: float = 1.0
    _node_index: dict = field(init=False, repr=False)
    _edge_index: dict = field(init=False, repr=False)
    _incident: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.nodes = list(self.nodes)
        self.edges = list(self.edges)
        self.validate()

    def validate(self):
        if not (np.isfinite(self.default_radius) and self.default_radius > 0):
            raise GraphError("default_radius must be positive", "default_radius")
        self._node_index = {}
        for n in self.nodes:
            if n.id in self._node_index:
                raise GraphError(f"duplicate node id {n.id}", n.id)
            if len(n.position) != 3 or not np.all(np.isfinite(n.position)):
                raise GraphError(f"node {n.id} has non-finite position", n.id)
            self._node_index[n.id] = n
        self._edge_index = {}
        self._incident = {n.id: [] for n in self.nodes}
        seen = {}
        for e in self.edges:
            if e.id in self._edge_index:
                raise GraphError(f"duplicate edge id {e.id}", e.id)
            for end in (e.a, e.b):
                if end not in self._node_index:
                    raise GraphError(f"edge {e.id} references missing node {end}", end)
            if e.a == e.b:
                raise GraphError(f"edge {e.id} is a self-loop", e.id)
            if e.radius is not None and not (np.isfinite(e.radius) and e.radius > 0):
                raise GraphError(f"edge {e.id} has nonpositive radius", e.id)
            key = (min(e.a, e.b), max(e.a, e.b))
            if key in seen:
                raise GraphError(f"edge {e.id} duplicates edge {seen[key]}", e.id)
            seen[key] = e.id
            if self.edge_length(e) <= 0:
                raise GraphError(f"edge {e.id} has zero length", e.id)
            self._edge_index[e.id] = e
            self._incident[e.a].append(e.id)
            self._incident[e.b].append(e.id)
        for ids in self._incident.values():
            ids.sort()

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def node(self, node_id) -> Node:
        try:
            return self._node_index[node_id]
        except KeyError:
            raise GraphError(f"unknown node id {node_id}", node_id) from None

    def edge(self, edge_id) -> Edge:
        try:
            return self._edge_index[edge_id]
        except KeyError:
            raise GraphError(f"unknown edge id {edge_id}", edge_id) from None

    def radius(self, e: Edge) -> float:
        return float(e.radius) if e.radius is not None else float(self.default_radius)

    def edge_length(self, e: Edge) -> float:
        pa = np.asarray(self._node_index[e.a].position, dtype=float)
        pb = np.asarray(self._node_index[e.b].position, dtype=float)
        return float(np.linalg.norm(pb - pa))

    def valence(self, node_id) -> int:
        return len(self._incident[node_id])

    def incident_edges(self, node_id) -> list[int]:
        return list(self._incident[node_id])

    def max_degree(self) -> int:
        return max((len(v) for v in self._incident.values()), default=0)

    def to_dict(self):
        return {
            "nodes": [{"id": n.id, "x": n.position[0], "y": n.position[1], "z": n.position[2]}
                      for n in self.nodes],
            "edges": [dict({"id": e.id, "a": e.a, "b": e.b},
                           **({"radius": e.radius} if e.radius is not None else {}))
                      for e in self.edges],
            "default_radius": self.default_radius,
        }


def node_star(graph: LatticeGraph, node_id) -> NodeStar:
    """Incident struts of a node, sorted by edge id, with unit directions."""
    node = graph.node(node_id)
    o = node.xyz
    incident = []
    for eid in graph.incident_edges(node_id):
        e = graph.edge(eid)
        other = e.b if e.a == node_id else e.a
        d = graph.node(other).xyz - o
        length = float(np.linalg.norm(d))
        incident.append(StrutEnd(eid, other, d / length, length, graph.radius(e)))
    if not incident:
        raise GraphError(f"node {node_id} has no incident edges", node_id)
    dirs = np.array([s.direction for s in incident])
    if len(dirs) > 1:
        cross = np.linalg.norm(np.cross(dirs[:, None, :], dirs[None, :, :]), axis=-1)
        dot = dirs @ dirs.T
        ang = np.arctan2(cross, dot)
        iu = np.triu_indices(len(dirs), 1)
        bad = np.nonzero(ang[iu] < DIRECTION_TOLERANCE)[0]
        if len(bad):
            i, j = iu[0][bad[0]], iu[1][bad[0]]
            raise GraphError(
                f"node {node_id}: edges {incident[i].edge_id} and {incident[j].edge_id} "
                "have coincident directions", node_id)
    return NodeStar(node, tuple(incident))


def graph_from_dict(doc: dict) -> LatticeGraph:
    try:
        nodes = [Node(int(n["id"]), (float(n["x"]), float(n["y"]), float(n["z"])))
                 for n in doc["nodes"]]
        edges = []
        for e in doc["edges"]:
            r = e.get("radius")
            edges.append(Edge(int(e["id"]), int(e["a"]), int(e["b"]),
                              None if r is None else float(r)))
        default_radius = float(doc.get("default_radius", 1.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"malformed graph document: {exc!r}") from exc
    return LatticeGraph(nodes, edges, default_radius)


def load_graph(source: BinaryIO | bytes | str, format: str = "json") -> LatticeGraph:
    """Parse and validate a lattice graph from a byte stream, bytes or path-like text."""
    if format != "json":
        raise GraphError(f"unsupported graph format {format!r}")
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    elif isinstance(source, str):
        with open(source, "rb") as fh:
            raw = fh.read()
    else:
        raw = source.read()
    try:
        doc = json.loads(raw.decode("utf-8") if isinstance(raw, bytes) else raw)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise GraphError(f"parse error: {exc}") from exc
    if not isinstance(doc, dict):
        raise GraphError("parse error: top-level JSON value must be an object")
    return graph_from_dict(doc)


def dump_graph(graph: LatticeGraph) -> bytes:
    return json.dumps(graph.to_dict(), indent=1).encode()


def make_graph(points: Iterable, edges: Iterable, radius: float = 1.0) -> LatticeGraph:
    """Convenience constructor: node ids are point indices, edge ids enumerate ``edges``."""
    nodes = [Node(i, tuple(float(c) for c in p)) for i, p in enumerate(points)]
    es = [Edge(k, int(a), int(b)) for k, (a, b) in enumerate(edges)]
    return LatticeGraph(nodes, es, radius)


def graph_bytes(graph: LatticeGraph) -> io.BytesIO:
    return io.BytesIO(dump_graph(graph))
