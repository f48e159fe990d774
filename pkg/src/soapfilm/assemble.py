"""Stitch nodal patches, strut sleeves and end caps into one watertight mesh."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import TWO_PI, Circle3
from .graph import Edge, LatticeGraph, Node
from .mesh import euler_characteristic, is_closed_manifold
from .meshio import format_faces, format_vertices, KIND_NAMES

STRUT, NODE, CAP = 0, 1, 2


class AssemblyError(RuntimeError):
    def __init__(self, message, element=None):
        super().__init__(message)
        self.element = element

    def to_dict(self):
        return {"error": "assembly", "message": str(self), "element": self.element}


@dataclass(frozen=True)
class BrepCensus:
    cylindrical: int
    subdivision: int
    boundary_curves: int
    planar_caps: int = 0

    def as_tuple(self):
        return (self.cylindrical, self.subdivision, self.boundary_curves)


@dataclass
class LatticeMesh:
    positions: np.ndarray
    triangles: np.ndarray
    kind: np.ndarray  # per triangle: STRUT / NODE / CAP
    ref: np.ndarray  # per triangle: edge id or node id
    census: BrepCensus

    @property
    def euler_characteristic(self) -> int:
        return euler_characteristic(self.triangles, len(self.positions))


@dataclass
class Ring:
    """Boundary ring at one strut end: global vertex ids ordered by parameter."""

    circle: Circle3
    ids: np.ndarray
    u: np.ndarray


def zip_rings(phi_a, phi_b):
    """Triangulate the band between two closed rings given their angles in a common frame.

    Returns local triangles with indices ``("a", k)`` encoded as ``k`` and
    ``("b", k)`` encoded as ``len(phi_a) + k``, wound outward for a ring ``a``
    below ring ``b`` along the frame axis.
    """
    na, nb = len(phi_a), len(phi_b)
    oa = np.argsort(phi_a, kind="stable")
    ob = np.argsort(phi_b, kind="stable")
    A = np.asarray(phi_a, dtype=float)[oa]
    B = np.asarray(phi_b, dtype=float)[ob]
    gap = np.abs(np.mod(B - A[0] + np.pi, TWO_PI) - np.pi)
    jb = int(np.argmin(gap))
    B = np.roll(B, -jb)
    ob = np.roll(ob, -jb)
    A_un = A[0] + np.mod(A - A[0], TWO_PI)
    B_un = B[0] + np.mod(B - B[0], TWO_PI)
    B_un = B_un - TWO_PI * np.round((B_un[0] - A_un[0]) / TWO_PI)
    A_ext = np.r_[A_un, A_un[0] + TWO_PI]
    B_ext = np.r_[B_un, B_un[0] + TWO_PI]
    tris = []
    ia = ib = 0
    while ia < na or ib < nb:
        if ib == nb or (ia < na and A_ext[ia + 1] <= B_ext[ib + 1]):
            tris.append((oa[ia % na], oa[(ia + 1) % na], na + ob[ib % nb]))
            ia += 1
        else:
            tris.append((oa[ia % na], na + ob[(ib + 1) % nb], na + ob[ib % nb]))
            ib += 1
    return np.array(tris, dtype=np.int64)


def _angles_in_frame(points, circle: Circle3):
    d = points - circle.center
    return np.mod(np.arctan2(d @ circle.e2, d @ circle.e1), TWO_PI)


def tessellate_strut(edge: Edge, ring_a: Ring, ring_b: Ring, segments: int = 1, positions=None):
    """Sleeve between the two end rings of a strut.

    Returns ``(new_positions, triangles)``; triangles index the ring ids given
    in ``ring_a``/``ring_b`` and, for ``segments > 1``, new intermediate ring
    vertices numbered from ``-1`` downward (resolved by the caller).
    """
    ca, cb = ring_a.circle, ring_b.circle
    length = float((cb.center - ca.center) @ ca.axis)
    if not length > 0:
        raise AssemblyError(f"strut {edge.id} has non-positive retained length", edge.id)
    if segments < 1:
        raise ValueError("segments must be >= 1")
    phi_a = np.mod(ring_a.u, TWO_PI)
    pb = cb(ring_b.u) if positions is None else positions[ring_b.ids]
    phi_b = _angles_in_frame(pb, ca)
    new_pos = []
    tris = []
    prev_ids, prev_phi = ring_a.ids, phi_a
    next_label = -1
    for s in range(1, segments):
        t = s / segments
        circle = Circle3(ca.center + t * length * ca.axis, ca.axis, ca.radius)
        ids = np.arange(next_label, next_label - len(phi_a), -1)
        next_label -= len(phi_a)
        new_pos.append(circle(phi_a))
        local = zip_rings(prev_phi, phi_a)
        both = np.r_[prev_ids, ids]
        tris.append(both[local])
        prev_ids, prev_phi = ids, phi_a
    local = zip_rings(prev_phi, phi_b)
    both = np.r_[prev_ids, ring_b.ids]
    tris.append(both[local])
    pos = np.concatenate(new_pos) if new_pos else np.zeros((0, 3))
    return pos, np.concatenate(tris)


def cap_valence_one(node: Node, circle: Circle3, ring_count: int):
    """Flat fan closing a dangling strut end; returns (positions, triangles, u).

    Vertex 0 is the disk center, vertices 1.. the ring at parameters ``u``.
    The fan normal is ``-circle.axis`` (pointing away from the strut).
    """
    u = TWO_PI * np.arange(ring_count) / ring_count
    pos = np.r_[circle.center[None, :], circle(u)]
    k = np.arange(ring_count)
    tris = np.stack([np.zeros(ring_count, dtype=np.int64), 1 + (k + 1) % ring_count, 1 + k], 1)
    return pos, tris, u


class MemorySink:
    def __init__(self):
        self.positions = []
        self.triangles = []
        self.kind = []
        self.ref = []
        self.count = 0

    def add_vertices(self, pos):
        base = self.count
        self.positions.append(np.asarray(pos, dtype=float).reshape(-1, 3))
        self.count += len(self.positions[-1])
        return base

    def add_triangles(self, tris, kind, ref):
        tris = np.asarray(tris, dtype=np.int64).reshape(-1, 3)
        self.triangles.append(tris)
        self.kind.append(np.full(len(tris), kind, dtype=np.int8))
        self.ref.append(np.full(len(tris), ref, dtype=np.int64))

    def result(self, census):
        cat = lambda xs, shape, dt: np.concatenate(xs) if xs else np.zeros(shape, dtype=dt)
        return LatticeMesh(cat(self.positions, (0, 3), float), cat(self.triangles, (0, 3), np.int64),
                           cat(self.kind, (0,), np.int8), cat(self.ref, (0,), np.int64), census)


class ObjStreamSink:
    """Writes OBJ incrementally; vertices precede the faces that use them."""

    def __init__(self, stream):
        self.stream = stream
        self.count = 0
        self.n_triangles = 0
        stream.write(b"# soapfilm lattice mesh (streamed)\n")

    def add_vertices(self, pos):
        base = self.count
        pos = np.asarray(pos, dtype=float).reshape(-1, 3)
        self.stream.write(format_vertices(pos))
        self.count += len(pos)
        return base

    def add_triangles(self, tris, kind, ref):
        tris = np.asarray(tris, dtype=np.int64).reshape(-1, 3)
        self.stream.write(f"g {KIND_NAMES[kind]}_{ref}\n".encode())
        self.stream.write(format_faces(tris))
        self.n_triangles += len(tris)


class Assembler:
    """Incremental assembly: add nodes in any order; sleeves are emitted once both ends exist."""

    def __init__(self, graph: LatticeGraph, sink, cap_ring_count: int, segments: int = 1):
        self.graph = graph
        self.sink = sink
        self.cap_ring_count = cap_ring_count
        self.segments = segments
        self.rings = {}
        self.n_patches = 0
        self.n_caps = 0
        self.n_sleeves = 0

    def add_patch(self, node_id, mesh):
        """Add a subdivided nodal patch (ControlMesh with circles and boundary params)."""
        base = self.sink.add_vertices(mesh.positions)
        self.sink.add_triangles(mesh.triangles + base, NODE, node_id)
        for local, edge_id in enumerate(mesh.meta["edges"]):
            ids = mesh.boundary_ring(local)
            if len(ids) < 3:
                raise AssemblyError(f"node {node_id}: ring for edge {edge_id} too small", node_id)
            self.rings[(edge_id, node_id)] = Ring(mesh.circles[local], ids + base, mesh.u[ids])
        self.n_patches += 1
        self._emit_sleeves(node_id)

    def add_cap(self, node_id, circle: Circle3, edge_id):
        """Cap a dangling end; mirrors the opposite ring's angles when that end is already in."""
        e = self.graph.edge(edge_id)
        partner = self.rings.get((edge_id, e.b if e.a == node_id else e.a))
        if partner is not None:
            u = np.sort(_angles_in_frame(partner.circle(partner.u), circle))
            pos, tris, _ = cap_valence_one(self.graph.node(node_id), circle, len(u))
            pos[1:] = circle(u)
        else:
            pos, tris, u = cap_valence_one(self.graph.node(node_id), circle, self.cap_ring_count)
        base = self.sink.add_vertices(pos)
        self.sink.add_triangles(tris + base, CAP, node_id)
        self.rings[(edge_id, node_id)] = Ring(circle, np.arange(1, len(pos)) + base, u)
        self.n_caps += 1
        self._emit_sleeves(node_id)

    def _emit_sleeves(self, node_id):
        for eid in self.graph.incident_edges(node_id):
            e = self.graph.edge(eid)
            ka, kb = (eid, e.a), (eid, e.b)
            if ka in self.rings and kb in self.rings:
                ring_a, ring_b = self.rings.pop(ka), self.rings.pop(kb)
                pos, tris = tessellate_strut(e, ring_a, ring_b, self.segments)
                if len(pos):
                    base = self.sink.add_vertices(pos)
                    tris = np.where(tris < 0, base + (-tris - 1), tris)
                self.sink.add_triangles(tris, STRUT, eid)
                self.n_sleeves += 1

    def census(self) -> BrepCensus:
        if self.rings:
            missing = sorted(self.rings)[0]
            raise AssemblyError(f"unmatched strut end {missing}", missing[0])
        return BrepCensus(self.n_sleeves, self.n_patches, 2 * self.n_sleeves, self.n_caps)


def assemble(graph: LatticeGraph, patches: dict, caps: dict, cap_ring_count: int,
             segments: int = 1, check: bool = True) -> LatticeMesh:
    """Unified watertight mesh from per-node patches and valence-1 caps.

    ``patches`` maps node id to a subdivided ControlMesh; ``caps`` maps node
    id to ``(circle, edge_id)`` for dangling ends.
    """
    sink = MemorySink()
    asm = Assembler(graph, sink, cap_ring_count, segments)
    for node in graph.nodes:
        if node.id in patches:
            mesh = getattr(patches[node.id], "mesh", patches[node.id])
            asm.add_patch(node.id, mesh)
        elif node.id in caps:
            circle, eid = caps[node.id]
            asm.add_cap(node.id, circle, eid)
    out = sink.result(asm.census())
    if check and len(out.triangles) and not is_closed_manifold(out.triangles):
        raise AssemblyError("assembled mesh is not a closed, consistently oriented manifold")
    return out
