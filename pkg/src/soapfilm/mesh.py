"""Indexed triangle mesh with per-vertex roles and boundary parameters."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

BOUNDARY, COLLAR1, COLLAR2, INTERIOR = 0, 1, 2, 3
ROLE_NAMES = {BOUNDARY: "boundary", COLLAR1: "collar1", COLLAR2: "collar2", INTERIOR: "interior"}


class MeshError(ValueError):
    pass


@dataclass
class ControlMesh:
    """Nodal film mesh.

    ``circle[v]`` and ``u[v]`` hold the boundary parameter of boundary
    vertices (``-1`` / ``nan`` elsewhere); ``strut[v]`` is the local strut
    index a vertex was generated for (``-1`` for shared interior vertices).
    """

    positions: np.ndarray
    normals: np.ndarray
    roles: np.ndarray
    strut: np.ndarray
    circle: np.ndarray
    u: np.ndarray
    triangles: np.ndarray
    circles: list
    center: np.ndarray
    film: object = None
    meta: dict = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return len(self.positions)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def copy(self, **changes) -> "ControlMesh":
        base = dict(
            positions=self.positions.copy(),
            normals=self.normals.copy(),
            roles=self.roles.copy(),
            strut=self.strut.copy(),
            circle=self.circle.copy(),
            u=self.u.copy(),
            triangles=self.triangles.copy(),
            circles=list(self.circles),
            center=self.center.copy(),
            film=self.film.copy() if self.film is not None else None,
            meta=dict(self.meta),
        )
        base.update(changes)
        return replace(self, **base)

    def boundary_ring(self, circle_id):
        """Boundary vertex ids on one circle, ordered by parameter."""
        ids = np.nonzero(self.circle == circle_id)[0]
        return ids[np.argsort(self.u[ids], kind="stable")]

    def diagonal(self) -> float:
        return float(np.linalg.norm(self.positions.max(0) - self.positions.min(0)))


def face_normals(positions, triangles):
    """Unnormalized face normals (length = 2 * area)."""
    p = positions[triangles]
    return np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])


def area_weighted_normals(positions, triangles, n_vertices=None):
    n = len(positions) if n_vertices is None else n_vertices
    fn = face_normals(positions, triangles)
    acc = np.zeros((n, 3))
    for k in range(3):
        np.add.at(acc, triangles[:, k], fn)
    norm = np.linalg.norm(acc, axis=1)
    used = np.zeros(n, dtype=bool)
    used[triangles.ravel()] = True
    if np.any(used & (norm == 0)):
        raise MeshError("vertex with zero aggregated face normal")
    out = np.zeros_like(acc)
    out[used] = acc[used] / norm[used, None]
    return out


@dataclass
class EdgeTopology:
    """Unique undirected edges with their incident faces."""

    edges: np.ndarray  # (E, 2) sorted pairs
    opposite: np.ndarray  # (E, 2) opposite vertex per incident face, -1 if absent
    face_count: np.ndarray  # (E,)
    face_edges: np.ndarray  # (F, 3) edge index of (v0v1, v1v2, v2v0)

    @property
    def boundary(self) -> np.ndarray:
        return self.face_count == 1


def edge_topology(triangles, n_vertices) -> EdgeTopology:
    t = np.asarray(triangles, dtype=np.int64)
    a = t.ravel()
    b = np.roll(t, -1, axis=1).ravel()
    c = np.roll(t, -2, axis=1).ravel()
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    key = lo * n_vertices + hi
    uniq, inv, counts = np.unique(key, return_inverse=True, return_counts=True)
    if np.any(counts > 2):
        raise MeshError("non-manifold edge (more than two incident faces)")
    edges = np.stack([uniq // n_vertices, uniq % n_vertices], axis=1)
    opposite = np.full((len(uniq), 2), -1, dtype=np.int64)
    order = np.argsort(inv, kind="stable")
    first = np.ones(len(order), dtype=bool)
    first[1:] = inv[order][1:] != inv[order][:-1]
    slot = np.where(first, 0, 1)
    opposite[inv[order], slot] = c[order]
    return EdgeTopology(edges, opposite, counts, inv.reshape(-1, 3))


def directed_edge_check(triangles):
    """True iff every directed half-edge occurs at most once (consistent orientation)."""
    t = np.asarray(triangles, dtype=np.int64)
    a = t.ravel()
    b = np.roll(t, -1, axis=1).ravel()
    if len(a) == 0:
        return True
    key = np.sort(a * (int(t.max()) + 1) + b)
    return not np.any(key[1:] == key[:-1])


def euler_characteristic(triangles, n_vertices=None) -> int:
    t = np.asarray(triangles, dtype=np.int64)
    used = np.unique(t)
    nv = len(used) if n_vertices is None else n_vertices
    topo = edge_topology(t, int(t.max()) + 1)
    return nv - len(topo.edges) + len(t)


def boundary_loops(triangles) -> list:
    """Boundary loops as ordered vertex lists, following half-edge direction."""
    t = np.asarray(triangles, dtype=np.int64)
    a = t.ravel()
    b = np.roll(t, -1, axis=1).ravel()
    directed = set(zip(a.tolist(), b.tolist()))
    nxt = {}
    for u, v in directed:
        if (v, u) not in directed:
            if u in nxt:
                raise MeshError("non-manifold boundary vertex")
            nxt[u] = v
    loops = []
    seen = set()
    for start in sorted(nxt):
        if start in seen:
            continue
        loop = [start]
        seen.add(start)
        v = nxt[start]
        while v != start:
            loop.append(v)
            seen.add(v)
            v = nxt[v]
        loops.append(loop)
    return loops


def is_closed_manifold(triangles) -> bool:
    t = np.asarray(triangles, dtype=np.int64)
    try:
        topo = edge_topology(t, int(t.max()) + 1)
    except MeshError:
        return False
    return bool(np.all(topo.face_count == 2)) and directed_edge_check(t)


def vertex_adjacency(edges, n_vertices):
    """Sparse symmetric 0/1 adjacency matrix."""
    from scipy import sparse

    e = np.asarray(edges)
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    data = np.ones(len(rows))
    return sparse.csr_matrix((data, (rows, cols)), shape=(n_vertices, n_vertices))
