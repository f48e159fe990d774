"""Combined PN-Loop subdivision with exact circle sampling on the boundary."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .geometry import TWO_PI, Circle3
from .graph import NodeStar
from .mesh import (BOUNDARY, COLLAR1, INTERIOR, ControlMesh, MeshError,
                   area_weighted_normals, edge_topology)

log = logging.getLogger(__name__)

DENOMINATOR_GUARD = 1e-6
VERTEX_VERTEX, EDGE_VERTEX = 0, 1


class SubdivisionError(RuntimeError):
    pass


def loop_beta(n):
    """Loop vertex weight beta_n = (5/8 - (3/8 + cos(2 pi / n) / 4)^2) / n."""
    n_arr = np.asarray(n)
    if np.any(n_arr < 3):
        raise ValueError("valence must be >= 3")
    nf = n_arr.astype(float)
    beta = (5.0 / 8.0 - (3.0 / 8.0 + 0.25 * np.cos(2 * np.pi / nf)) ** 2) / nf
    return float(beta) if beta.ndim == 0 else beta


@dataclass
class PNVertex:
    position: np.ndarray
    normal: np.ndarray
    boundary_param: tuple | None = None

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        n = np.asarray(self.normal, dtype=float)
        self.normal = n / np.linalg.norm(n)


def _safe_unit(v):
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise SubdivisionError("normal average vanished")
    return v / norm


def _h(points, normals, t, n_new):
    """Per-stencil displacement (n_a + n)^T (v_a - t) / ((n_a + n)^T n), guarded."""
    s = normals + n_new
    den = np.sum(s * n_new, axis=-1)
    num = np.sum(s * (points - t), axis=-1)
    ok = np.abs(den) >= DENOMINATOR_GUARD
    if not np.all(ok):
        log.warning("PN denominator guard hit on %d stencil terms", int(np.sum(~ok)))
    return np.where(ok, num / np.where(ok, den, 1.0), 0.0)


def pn_vertex_rule(center: PNVertex, ring) -> PNVertex:
    """New vertex-vertex: Loop average t, averaged normal n, then t + h n."""
    n = len(ring)
    beta = loop_beta(n)
    pts = np.array([v.position for v in ring])
    nrm = np.array([v.normal for v in ring])
    w0 = 1.0 - n * beta
    t = w0 * center.position + beta * pts.sum(axis=0)
    n_new = _safe_unit(w0 * center.normal + beta * nrm.sum(axis=0))
    h = w0 * _h(center.position, center.normal, t, n_new) + beta * np.sum(_h(pts, nrm, t, n_new))
    return PNVertex(t + h * n_new, n_new)


def pn_edge_rule(vi: PNVertex, vj: PNVertex, vp: PNVertex, vq: PNVertex) -> PNVertex:
    """New edge-vertex with Loop weights 3/8, 3/8, 1/8, 1/8 on points and normals."""
    w = np.array([3 / 8, 3 / 8, 1 / 8, 1 / 8])
    pts = np.array([vi.position, vj.position, vp.position, vq.position])
    nrm = np.array([vi.normal, vj.normal, vp.normal, vq.normal])
    t = w @ pts
    n_new = _safe_unit(w @ nrm)
    h = float(w @ _h(pts, nrm, t, n_new))
    return PNVertex(t + h * n_new, n_new)


def midpoint_parameter(u_i, u_j):
    """Midpoint of the shorter arc between two parameters, in [0, 2 pi)."""
    du = np.mod(np.asarray(u_j) - np.asarray(u_i) + np.pi, TWO_PI) - np.pi
    return np.mod(np.asarray(u_i) + 0.5 * du, TWO_PI)


def boundary_sample(circle: Circle3, u_i, u_j, circle_id=None) -> PNVertex:
    """Circle point at the shorter-arc midpoint of two adjacent boundary parameters.

    ``u_i``/``u_j`` may also be ``(circle_id, u)`` pairs, which must agree.
    """
    if isinstance(u_i, tuple) or isinstance(u_j, tuple):
        (ci, u_i), (cj, u_j) = u_i, u_j
        if ci != cj:
            raise SubdivisionError("parameters lie on different circles")
        circle_id = ci
    u = float(midpoint_parameter(u_i, u_j))
    return PNVertex(circle(u), circle.normal(u), (circle_id, u))


@dataclass
class SubdividedPatch:
    mesh: ControlMesh
    iterations: int
    provenance: np.ndarray
    levels: list = field(default_factory=list)


def cylinder_normals(positions, circle: Circle3):
    d = positions - circle.center
    d = d - np.outer(d @ circle.axis, circle.axis)
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def configure_normals(mesh: ControlMesh) -> np.ndarray:
    """Cylinder normals on boundary and collar1 vertices, area-weighted elsewhere."""
    normals = area_weighted_normals(mesh.positions, mesh.triangles)
    for s, circle in enumerate(mesh.circles):
        bmask = (mesh.roles == BOUNDARY) & (mesh.circle == s)
        if np.any(bmask):
            normals[bmask] = circle.normal(mesh.u[bmask])
        cmask = (mesh.roles == COLLAR1) & (mesh.strut == s)
        if np.any(cmask):
            normals[cmask] = cylinder_normals(mesh.positions[cmask], circle)
    return normals


def _subdivide_once(mesh: ControlMesh):
    V, N, F = mesh.positions, mesh.normals, mesh.triangles
    nv = len(V)
    topo = edge_topology(F, nv)
    E = topo.edges
    is_b = mesh.roles == BOUNDARY
    i, j = E[:, 0], E[:, 1]

    # vertex-vertices
    adj = sparse.csr_matrix((np.ones(2 * len(E)), (np.r_[i, j], np.r_[j, i])), shape=(nv, nv))
    valence = np.diff(adj.indptr)
    inner = np.nonzero(~is_b)[0]
    if np.any(valence[inner] < 3):
        raise SubdivisionError("interior vertex with valence < 3")
    new_V = V.copy()
    new_N = N.copy()
    if len(inner):
        n = valence[inner]
        beta = loop_beta(n)
        w0 = 1.0 - n * beta
        a_in = adj[inner]
        t = w0[:, None] * V[inner] + beta[:, None] * (a_in @ V)
        nn = _safe_unit(w0[:, None] * N[inner] + beta[:, None] * (a_in @ N))
        h = w0 * _h(V[inner], N[inner], t, nn)
        coo = a_in.tocoo()
        row, col = coo.row, coo.col
        terms = _h(V[col], N[col], t[row], nn[row])
        h += beta * np.bincount(row, weights=terms, minlength=len(inner))
        new_V[inner] = t + h[:, None] * nn
        new_N[inner] = nn

    # edge-vertices
    ne = len(E)
    eV = np.empty((ne, 3))
    eN = np.empty((ne, 3))
    e_circle = np.full(ne, -1, dtype=np.int64)
    e_u = np.full(ne, np.nan)
    bmask = topo.boundary
    imask = ~bmask
    if np.any(imask):
        ii, jj = i[imask], j[imask]
        pp, qq = topo.opposite[imask, 0], topo.opposite[imask, 1]
        t = 0.375 * (V[ii] + V[jj]) + 0.125 * (V[pp] + V[qq])
        nn = _safe_unit(0.375 * (N[ii] + N[jj]) + 0.125 * (N[pp] + N[qq]))
        h = (0.375 * (_h(V[ii], N[ii], t, nn) + _h(V[jj], N[jj], t, nn))
             + 0.125 * (_h(V[pp], N[pp], t, nn) + _h(V[qq], N[qq], t, nn)))
        eV[imask] = t + h[:, None] * nn
        eN[imask] = nn
    if np.any(bmask):
        bi, bj = i[bmask], j[bmask]
        ci, cj = mesh.circle[bi], mesh.circle[bj]
        if np.any(ci != cj) or np.any(ci < 0):
            raise SubdivisionError("boundary edge does not lie on a single circle")
        um = midpoint_parameter(mesh.u[bi], mesh.u[bj])
        bpos = np.empty((len(bi), 3))
        bnrm = np.empty((len(bi), 3))
        for c in np.unique(ci):
            sel = ci == c
            circ = mesh.circles[c]
            bpos[sel] = circ(um[sel])
            bnrm[sel] = circ.normal(um[sel])
        eV[bmask] = bpos
        eN[bmask] = bnrm
        e_circle[bmask] = ci
        e_u[bmask] = um

    # 1-to-4 split
    fe = topo.face_edges + nv
    a, b, c = F[:, 0], F[:, 1], F[:, 2]
    ab, bc, ca = fe[:, 0], fe[:, 1], fe[:, 2]
    new_F = np.concatenate([
        np.stack([a, ab, ca], 1),
        np.stack([b, bc, ab], 1),
        np.stack([c, ca, bc], 1),
        np.stack([ab, bc, ca], 1),
    ])
    roles = np.r_[np.where(is_b, BOUNDARY, INTERIOR), np.where(bmask, BOUNDARY, INTERIOR)]
    out = ControlMesh(
        positions=np.r_[new_V, eV],
        normals=np.r_[new_N, eN],
        roles=roles.astype(np.int8),
        strut=np.r_[np.where(is_b, mesh.strut, -1), e_circle],
        circle=np.r_[mesh.circle, e_circle],
        u=np.r_[mesh.u, e_u],
        triangles=new_F,
        circles=mesh.circles,
        center=mesh.center,
        film=None,
        meta=dict(mesh.meta),
    )
    prov = np.r_[np.full(nv, VERTEX_VERTEX, np.int8), np.full(ne, EDGE_VERTEX, np.int8)]
    return out, prov


def subdivide(patch: ControlMesh, star: NodeStar = None, iterations: int = 3,
              keep_levels: bool = False, configure: bool = True) -> SubdividedPatch:
    """Refine a faired film ``iterations`` times with the combined PN-Loop scheme.

    With ``configure=False`` the patch's own normals are used as the level-0
    control normals instead of the cylinder/area-weighted configuration.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    mesh = patch.copy(film=None)
    if iterations == 0:
        return SubdividedPatch(mesh, 0, np.zeros(mesh.n_vertices, np.int8),
                               [mesh] if keep_levels else [])
    if configure:
        mesh.normals = configure_normals(mesh)
    levels = [mesh] if keep_levels else []
    prov = np.zeros(mesh.n_vertices, np.int8)
    for _ in range(iterations):
        try:
            mesh, prov = _subdivide_once(mesh)
        except MeshError as exc:
            raise SubdivisionError(str(exc)) from exc
        if keep_levels:
            levels.append(mesh)
    return SubdividedPatch(mesh, iterations, prov, levels)
