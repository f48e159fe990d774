"""Boundary upsampling and constrained bi-Laplacian fairing of the film."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .graph import NodeStar
from .mesh import (BOUNDARY, COLLAR1, COLLAR2, INTERIOR, ControlMesh, MeshError,
                   area_weighted_normals, edge_topology)

COT_CLAMP = 1e4
FIXED_ROLES = (BOUNDARY, COLLAR1, COLLAR2)


class FairingError(RuntimeError):
    pass


def _on_cylinder(p, circle, radius):
    d = p - circle.center
    h = d @ circle.axis
    rad = d - h * circle.axis
    return circle.center + h * circle.axis + radius * rad / np.linalg.norm(rad)


def upsample(mesh: ControlMesh, star: NodeStar = None, layers: int = 3) -> ControlMesh:
    """Insert ``layers`` rings between each end circle and its cell border.

    Ring vertices interpolate the rung from boundary vertex to cell corner
    and are pushed radially onto the strut cylinder. The first two new rings
    become collar1/collar2; the rest are interior.
    """
    if layers < 0:
        raise ValueError("layers must be >= 0")
    out = mesh.copy()
    if layers == 0:
        return out
    layout = out.film
    pos = list(out.positions)
    roles = list(out.roles)
    strut = list(out.strut)
    for cell in layout.cells:
        circle = out.circles[cell.site]
        r = circle.radius if star is None else float(star.radii[cell.site])
        outer = cell.rings[-1]
        corners = cell.corners
        new_rings = []
        for l in range(1, layers + 1):
            t = l / (layers + 1)
            ring = []
            for p_id, w_id in zip(outer, corners):
                p = (1 - t) * out.positions[p_id] + t * out.positions[w_id]
                ring.append(len(pos))
                pos.append(_on_cylinder(p, circle, r))
                roles.append(COLLAR1 if l == 1 else COLLAR2 if l == 2 else INTERIOR)
                strut.append(cell.site)
            new_rings.append(ring)
        cell.rings.extend(new_rings)
    n_new = len(pos) - out.n_vertices
    out.positions = np.array(pos)
    out.roles = np.array(roles, dtype=np.int8)
    out.strut = np.array(strut, dtype=np.int64)
    out.circle = np.r_[out.circle, np.full(n_new, -1, dtype=np.int64)]
    out.u = np.r_[out.u, np.full(n_new, np.nan)]
    out.triangles = layout.triangulate()
    out.normals = np.r_[out.normals, np.zeros((n_new, 3))]
    interior = out.roles != BOUNDARY
    fresh = area_weighted_normals(out.positions, out.triangles)
    out.normals[interior] = fresh[interior]
    return out


def cotangent_weights(positions, triangles):
    """Symmetric edge weights 0.5 (cot a + cot b), clamped; zero-area faces fall back to uniform."""
    p = positions[triangles]
    n = len(positions)
    rows, cols, vals = [], [], []
    area2 = np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)
    scale = max(float(np.max(np.abs(positions))), 1e-300) ** 2
    degenerate = area2 <= 1e-14 * scale
    for k in range(3):
        i = triangles[:, (k + 1) % 3]
        j = triangles[:, (k + 2) % 3]
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        dot = np.sum(a * b, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            cot = dot / area2
        cot = np.clip(np.where(degenerate, 1.0, cot), -COT_CLAMP, COT_CLAMP)
        rows += [i, j]
        cols += [j, i]
        vals += [0.5 * cot, 0.5 * cot]
    w = sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(n, n))
    return w


def laplacian_matrix(positions, triangles):
    """Cotangent Laplacian L = W - diag(W 1); rows sum to zero."""
    w = cotangent_weights(positions, triangles)
    d = np.asarray(w.sum(axis=1)).ravel()
    return (w - sparse.diags(d)).tocsr()


@dataclass
class FairingSystem:
    laplacian: sparse.csr_matrix
    operator: sparse.csr_matrix  # L (first order) or L @ L (second order)
    fixed: np.ndarray
    free: np.ndarray
    order: str

    @property
    def matrix(self):
        return self.operator[self.free][:, self.free]

    def rhs(self, positions):
        return -(self.operator[self.free][:, self.fixed] @ positions[self.fixed])

    def residual(self, positions):
        return self.operator[self.free] @ positions


def build_laplacian(mesh: ControlMesh, order: str = "second") -> FairingSystem:
    if order not in ("first", "second"):
        raise ValueError("order must be 'first' or 'second'")
    try:
        edge_topology(mesh.triangles, mesh.n_vertices)
    except MeshError as exc:
        raise FairingError(str(exc)) from exc
    lap = laplacian_matrix(mesh.positions, mesh.triangles)
    op = lap if order == "first" else (lap @ lap).tocsr()
    fixed_mask = np.isin(mesh.roles, FIXED_ROLES)
    return FairingSystem(lap, op, np.nonzero(fixed_mask)[0], np.nonzero(~fixed_mask)[0], order)


def fair(mesh: ControlMesh, system: FairingSystem, tol: float = 1e-8) -> ControlMesh:
    """Replace free vertex positions by the constrained (bi-)harmonic solution."""
    out = mesh.copy()
    if len(system.free) == 0:
        return out
    if len(system.fixed) == 0:
        raise FairingError("fairing needs at least one fixed vertex")
    a = system.matrix.tocsc()
    b = system.rhs(mesh.positions)
    try:
        lu = splu(a)
    except RuntimeError as exc:
        raise FairingError(f"singular fairing system: {exc}") from exc
    x = lu.solve(np.ascontiguousarray(b))
    out.positions[system.free] = x
    res = system.residual(out.positions)
    diag = mesh.diagonal()
    if np.max(np.abs(res)) > tol * diag:
        # one step of iterative refinement
        x = x - lu.solve(np.ascontiguousarray(res))
        out.positions[system.free] = x
        res = system.residual(out.positions)
    if not np.all(np.isfinite(x)):
        raise FairingError("fairing produced non-finite positions")
    out.meta["fair_residual"] = float(np.max(np.abs(res))) if len(res) else 0.0
    fresh = area_weighted_normals(out.positions, out.triangles)
    interior = out.roles != BOUNDARY
    out.normals[interior] = fresh[interior]
    return out


def fairing_energy(mesh: ControlMesh, system: FairingSystem, positions=None) -> float:
    """Sum over free vertices of |(L V)_v|^2."""
    v = mesh.positions if positions is None else positions
    lv = system.laplacian @ v
    return float(np.sum(lv[system.free] ** 2))
