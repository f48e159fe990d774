"""Nodal film geometry: the initial control mesh spanning a node's end circles."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from .geometry import TWO_PI, GeometryError, ray_cylinder
from .graph import Node, NodeStar
from .mesh import BOUNDARY, INTERIOR, ControlMesh, area_weighted_normals
from .voronoi import spherical_voronoi


class FilmError(ValueError):
    pass


@dataclass
class FilmCell:
    """Strip between one end circle and its Voronoi cell.

    ``rings[0]`` is the boundary ring; later rings step inward. ``chains[k]``
    runs along the cell border from corner ``k`` to corner ``k + 1``.
    """

    site: int
    rings: list
    chains: list

    @property
    def corners(self):
        return [c[0] for c in self.chains]


@dataclass
class FilmLayout:
    cells: list
    vertex_sites: dict  # mesh id -> equidistant site indices
    voronoi_ids: list
    inserted: dict = field(default_factory=dict)  # (va, vb) -> [n1, n2, n3]

    def copy(self):
        return copy.deepcopy(self)

    def triangulate(self) -> np.ndarray:
        tris = []
        for cell in self.cells:
            rings = cell.rings
            m = len(cell.chains)
            for outer, inner in zip(rings[:-1], rings[1:]):
                for k in range(m):
                    k1 = (k + 1) % m
                    tris.append((inner[k], inner[k1], outer[k1]))
                    tris.append((inner[k], outer[k1], outer[k]))
            outer = rings[-1]
            for k, chain in enumerate(cell.chains):
                k1 = (k + 1) % m
                s = len(chain) - 1
                h = s // 2
                for q in range(h):
                    tris.append((chain[q], chain[q + 1], outer[k]))
                tris.append((chain[h], outer[k1], outer[k]))
                for q in range(h, s):
                    tris.append((chain[q], chain[q + 1], outer[k1]))
        return np.array(tris, dtype=np.int64).reshape(-1, 3)


def film_distance(direction, axis, radius):
    """Distance from the node along ``direction`` to the original nodal surface.

    Directions within 90 degrees of the strut axis hit the strut cylinder;
    beyond that the strut does not reach and the node sphere of radius
    ``radius`` is used.
    """
    if float(np.dot(direction, axis)) <= 1e-12:
        return float(radius)
    return float(ray_cylinder(direction, axis, radius))


def _refresh_normals(positions, triangles, roles, circle, circles):
    normals = area_weighted_normals(positions, triangles)
    for v in np.nonzero(roles == BOUNDARY)[0]:
        c = circles[circle[v]]
        d = positions[v] - c.center
        d -= (d @ c.axis) * c.axis
        normals[v] = d / np.linalg.norm(d)
    return normals


def build_film(cuts, node: Node) -> ControlMesh:
    """Film geometry from a node's end circles via the spherical Voronoi diagram."""
    if len(cuts) < 2:
        raise FilmError("film construction needs at least two struts")
    o = node.xyz
    circles = [c.end_circle for c in cuts]
    r = float(circles[0].radius)
    sites = np.array([c.axis for c in circles])
    vor = spherical_voronoi(sites)

    positions = [o + r * w for w in vor.vertices]
    roles = [INTERIOR] * len(positions)
    strut = [-1] * len(positions)
    circle = [-1] * len(positions)
    us = [np.nan] * len(positions)
    vertex_sites = {v: tuple(s) for v, s in enumerate(vor.vertex_sites)}
    cells = []
    for i, loop in enumerate(vor.cells):
        c = circles[i]
        ring = []
        ring_u = []
        for w in loop:
            try:
                u = float(c.parameter_of(positions[w]))
            except GeometryError as exc:
                raise FilmError(f"node {node.id}: {exc}") from exc
            ring.append(len(positions))
            ring_u.append(u)
            positions.append(c(u))
            roles.append(BOUNDARY)
            strut.append(i)
            circle.append(i)
            us.append(u)
        steps = np.mod(np.diff(np.r_[ring_u, ring_u[0]]), TWO_PI)
        if np.any(steps < 1e-9) or abs(steps.sum() - TWO_PI) > 1e-6:
            raise FilmError(f"node {node.id}: projection fold on strut {cuts[i].edge_id}")
        chains = [[loop[k], loop[(k + 1) % len(loop)]] for k in range(len(loop))]
        cells.append(FilmCell(i, [ring], chains))

    layout = FilmLayout(cells, vertex_sites, list(range(len(vor.vertices))))
    tris = layout.triangulate()
    positions = np.array(positions)
    roles = np.array(roles, dtype=np.int8)
    circle = np.array(circle, dtype=np.int64)
    normals = _refresh_normals(positions, tris, roles, circle, circles)
    return ControlMesh(
        positions=positions,
        normals=normals,
        roles=roles,
        strut=np.array(strut, dtype=np.int64),
        circle=circle,
        u=np.array(us),
        triangles=tris,
        circles=circles,
        center=o.copy(),
        film=layout,
        meta={"node": node.id, "edges": [c.edge_id for c in cuts],
              "radius": r},
    )


def adjust_vertices(mesh: ControlMesh, star: NodeStar) -> ControlMesh:
    """Move Voronoi vertices onto the common strut intersection along their rays."""
    out = mesh.copy()
    o = out.center
    r = float(star.radii[0])
    axes = np.array([c.axis for c in out.circles])
    for v in out.film.voronoi_ids:
        w = out.positions[v] - o
        w /= np.linalg.norm(w)
        i = out.film.vertex_sites[v][0]
        try:
            t = film_distance(w, axes[i], r)
        except GeometryError as exc:
            raise FilmError(f"node {star.node.id}: {exc}") from exc
        out.positions[v] = o + t * w
    out.normals = _refresh_normals(out.positions, out.triangles, out.roles,
                                   out.circle, out.circles)
    return out


def _unit(v):
    return v / np.linalg.norm(v)


def _angle(a, b):
    return float(np.arctan2(np.linalg.norm(np.cross(a, b)), np.dot(a, b)))


def insert_curve_points(mesh: ControlMesh, star: NodeStar) -> ControlMesh:
    """Insert three vertices on every border edge whose strut-strut curve is non-monotonic."""
    out = mesh.copy()
    layout = out.film
    o = out.center
    r = float(star.radii[0])
    axes = np.array([c.axis for c in out.circles])
    positions = list(out.positions)
    extra = 0
    for cell in layout.cells:
        i = cell.site
        for k, chain in enumerate(cell.chains):
            if len(chain) != 2:
                continue
            va, vb = chain
            key = (min(va, vb), max(va, vb))
            if key in layout.inserted:
                new = layout.inserted[key]
                cell.chains[k] = [va, *(new if va == key[0] else new[::-1]), vb]
                continue
            common = set(layout.vertex_sites[va]) & set(layout.vertex_sites[vb])
            common.discard(i)
            if len(common) != 1:
                continue
            j = common.pop()
            s = axes[i] + axes[j]
            if np.linalg.norm(s) < 1e-9:
                continue
            n2 = s / np.linalg.norm(s)
            w1 = _unit(positions[va] - o)
            w2 = _unit(positions[vb] - o)
            theta = _angle(w1, w2)
            if not (_angle(w1, n2) < theta and _angle(w2, n2) < theta):
                continue
            dirs = [_unit(w1 + n2), n2, _unit(w2 + n2)]
            try:
                pts = [o + film_distance(d, axes[i], r) * d for d in dirs]
            except GeometryError as exc:
                raise FilmError(f"node {star.node.id}: {exc}") from exc
            ids = list(range(len(positions), len(positions) + 3))
            positions.extend(pts)
            for nid in ids:
                layout.vertex_sites[nid] = (min(i, j), max(i, j))
            extra += 3
            layout.inserted[key] = ids if va == key[0] else ids[::-1]
            cell.chains[k] = [va, *ids, vb]
    if extra == 0:
        return out
    n_old = out.n_vertices
    out.positions = np.array(positions)
    out.roles = np.r_[out.roles, np.full(extra, INTERIOR, dtype=np.int8)]
    out.strut = np.r_[out.strut, np.full(extra, -1, dtype=np.int64)]
    out.circle = np.r_[out.circle, np.full(extra, -1, dtype=np.int64)]
    out.u = np.r_[out.u, np.full(extra, np.nan)]
    out.triangles = layout.triangulate()
    assert out.n_vertices == n_old + extra
    out.normals = _refresh_normals(out.positions, out.triangles, out.roles,
                                   out.circle, out.circles)
    return out
