"""Spherical Voronoi diagrams of strut directions.

General site sets use the Delaunay/convex-hull duality: every hull facet's
outward unit normal is a Voronoi vertex (the center of an empty spherical
cap through the facet's sites). Two degenerate families are handled
explicitly: two sites (a single bisecting great circle, discretized) and
coplanar site sets, including every three-site set (two antipodal
vertices joined by lune edges, each densified at its angular midpoint).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from .geometry import frame_for_axis

GREAT_CIRCLE_STEP = 0.5
_MERGE_TOL = 1e-10
_COPLANAR_TOL = 1e-9


class VoronoiError(ValueError):
    pass


@dataclass
class SphericalVoronoi:
    sites: np.ndarray  # (n, 3) unit
    vertices: np.ndarray  # (V, 3) unit
    vertex_sites: list  # per vertex: tuple of equidistant site indices
    cells: list  # per site: vertex ids, counterclockwise about the site
    edges: list  # (va, vb, site_i, site_j) with va < vb

    def cell_edges(self, i):
        loop = self.cells[i]
        return [(loop[k], loop[(k + 1) % len(loop)]) for k in range(len(loop))]


def _ccw_about(site, vecs):
    e1, e2 = frame_for_axis(site)
    return np.arctan2(vecs @ e2, vecs @ e1)


def _sort_cells(sites, vertices, members):
    cells = []
    for i, ids in enumerate(members):
        ids = np.array(sorted(ids), dtype=int)
        ang = _ccw_about(sites[i], vertices[ids])
        cells.append([int(v) for v in ids[np.argsort(ang, kind="stable")]])
    return cells


def _edges_from_cells(cells, vertex_sites):
    seen = {}
    for i, loop in enumerate(cells):
        m = len(loop)
        for k in range(m):
            va, vb = loop[k], loop[(k + 1) % m]
            key = (min(va, vb), max(va, vb))
            common = set(vertex_sites[va]) & set(vertex_sites[vb])
            common.discard(i)
            if len(common) != 1:
                raise VoronoiError(f"ambiguous Voronoi edge {key} in cell {i}")
            j = common.pop()
            if key not in seen:
                seen[key] = (key[0], key[1], min(i, j), max(i, j))
    return [seen[k] for k in sorted(seen)]


def _two_sites(sites):
    a, b = sites
    pn = a - b
    pn /= np.linalg.norm(pn)
    s = a + b
    if np.linalg.norm(s) > 1e-9:
        f1 = s / np.linalg.norm(s)
    else:
        f1, _ = frame_for_axis(pn)
    f2 = np.cross(pn, f1)
    count = max(8, math.ceil(2 * math.pi / GREAT_CIRCLE_STEP))
    t = 2 * np.pi * np.arange(count) / count
    verts = np.cos(t)[:, None] * f1 + np.sin(t)[:, None] * f2
    vertex_sites = [(0, 1)] * count
    cells = _sort_cells(sites, verts, [range(count), range(count)])
    return SphericalVoronoi(sites, verts, vertex_sites, cells,
                            _edges_from_cells(cells, vertex_sites))


def _coplanar(sites, normal):
    n = len(sites)
    if np.mean(sites @ normal) < 0:
        normal = -normal
    e1, e2 = frame_for_axis(normal)
    ang = np.arctan2(sites @ e2, sites @ e1)
    order = [int(k) for k in np.argsort(ang, kind="stable")]
    verts = [normal, -normal]
    vertex_sites = [tuple(range(n)), tuple(range(n))]
    members = [{0, 1} for _ in range(n)]
    for k in range(n):
        i, j = order[k], order[(k + 1) % n]
        u = np.cross(normal, sites[i] - sites[j])
        u /= np.linalg.norm(u)
        others = [sites[q] for q in range(n) if q not in (i, j)]

        def margin(c):
            return c @ sites[i] - max((c @ o for o in others), default=-np.inf)

        mid = u if margin(u) >= margin(-u) else -u
        verts.append(mid)
        vertex_sites.append((min(i, j), max(i, j)))
        members[i].add(len(verts) - 1)
        members[j].add(len(verts) - 1)
    verts = np.array(verts)
    cells = _sort_cells(sites, verts, members)
    return SphericalVoronoi(sites, verts, vertex_sites, cells,
                            _edges_from_cells(cells, vertex_sites))


def _hull(sites):
    """Facets with (nearly) equal normals collapse into one vertex carrying all their sites."""
    hull = ConvexHull(sites)
    normals = hull.equations[:, :3] / np.linalg.norm(hull.equations[:, :3], axis=1, keepdims=True)
    group = list(range(len(normals)))

    def root(k):
        while group[k] != k:
            group[k] = group[group[k]]
            k = group[k]
        return k

    close = np.argwhere(np.triu(normals @ normals.T > 1.0 - _MERGE_TOL, 1))
    for a, b in close:
        group[root(a)] = root(b)
    roots = sorted({root(k) for k in range(len(normals))})
    verts = []
    vertex_sites = []
    for r in roots:
        ks = [k for k in range(len(normals)) if root(k) == r]
        nrm = normals[ks].sum(axis=0)
        verts.append(nrm / np.linalg.norm(nrm))
        vertex_sites.append(tuple(sorted({int(v) for k in ks for v in hull.simplices[k]})))
    verts = np.array(verts)
    members = [set() for _ in range(len(sites))]
    for v, ss in enumerate(vertex_sites):
        if len(ss) < 3:
            raise VoronoiError("Voronoi vertex with fewer than three sites")
        for s in ss:
            members[s].add(v)
    cells = _sort_cells(sites, verts, members)
    return SphericalVoronoi(sites, verts, vertex_sites, cells,
                            _edges_from_cells(cells, vertex_sites))


def spherical_voronoi(directions) -> SphericalVoronoi:
    """Voronoi diagram of unit directions on the unit sphere."""
    sites = np.asarray(directions, dtype=float).reshape(-1, 3)
    if len(sites) == 0:
        raise VoronoiError("no sites")
    sites = sites / np.linalg.norm(sites, axis=1, keepdims=True)
    if len(sites) > 1:
        g = sites @ sites.T
        iu = np.triu_indices(len(sites), 1)
        if np.any(g[iu] > 1.0 - 1e-12):
            raise VoronoiError("duplicate sites")
    if len(sites) == 1:
        return SphericalVoronoi(sites, np.zeros((0, 3)), [], [[]], [])
    if len(sites) == 2:
        return _two_sites(sites)
    centered = sites - sites.mean(axis=0)
    _, sv, vt = np.linalg.svd(centered)
    if len(sites) == 3 or sv[2] < _COPLANAR_TOL * max(sv[0], 1e-300):
        return _coplanar(sites, vt[2] / np.linalg.norm(vt[2]))
    return _hull(sites)
