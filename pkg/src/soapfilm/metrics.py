"""Shape deviation, discrete mean curvature and stage timing statistics."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .fair import cotangent_weights
from .graph import NodeStar
from .mesh import area_weighted_normals, edge_topology

DEFAULT_SAMPLES = 800_000
DEFAULT_SEED = 20250101


@dataclass
class OriginalNodeOracle:
    """Uncut nodal shape: union of full-length capped strut cylinders and a node sphere."""

    center: np.ndarray
    axes: np.ndarray  # (k, 3) unit
    lengths: np.ndarray  # (k,)
    radius: float

    @classmethod
    def from_star(cls, star: NodeStar) -> "OriginalNodeOracle":
        return cls(star.node.xyz, star.directions,
                   np.array([s.length for s in star.incident]), float(star.radii[0]))

    def transformed(self, rotation, translation) -> "OriginalNodeOracle":
        return OriginalNodeOracle(rotation @ self.center + translation, self.axes @ rotation.T,
                                  self.lengths.copy(), self.radius)

    def signed_distance(self, p) -> np.ndarray:
        p = np.atleast_2d(np.asarray(p, dtype=float))
        d = p - self.center
        best = np.linalg.norm(d, axis=1) - self.radius
        for axis, length in zip(self.axes, self.lengths):
            h = d @ axis
            rho = np.linalg.norm(d - h[:, None] * axis, axis=1)
            dx = rho - self.radius
            dy = np.abs(h - 0.5 * length) - 0.5 * length
            sd = np.minimum(np.maximum(dx, dy), 0.0) + np.hypot(np.maximum(dx, 0.0),
                                                                np.maximum(dy, 0.0))
            best = np.minimum(best, sd)
        return best


def oracle_distance(oracle: OriginalNodeOracle, p):
    """Magnitude of the union signed distance; a scalar for a single point."""
    d = np.abs(oracle.signed_distance(p))
    return float(d[0]) if np.ndim(p) == 1 else d


def oracle_boundary_points(oracle: OriginalNodeOracle, spacing=0.01):
    """Dense samples of the true union boundary (points not inside any other component)."""
    r = oracle.radius
    pts = []
    # sphere
    n = max(200, int(4 * np.pi * r * r / spacing ** 2))
    k = np.arange(n) + 0.5
    phi = np.arccos(1 - 2 * k / n)
    th = np.pi * (1 + 5 ** 0.5) * k
    pts.append(oracle.center + r * np.c_[np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)])
    for axis, length in zip(oracle.axes, oracle.lengths):
        e1 = np.cross(axis, [1.0, 0, 0] if abs(axis[0]) < 0.9 else [0, 1.0, 0])
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(axis, e1)
        na = max(64, int(2 * np.pi * r / spacing))
        nh = max(2, int(length / spacing))
        a = np.linspace(0, 2 * np.pi, na, endpoint=False)
        h = np.linspace(0, length, nh)
        A, H = np.meshgrid(a, h)
        ring = r * (np.cos(A)[..., None] * e1 + np.sin(A)[..., None] * e2)
        pts.append((oracle.center + H[..., None] * axis + ring).reshape(-1, 3))
        # end cap disk
        rr = np.sqrt(np.linspace(0, 1, max(4, int(r / spacing))))[:, None] * r
        aa = np.linspace(0, 2 * np.pi, na, endpoint=False)[None, :]
        cap = (rr[..., None] * (np.cos(aa)[..., None] * e1 + np.sin(aa)[..., None] * e2)
               + oracle.center + length * axis)
        pts.append(cap.reshape(-1, 3))
    pts = np.concatenate(pts)
    sd = oracle.signed_distance(pts)
    return pts[sd > -1e-9]


def brute_force_distance(oracle: OriginalNodeOracle, p, spacing=0.01):
    """Distance to densely sampled true boundary; accurate to about ``spacing``."""
    tree = cKDTree(oracle_boundary_points(oracle, spacing))
    d, _ = tree.query(np.atleast_2d(p))
    return d


@dataclass
class DeviationReport:
    samples: int
    max: float
    avg: float
    std: float
    values: np.ndarray | None = field(default=None, repr=False)

    def as_row(self):
        return {"samples": self.samples, "max": self.max, "avg": self.avg, "std": self.std}


def sample_surface(positions, triangles, samples, seed=DEFAULT_SEED):
    """Area-stratified uniform samples: each triangle gets its rounded share, remainder by largest fraction."""
    rng = np.random.default_rng(seed)
    p = positions[triangles]
    area = 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)
    share = samples * area / area.sum()
    count = np.floor(share).astype(np.int64)
    rest = samples - int(count.sum())
    if rest > 0:
        frac = share - count
        count[np.argsort(-frac, kind="stable")[:rest]] += 1
    tri = np.repeat(np.arange(len(triangles)), count)
    r1 = np.sqrt(rng.random(len(tri)))
    r2 = rng.random(len(tri))
    a = p[tri, 0]
    b = p[tri, 1]
    c = p[tri, 2]
    return (1 - r1)[:, None] * a + (r1 * (1 - r2))[:, None] * b + (r1 * r2)[:, None] * c


def deviation(patch, oracle: OriginalNodeOracle, samples=DEFAULT_SAMPLES, seed=DEFAULT_SEED,
              keep_values=False) -> DeviationReport:
    mesh = getattr(patch, "mesh", patch)
    if mesh.n_triangles == 0:
        raise ValueError("empty patch")
    pts = sample_surface(mesh.positions, mesh.triangles, samples, seed)
    d = np.abs(oracle.signed_distance(pts))
    return DeviationReport(len(d), float(d.max()), float(d.mean()), float(d.std()),
                           d if keep_values else None)


def vertex_deviation(mesh, oracle: OriginalNodeOracle):
    return np.abs(oracle.signed_distance(mesh.positions))


def mixed_areas(positions, triangles):
    """Mixed Voronoi area per vertex (obtuse triangles split by area halves/quarters)."""
    p = positions[triangles]
    n = len(positions)
    area = 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)
    out = np.zeros(n)
    cots = []
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        with np.errstate(divide="ignore", invalid="ignore"):
            cots.append(np.sum(a * b, axis=1) / (2 * area))
    cots = np.array(cots)  # cot of angle at corner k
    obtuse = cots < 0
    any_obtuse = obtuse.any(axis=0)
    for k in range(3):
        k1, k2 = (k + 1) % 3, (k + 2) % 3
        e1 = np.sum((p[:, k1] - p[:, k]) ** 2, axis=1)
        e2 = np.sum((p[:, k2] - p[:, k]) ** 2, axis=1)
        voronoi = 0.125 * (e2 * cots[k1] + e1 * cots[k2])
        val = np.where(~any_obtuse, voronoi, np.where(obtuse[k], area / 2, area / 4))
        np.add.at(out, triangles[:, k], np.nan_to_num(val))
    return out


def mean_curvature(positions, triangles=None, normals=None):
    """Signed discrete mean curvature per vertex; NaN on boundary and degenerate vertices.

    Positive where the surface bends away from its outward normal (spheres).
    """
    if triangles is None:
        mesh = getattr(positions, "mesh", positions)
        positions, triangles = mesh.positions, mesh.triangles
    positions = np.asarray(positions, dtype=float)
    triangles = np.asarray(triangles, dtype=np.int64)
    n = len(positions)
    w = cotangent_weights(positions, triangles)
    deg = np.asarray(w.sum(axis=1)).ravel()
    k = deg[:, None] * positions - w @ positions
    area = mixed_areas(positions, triangles)
    if normals is None:
        normals = area_weighted_normals(positions, triangles)
    topo = edge_topology(triangles, n)
    on_boundary = np.zeros(n, dtype=bool)
    on_boundary[topo.edges[topo.boundary].ravel()] = True
    used = np.zeros(n, dtype=bool)
    used[triangles.ravel()] = True
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.linalg.norm(k, axis=1) / (2 * area)
    h = np.where(np.sum(k * normals, axis=1) < 0, -h, h)
    bad = on_boundary | ~used | ~(area > 0) | ~np.isfinite(h)
    h[bad] = np.nan
    return h


@dataclass
class TimingRecord:
    node: int
    degree: int
    smoothing_ms: float
    construction_ms: float


def timing_report(records, n_edges=None, n_nodes=None):
    """Min/max/avg smoothing and construction milliseconds over timed nodes."""
    if not records:
        raise ValueError("no timing records")
    sm = np.array([r.smoothing_ms for r in records])
    co = np.array([r.construction_ms for r in records])
    return {
        "edges": n_edges,
        "nodes": n_nodes if n_nodes is not None else len(records),
        "max_degree": max(r.degree for r in records),
        "smoothing_min": float(sm.min()), "smoothing_max": float(sm.max()),
        "smoothing_avg": float(sm.mean()),
        "construction_min": float(co.min()), "construction_max": float(co.max()),
        "construction_avg": float(co.mean()),
    }


def timing_csv(records, summary=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node", "degree", "smoothing_ms", "construction_ms"])
    for r in records:
        w.writerow([r.node, r.degree, f"{r.smoothing_ms:.3f}", f"{r.construction_ms:.3f}"])
    if summary is not None:
        w.writerow([])
        w.writerow(list(summary))
        w.writerow([summary[k] for k in summary])
    return buf.getvalue()


def deviation_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "samples", "max", "avg", "std"])
    for name, rep in rows:
        w.writerow([name, rep.samples, f"{rep.max:.6f}", f"{rep.avg:.6f}", f"{rep.std:.6f}"])
    return buf.getvalue()
