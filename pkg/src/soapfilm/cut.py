"""Minimum intersection-free strut cutting at a node."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .geometry import Circle3, angle_between
from .graph import NodeStar

DEFAULT_LAMBDA = 0.3
# Lower bound on min_length (in units of r) for valence >= 2; nearly collinear
# pairs would otherwise put both end circles on the node center.
MIN_CUT_FLOOR = 0.25


class CutError(ValueError):
    def __init__(self, message, element=None, node=None):
        super().__init__(message)
        self.element = element
        self.node = node

    def to_dict(self):
        return {"error": "invalid-cut", "message": str(self),
                "edge": self.element, "node": self.node}


@dataclass(frozen=True)
class StrutCut:
    edge_id: int
    node_id: int
    cut_length: float
    min_length: float
    candidates: dict
    end_circle: Circle3

    def to_dict(self):
        return {
            "edge": self.edge_id,
            "node": self.node_id,
            "cut_length": self.cut_length,
            "min_length": self.min_length,
            "candidates": {str(k): v for k, v in self.candidates.items()},
            "end_circle": self.end_circle.to_dict(),
        }


def pairwise_min_cut(theta, radius):
    """Shortest equal cut of two radius-``radius`` struts meeting at angle ``theta``."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0) or np.any(theta > np.pi):
        raise ValueError("theta must lie in (0, pi]")
    if np.any(np.asarray(radius) <= 0):
        raise ValueError("radius must be positive")
    # r / tan(theta/2) written as r (1 + cos) / sin: exact at 90 degrees and at pi
    d = radius * (1.0 + np.cos(theta)) / np.sin(theta)
    d = np.where(theta == np.pi, 0.0, d)
    return float(d) if d.ndim == 0 else d


def node_cuts(star: NodeStar, lam: float = DEFAULT_LAMBDA, floor: float = MIN_CUT_FLOOR):
    """Per-strut cuts at one node.

    Every strut is cut to ``(1 + lam)`` times the largest pairwise minimum
    cut against the other struts at the node. ``lam = 0`` is accepted and
    leaves end circles in tangential contact; the pipeline requires
    ``0 < lam < 0.5``.
    """
    if not 0 <= lam < 0.5:
        raise ValueError("lambda must lie in [0, 0.5)")
    radii = star.radii
    node_id = star.node.id
    if not np.allclose(radii, radii[0], rtol=1e-12, atol=0):
        raise CutError(f"node {node_id} mixes strut radii", star.edge_ids[0], node_id)
    r = float(radii[0])
    dirs = star.directions
    n = len(dirs)
    o = star.node.xyz
    theta = angle_between(dirs[:, None, :], dirs[None, :, :])
    cuts = []
    for i, s in enumerate(star.incident):
        cand = {}
        for j in range(n):
            if j != i:
                cand[star.incident[j].edge_id] = pairwise_min_cut(theta[i, j], r)
        d_min = max(cand.values()) if cand else 0.0
        if n >= 2:
            d_min = max(d_min, floor * r)
        d = (1.0 + lam) * d_min
        if d >= s.length:
            raise CutError(
                f"cut length {d:.6g} at node {node_id} reaches past edge {s.edge_id} "
                f"(length {s.length:.6g})", s.edge_id, node_id)
        circle = Circle3(o + d * s.direction, s.direction, r)
        cuts.append(StrutCut(s.edge_id, node_id, d, d_min, cand, circle))
    return cuts


def point_circle_distance(p, circle: Circle3):
    d = np.asarray(p, dtype=float) - circle.center
    h = d @ circle.axis
    rho = np.linalg.norm(d - h[..., None] * circle.axis, axis=-1)
    return np.hypot(h, rho - circle.radius)


def circle_distance(a: Circle3, b: Circle3, samples=720):
    """Minimum distance between two circles: dense sampling plus bounded refinement."""
    u = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    dist = point_circle_distance(a(u), b)
    k = int(np.argmin(dist))
    step = 2 * np.pi / samples
    res = minimize_scalar(lambda t: float(point_circle_distance(a(np.array(t)), b)),
                          bounds=(u[k] - step, u[k] + step), method="bounded",
                          options={"xatol": 1e-12})
    return min(float(dist[k]), float(res.fun))


def verify_disjoint(cuts, tol=1e-9):
    """True iff every pair of end circles is separated by a positive gap."""
    for i in range(len(cuts)):
        for j in range(i + 1, len(cuts)):
            a, b = cuts[i].end_circle, cuts[j].end_circle
            if circle_distance(a, b) <= tol * max(a.radius, b.radius):
                return False
    return True
