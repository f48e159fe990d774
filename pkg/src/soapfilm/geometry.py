"""Small geometric primitives shared by the pipeline stages."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


class GeometryError(ValueError):
    pass


def normalize(v, eps=1e-300):
    """Normalize vectors along the last axis; raises on zero-length input."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n <= eps):
        raise GeometryError("cannot normalize a zero-length vector")
    return v / n


def angle_between(a, b):
    """Unsigned angle between vectors, via atan2(|a x b|, a.b)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cross = np.linalg.norm(np.cross(a, b), axis=-1)
    dot = np.sum(a * b, axis=-1)
    return np.arctan2(cross, dot)


def frame_for_axis(axis):
    """Deterministic right-handed frame (e1, e2) orthogonal to ``axis``.

    e1 is the projection of the global axis least aligned with ``axis``;
    ties resolve to the lowest index. ``axis`` and ``-axis`` share e1.
    """
    axis = np.asarray(axis, dtype=float)
    k = int(np.argmin(np.abs(axis)))
    g = np.zeros(3)
    g[k] = 1.0
    e1 = g - np.dot(g, axis) * axis
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    e2 /= np.linalg.norm(e2)
    return e1, e2


def wrap_angle(u):
    return np.mod(u, TWO_PI)


@dataclass(frozen=True)
class Circle3:
    """Oriented circle c(u) = center + radius (cos u e1 + sin u e2)."""

    center: np.ndarray
    axis: np.ndarray
    radius: float

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        n = np.linalg.norm(axis)
        if not np.isfinite(n) or n == 0.0:
            raise GeometryError("circle axis must be nonzero")
        if self.radius <= 0:
            raise GeometryError("circle radius must be positive")
        object.__setattr__(self, "axis", axis / n)
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        e1, e2 = frame_for_axis(self.axis)
        object.__setattr__(self, "_e1", e1)
        object.__setattr__(self, "_e2", e2)

    @property
    def e1(self) -> np.ndarray:
        return self._e1

    @property
    def e2(self) -> np.ndarray:
        return self._e2

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        c = np.cos(u)[..., None]
        s = np.sin(u)[..., None]
        return self.center + self.radius * (c * self._e1 + s * self._e2)

    def normal(self, u):
        """Outward cylinder normal at parameter ``u``."""
        u = np.asarray(u, dtype=float)
        return np.cos(u)[..., None] * self._e1 + np.sin(u)[..., None] * self._e2

    def parameter_of(self, p):
        """Parameter of the nearest circle point to ``p`` (plane projection, then radial)."""
        d = np.asarray(p, dtype=float) - self.center
        x = d @ self._e1
        y = d @ self._e2
        if np.any(np.hypot(x, y) < 1e-14 * max(1.0, self.radius)):
            raise GeometryError("point projects onto the circle center")
        return wrap_angle(np.arctan2(y, x))

    def to_dict(self):
        return {
            "center": self.center.tolist(),
            "axis": self.axis.tolist(),
            "radius": float(self.radius),
        }


def ray_cylinder(direction, axis, radius):
    """Distance along a ray from a point on the cylinder axis to the cylinder wall.

    The ray starts on the axis, so there is exactly one forward hit at
    ``t = r / |d x a|``. Rays parallel to the axis raise ``GeometryError``.
    """
    direction = np.asarray(direction, dtype=float)
    s = np.linalg.norm(np.cross(direction, axis), axis=-1)
    s = s / np.linalg.norm(direction, axis=-1)
    if np.any(s < 1e-12):
        raise GeometryError("ray is parallel to the cylinder axis")
    return radius / s


def distance_to_line(p, origin, axis):
    """Distance from points to the infinite line origin + t*axis (axis unit)."""
    d = np.asarray(p, dtype=float) - origin
    return np.linalg.norm(d - (d @ axis)[..., None] * axis, axis=-1)
