"""PN-Loop subdivision: smooth refinement that keeps boundary vertices on their circles."""

# %% Refine a faired nodal film three times
import numpy as np

from soapfilm.cut import point_circle_distance
from soapfilm.graph import node_star
from soapfilm.mesh import BOUNDARY
from soapfilm.pipeline import PipelineConfig, run_star
from soapfilm.shapes import cylinder_patch, regular_directions, star_graph
from soapfilm.subdiv import subdivide

star = node_star(star_graph(regular_directions("regular20")), 0)
res = run_star(star, PipelineConfig())
mesh = res.patch.mesh
print(f"subdivided patch: {mesh.n_vertices} vertices, {mesh.n_triangles} triangles")

# %% Boundary vertices sit exactly on the end circles
b = np.nonzero(mesh.roles == BOUNDARY)[0]
err = max(point_circle_distance(mesh.positions[v], mesh.circles[mesh.circle[v]]) for v in b)
print(f"max boundary distance to circle: {err:.2e}")

# %% A patch sampled from a cylinder, with exact normals, is reproduced exactly
patch = cylinder_patch(n=8, rows=7, jitter=0.5)
fine = subdivide(patch, iterations=3, configure=False).mesh
rho = np.linalg.norm(fine.positions[:, :2], axis=1)
print(f"cylinder reproduction error: {np.max(np.abs(rho - 1)):.2e}")
