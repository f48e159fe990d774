"""Upsample the film and fair it with a constrained bi-Laplacian solve."""

# %% Upsample: layers of rings between each end circle and its Voronoi cell
from soapfilm.cut import node_cuts
from soapfilm.fair import build_laplacian, fair, fairing_energy, upsample
from soapfilm.film import adjust_vertices, build_film, insert_curve_points
from soapfilm.graph import node_star
from soapfilm.shapes import regular_directions, star_graph

star = node_star(star_graph(regular_directions("regular6")), 0)
film = insert_curve_points(adjust_vertices(build_film(node_cuts(star, 0.3), star.node), star), star)
up = upsample(film, star, layers=3)
print(f"upsampled: {up.n_vertices} vertices, {up.n_triangles} triangles")

# %% Fair: boundary and both collar rings stay fixed, the rest minimises the bi-Laplacian energy
system = build_laplacian(up)
faired = fair(up, system)
print(f"energy before {fairing_energy(up, system):.4f}, after {fairing_energy(faired, system):.4f}")
print(f"solve residual {faired.meta['fair_residual']:.2e}")
