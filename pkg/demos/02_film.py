"""The initial film: spherical Voronoi cells joined to the end circles."""

# %% Spherical Voronoi diagram of the strut directions
from soapfilm.cut import node_cuts
from soapfilm.film import adjust_vertices, build_film, insert_curve_points
from soapfilm.graph import node_star
from soapfilm.shapes import regular_directions, star_graph
from soapfilm.voronoi import spherical_voronoi

star = node_star(star_graph(regular_directions("regular12")), 0)
vor = spherical_voronoi(star.directions)
print(f"{len(vor.vertices)} Voronoi vertices, {len(vor.edges)} Voronoi edges")

# %% Film: boundary rings on the end circles plus Voronoi vertices at node radius
film = build_film(node_cuts(star, 0.3), star.node)
print(f"film: {film.n_vertices} vertices, {film.n_triangles} triangles")

# %% Move Voronoi vertices onto the strut intersection curves, then densify those curves
film = insert_curve_points(adjust_vertices(film, star), star)
print(f"after insertion: {film.n_vertices} vertices, {film.n_triangles} triangles")
