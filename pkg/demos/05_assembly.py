"""Whole-lattice build: nodal patches, strut sleeves and end caps in one watertight mesh."""

# %% Build a cube cell (8 nodes, 12 struts)
import io
import tempfile
from pathlib import Path

from soapfilm.meshio import export
from soapfilm.mesh import is_closed_manifold
from soapfilm.pipeline import PipelineConfig, build_lattice
from soapfilm.shapes import cube_cell, star_graph, regular_directions

res = build_lattice(cube_cell(), PipelineConfig())
m = res.mesh
print("census (cylindrical, subdivision, boundary curves):", res.census.as_tuple())
print("closed manifold:", is_closed_manifold(m.triangles), " Euler characteristic:", m.euler_characteristic)

# %% Dangling struts get flat caps
res = build_lattice(star_graph(regular_directions("regular6")), PipelineConfig())
print("planar caps:", res.census.planar_caps, " Euler characteristic:", res.mesh.euler_characteristic)

# %% Export as OBJ, binary STL or PLY
out = Path(tempfile.mkdtemp())
for fmt, ext in (("obj", "obj"), ("stl_binary", "stl"), ("ply", "ply")):
    with open(out / f"octa.{ext}", "wb") as fh:
        export(res.mesh, fmt, fh)
    print(fmt, (out / f"octa.{ext}").stat().st_size, "bytes")
