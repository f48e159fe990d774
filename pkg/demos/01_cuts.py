"""Where to cut each strut at a node so neighbouring end circles stay apart."""

# %% The pairwise minimum cut for two struts of radius r meeting at angle theta
import numpy as np

from soapfilm.cut import node_cuts, pairwise_min_cut, verify_disjoint
from soapfilm.graph import node_star
from soapfilm.shapes import regular_directions, star_graph

for deg in (30, 60, 90, 120, 180):
    print(f"theta={deg:3d} deg  d_min={pairwise_min_cut(np.radians(deg), 1.0):.4f}")

# %% Every strut at a node is cut at (1 + lambda) times its largest pairwise value
star = node_star(star_graph(regular_directions("regular6")), 0)
cuts = node_cuts(star, lam=0.3)
for c in cuts:
    print(f"edge {c.edge_id}: cut length {c.cut_length:.4f}")

# %% The resulting end circles do not touch
print("end circles disjoint:", verify_disjoint(cuts))
