"""Shape deviation against the uncut node, mean curvature and stage timings."""

# %% Deviation of the smoothed node from the original union of cylinders and sphere
import numpy as np

from soapfilm.graph import node_star
from soapfilm.metrics import OriginalNodeOracle, deviation, mean_curvature, timing_report
from soapfilm.pipeline import PipelineConfig, run_star
from soapfilm.shapes import REGULAR, icosphere, regular_directions, star_graph

records = []
for name in REGULAR:
    star = node_star(star_graph(regular_directions(name)), 0)
    res = run_star(star, PipelineConfig())
    rep = deviation(res.patch, OriginalNodeOracle.from_star(star), samples=200_000)
    records.append(res.timing)
    print(f"{name}: avg {rep.avg:.4f} mm, max {rep.max:.4f} mm")

# %% Mean curvature: unit sphere gives H close to 1
v, f = icosphere(4)
h = mean_curvature(v, f)
print(f"icosphere H: {np.nanmin(h):.4f} .. {np.nanmax(h):.4f}")

# %% Per-node timing summary
rep = timing_report(records)
print({k: round(v, 2) if isinstance(v, float) else v for k, v in rep.items()})
