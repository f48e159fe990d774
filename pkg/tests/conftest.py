import numpy as np
import pytest
from hypothesis import settings

from soapfilm.graph import node_star
from soapfilm.pipeline import PipelineConfig, run_star
from soapfilm.shapes import REGULAR, regular_directions, star_graph

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


@pytest.fixture(scope="session")
def regular_results():
    """Default-pipeline results for the three regular nodes, computed once."""
    out = {}
    for name in REGULAR:
        star = node_star(star_graph(regular_directions(name)), 0)
        out[name] = (star, run_star(star, PipelineConfig(dump_faired=True)))
    return out


@pytest.fixture
def octa_star():
    return node_star(star_graph(regular_directions("regular6")), 0)
