import json

import numpy as np
import pytest

from soapfilm.assemble import MemorySink
from soapfilm.cut import CutError
from soapfilm.graph import make_graph, node_star
from soapfilm.mesh import is_closed_manifold
from soapfilm.pipeline import ConfigError, PipelineConfig, all_cuts, build_lattice, run_star
from soapfilm.shapes import cube_cell, regular_directions, star_graph, synthetic_lattice


def test_config_defaults_and_validation():
    c = PipelineConfig()
    assert (c.lam, c.iterations, c.layers, c.format) == (0.3, 3, 3, "obj")
    for bad in (dict(lam=0.0), dict(lam=0.5), dict(iterations=-1), dict(threads=0),
                dict(seed=-1), dict(seed=2 ** 64), dict(format="step"), dict(radius=0.0),
                dict(iterations=2, dump_subdiv=3), dict(layers=True)):
        with pytest.raises(ConfigError):
            PipelineConfig(**bad)


def test_config_precedence(tmp_path):
    doc = {"lambda": 0.2, "iterations": 2}
    c = PipelineConfig.from_dict(doc, iterations=1, lam=None)
    assert c.lam == 0.2 and c.iterations == 1
    with pytest.raises(ConfigError, match="unknown"):
        PipelineConfig.from_dict({"colour": 1})
    p = tmp_path / "c.json"
    p.write_text(json.dumps(doc))
    assert PipelineConfig.from_file(p).to_dict()["lam"] == 0.2
    p.write_text("[1]")
    with pytest.raises(ConfigError):
        PipelineConfig.from_file(p)


def test_all_cuts_reject_short_edges():
    g = make_graph([(0, 0, 0), (1.5, 0, 0), (0, 5, 0), (1.5, 5, 0)],
                   [(0, 1), (0, 2), (1, 3)], 1.0)
    with pytest.raises(CutError) as info:
        all_cuts(g, 0.3)
    assert info.value.to_dict()["edge"] is not None


def test_all_cuts_valence_one_is_none():
    cuts = all_cuts(star_graph(regular_directions("regular6")), 0.3)
    assert cuts[(0, 1)] is None and cuts[(0, 0)].cut_length == pytest.approx(1.3)


def test_iterations_zero_is_watertight():
    res = build_lattice(cube_cell(), PipelineConfig(iterations=0))
    assert is_closed_manifold(res.mesh.triangles) and res.mesh.euler_characteristic == -8


def test_threads_identical():
    g = synthetic_lattice(2, 2, 2, jitter=0.05, seed=3)
    a = build_lattice(g, PipelineConfig(iterations=1, threads=1)).mesh
    b = build_lattice(g, PipelineConfig(iterations=1, threads=2)).mesh
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.triangles, b.triangles)


def test_stream_sink_matches_memory():
    g = cube_cell()
    mem = build_lattice(g, PipelineConfig(iterations=1)).mesh
    sink = MemorySink()
    res = build_lattice(g, PipelineConfig(iterations=1), sink=sink)
    assert res.mesh is None
    other = sink.result(res.census)
    assert np.array_equal(mem.positions, other.positions)
    assert np.array_equal(mem.triangles, other.triangles)


def test_run_star_dumps_and_timing():
    star = node_star(star_graph(regular_directions("regular6")), 0)
    res = run_star(star, PipelineConfig(iterations=2, dump_cuts=True, dump_film=True,
                                        dump_faired=True, dump_subdiv=1))
    assert set(res.dumps) == {"cuts", "film", "faired", "subdiv"}
    assert len(res.dumps["cuts"]) == 6
    assert res.patch.levels == []
    assert 0 < res.smoothing_ms <= res.construction_ms
    t = res.timing
    assert t.degree == 6 and t.node == 0


def test_synthetic_lattice_degree():
    g = synthetic_lattice(3, 3, 3)
    assert max(g.valence(n.id) for n in g.nodes) == 26
    res = build_lattice(g, PipelineConfig(iterations=1))
    assert res.mesh.euler_characteristic == 2 - 2 * (g.n_edges - g.n_nodes + 1)
