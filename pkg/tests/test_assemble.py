import io
import struct

import numpy as np
import pytest

from soapfilm.assemble import (CAP, NODE, STRUT, AssemblyError, Ring, cap_valence_one,
                               tessellate_strut, zip_rings)
from soapfilm.geometry import TWO_PI, Circle3
from soapfilm.graph import Edge, LatticeGraph, Node, make_graph
from soapfilm.mesh import boundary_loops, edge_topology, is_closed_manifold
from soapfilm.meshio import ExportError, export, read_obj, read_ply, read_stl_binary
from soapfilm.pipeline import PipelineConfig, build_lattice
from soapfilm.shapes import cube_cell, grid_graph, regular_directions, star_graph

X = np.array([1.0, 0, 0])


def rings_for(n_a, n_b, length=5.0):
    ca = Circle3(np.zeros(3), X, 1.0)
    cb = Circle3(length * X, -X, 1.0)
    ua = TWO_PI * np.arange(n_a) / n_a
    ub = TWO_PI * np.arange(n_b) / n_b
    pos = np.r_[ca(ua), cb(ub)]
    return pos, Ring(ca, np.arange(n_a), ua), Ring(cb, n_a + np.arange(n_b), ub)


def test_sleeve_32():
    pos, a, b = rings_for(32, 32)
    new, tris = tessellate_strut(Edge(0, 0, 1), a, b, positions=pos)
    assert len(new) == 0 and len(tris) == 64
    rho = np.linalg.norm(pos[:, 1:], axis=1)
    assert np.max(np.abs(rho - 1)) <= 1e-12
    # open tube: two boundary loops, outward faces
    assert len(boundary_loops(tris)) == 2
    p = pos[tris]
    n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    c = p.mean(axis=1)
    assert np.all(np.sum(n[:, 1:] * c[:, 1:], axis=1) > 0)


@pytest.mark.parametrize("na,nb", [(8, 13), (32, 16), (5, 5)])
def test_sleeve_ring_mismatch_zipper(na, nb):
    pos, a, b = rings_for(na, nb)
    _, tris = tessellate_strut(Edge(0, 0, 1), a, b, positions=pos)
    assert len(tris) == na + nb
    assert sorted(len(loop) for loop in boundary_loops(tris)) == sorted([na, nb])


def test_sleeve_segments():
    pos, a, b = rings_for(16, 16)
    new, tris = tessellate_strut(Edge(0, 0, 1), a, b, segments=3, positions=pos)
    assert len(new) == 32 and len(tris) == 3 * 32
    assert np.max(np.abs(np.linalg.norm(new[:, 1:], axis=1) - 1)) <= 1e-12


def test_zero_length_sleeve_asserted():
    ca = Circle3(np.zeros(3), X, 1.0)
    ring = Ring(ca, np.arange(8), TWO_PI * np.arange(8) / 8)
    other = Ring(Circle3(np.zeros(3), -X, 1.0), 8 + np.arange(8), ring.u)
    with pytest.raises(AssemblyError):
        tessellate_strut(Edge(3, 0, 1), ring, other)


def test_cap_fan():
    c = Circle3(np.zeros(3), X, 1.0)
    pos, tris, u = cap_valence_one(Node(0, (0, 0, 0)), c, 32)
    assert len(tris) == 32
    p = pos[tris]
    n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    assert np.allclose(n, -X)


def test_zip_rings_cover_both():
    tris = zip_rings(np.array([0.1, 2.0, 4.0]), np.array([0.5, 1.0, 3.0, 5.5]))
    assert len(tris) == 7
    assert set(tris.ravel()) == set(range(7))


def test_single_edge_graph_is_sphere():
    g = make_graph([(0, 0, 0), (10, 0, 0)], [(0, 1)], 1.0)
    m = build_lattice(g, PipelineConfig()).mesh
    assert is_closed_manifold(m.triangles) and m.euler_characteristic == 2
    assert set(np.unique(m.kind)) == {STRUT, CAP}


def test_octahedron_star_closed():
    res = build_lattice(star_graph(regular_directions("regular6")), PipelineConfig())
    m = res.mesh
    assert is_closed_manifold(m.triangles)
    assert m.euler_characteristic == 2
    c = res.census
    assert (c.cylindrical, c.subdivision, c.boundary_curves, c.planar_caps) == (6, 1, 12, 6)


def test_cube_cell_census_and_genus():
    g = cube_cell()
    res = build_lattice(g, PipelineConfig())
    assert res.census.as_tuple() == (12, 8, 24) and res.census.planar_caps == 0
    assert res.mesh.euler_characteristic == 2 - 2 * (12 - 8 + 1) == -8


def test_seam_vertices_shared():
    m = build_lattice(cube_cell(), PipelineConfig(iterations=1)).mesh
    # every vertex of a strut triangle is also used by a node triangle (no seam duplicates)
    strut_v = np.unique(m.triangles[m.kind == STRUT])
    node_v = np.unique(m.triangles[m.kind == NODE])
    assert np.all(np.isin(strut_v, node_v))
    # no two distinct vertices coincide
    rounded = np.unique(np.round(m.positions, 12), axis=0)
    assert len(rounded) == len(m.positions)


def test_grid_graph_genus():
    g = grid_graph(2, 2, 3)
    res = build_lattice(g, PipelineConfig(iterations=1))
    assert res.mesh.euler_characteristic == 2 - 2 * (g.n_edges - g.n_nodes + 1)


def test_export_round_trips():
    m = build_lattice(star_graph(regular_directions("regular6")), PipelineConfig(iterations=1)).mesh
    buf = io.BytesIO()
    export(m, "obj", buf)
    v, f = read_obj(io.BytesIO(buf.getvalue()))
    assert np.array_equal(v, m.positions) and np.array_equal(f, m.triangles)
    buf = io.BytesIO()
    export(m, "ply", buf, vertex_scalars={"k": np.arange(len(m.positions), dtype=float)})
    v, f, sc = read_ply(io.BytesIO(buf.getvalue()))
    assert np.array_equal(v, m.positions) and np.array_equal(f, m.triangles)
    assert np.array_equal(sc["k"], np.arange(len(m.positions)))
    buf = io.BytesIO()
    export(m, "stl_binary", buf)
    data = buf.getvalue()
    assert len(data) == 84 + 50 * len(m.triangles)
    assert struct.unpack_from("<I", data, 80)[0] == len(m.triangles)
    tris, count = read_stl_binary(io.BytesIO(data))
    assert count == len(m.triangles)
    assert np.allclose(tris, m.positions[m.triangles], atol=1e-5)


def test_export_deterministic_and_errors():
    g = cube_cell()
    outs = []
    for _ in range(2):
        buf = io.BytesIO()
        export(build_lattice(g, PipelineConfig(iterations=1)).mesh, "obj", buf)
        outs.append(buf.getvalue())
    assert outs[0] == outs[1]
    empty = LatticeGraph([], [], 1.0)
    with pytest.raises(ExportError, match="nothing to export"):
        export(build_lattice(empty, PipelineConfig()).mesh, "obj", io.BytesIO())
    with pytest.raises(ExportError):
        export(build_lattice(g, PipelineConfig(iterations=0)).mesh, "step", io.BytesIO())


class FailingSink:
    def write(self, data):
        raise OSError("disk full")


def test_sink_failure():
    m = build_lattice(cube_cell(), PipelineConfig(iterations=0)).mesh
    with pytest.raises(ExportError, match="sink"):
        export(m, "obj", FailingSink())
