import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_rotation
from soapfilm.cut import (CutError, circle_distance, node_cuts, pairwise_min_cut,
                          verify_disjoint)
from soapfilm.geometry import Circle3
from soapfilm.graph import make_graph, node_star
from soapfilm.shapes import regular_directions, star_graph


def test_pairwise_examples():
    assert pairwise_min_cut(np.pi / 2, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert pairwise_min_cut(np.pi / 3, 1.0) == pytest.approx(3 ** 0.5, abs=1e-12)
    assert pairwise_min_cut(np.pi, 1.0) == 0.0
    for bad in (0.0, -1.0, 4.0):
        with pytest.raises(ValueError):
            pairwise_min_cut(bad, 1.0)


@given(st.floats(0.01, np.pi - 0.01), st.floats(0.05, 20.0))
def test_pairwise_formula_and_monotone(theta, r):
    assert pairwise_min_cut(theta, r) == pytest.approx(r / np.tan(theta / 2), rel=1e-12)
    assert pairwise_min_cut(theta + 0.005, r) < pairwise_min_cut(theta, r)


def test_octahedron_cuts(octa_star):
    cuts = node_cuts(octa_star, 0.3)
    assert [c.cut_length for c in cuts] == [1.3] * 6
    assert all(c.min_length == 1.0 for c in cuts)
    assert verify_disjoint(cuts)
    assert not verify_disjoint(node_cuts(octa_star, 0.0))
    c = cuts[0]
    assert np.allclose(c.end_circle.center, 1.3 * octa_star.directions[0])


def test_sixty_degree_pair():
    d = np.array([[1, 0, 0], [0.5, 3 ** 0.5 / 2, 0]])
    star = node_star(star_graph(d), 0)
    cuts = node_cuts(star, 0.3)
    assert [c.cut_length for c in cuts] == pytest.approx([1.3 * 3 ** 0.5] * 2, abs=1e-12)


def test_valence_one_zero_cut():
    star = node_star(star_graph(regular_directions("regular6")), 1)
    (cut,) = node_cuts(star, 0.3)
    assert cut.cut_length == 0.0 and cut.min_length == 0.0
    assert verify_disjoint([cut])


def test_cut_past_edge_names_edge():
    g = make_graph([(0, 0, 0), (1, 0, 0), (0, 5, 0)], [(0, 1), (0, 2)])
    with pytest.raises(CutError) as info:
        node_cuts(node_star(g, 0), 0.3)
    assert info.value.element == 0
    assert info.value.to_dict()["error"] == "invalid-cut"


def test_mixed_radii_rejected():
    from soapfilm.graph import Edge, LatticeGraph, Node
    g = LatticeGraph([Node(0, (0, 0, 0)), Node(1, (9, 0, 0)), Node(2, (0, 9, 0))],
                     [Edge(0, 0, 1, 1.0), Edge(1, 0, 2, 0.5)], 1.0)
    with pytest.raises(CutError):
        node_cuts(node_star(g, 0), 0.3)


def test_circle_distance_coaxial():
    a = Circle3(np.zeros(3), np.array([0, 0, 1.0]), 1.0)
    b = Circle3(np.array([0, 0, 2.0]), np.array([0, 0, 1.0]), 1.0)
    assert circle_distance(a, b) == pytest.approx(2.0, abs=1e-9)


def _random_star(seed, k):
    rng = np.random.default_rng(seed)
    while True:
        d = rng.normal(size=(k, 3))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        cos = d @ d.T
        if np.max(cos[~np.eye(k, dtype=bool)]) < np.cos(np.radians(25)):
            return node_star(star_graph(d, length=40.0), 0)


@given(st.integers(0, 10 ** 6), st.integers(2, 6), st.floats(0.05, 0.49))
def test_disjoint_for_valid_lambda(seed, k, lam):
    assert verify_disjoint(node_cuts(_random_star(seed, k), lam))


@given(st.integers(0, 10 ** 6), st.floats(0.0, 0.4))
def test_lambda_monotone(seed, lam):
    star = _random_star(seed, 4)
    lo = node_cuts(star, lam)
    hi = node_cuts(star, lam + 0.05)
    assert all(b.cut_length > a.cut_length for a, b in zip(lo, hi))


@given(st.integers(0, 10 ** 6))
def test_rotation_equivariance(seed):
    rng = np.random.default_rng(seed)
    star = _random_star(seed, 5)
    R = random_rotation(rng)
    rot = node_star(star_graph(star.directions @ R.T, length=40.0), 0)
    for a, b in zip(node_cuts(star, 0.3), node_cuts(rot, 0.3)):
        assert b.cut_length == pytest.approx(a.cut_length, rel=1e-10)
        assert np.allclose(R @ a.end_circle.center, b.end_circle.center, atol=1e-10)


def test_minimality_at_zero_lambda(octa_star):
    # Shrinking a 90-degree pair below its pairwise minimum makes the end circles collide.
    r = 1.0
    d = pairwise_min_cut(np.pi / 2, r)
    x, y = np.eye(3)[0], np.eye(3)[1]
    touching = circle_distance(Circle3(d * x, x, r), Circle3(d * y, y, r))
    overlapping = circle_distance(Circle3(0.9 * d * x, x, r), Circle3(0.9 * d * y, y, r))
    assert touching < 1e-6
    assert overlapping < 1e-9
    # and the swept disks overlap: the disk points nearest the other axis cross it
    assert 0.9 * d < r
