import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.spatial import cKDTree

import oracles
from phsfd import (
    InsufficientNodesError,
    InvalidSpacingError,
    build_stencils,
    discretize_boundary,
    discretize_disc,
    fill_interior,
)


class TestBoundary:
    def test_exact_division(self):
        pts = discretize_boundary(math.pi / 2)
        assert pts.shape == (4, 2)
        expected = np.array([[1, 0], [0, 1], [-1, 0], [0, -1]], dtype=float)
        assert np.allclose(pts, expected, atol=1e-15)

    def test_hundred_points_chord(self):
        pts = discretize_boundary(2 * math.pi / 100)
        assert pts.shape[0] == 100
        chord = np.linalg.norm(pts[1] - pts[0])
        assert chord == pytest.approx(2 * math.sin(math.pi / 100), rel=1e-12)
        assert chord == pytest.approx(0.0628, abs=2e-4)

    def test_count_is_rounded_circumference(self):
        # oracle: round(2*pi/h)
        for h in (0.05, 0.3, 1.7):
            assert discretize_boundary(h).shape[0] == round(2 * math.pi / h)
        assert discretize_boundary(0.05).shape[0] == 126

    def test_points_on_circle(self):
        pts = discretize_boundary(0.2)
        r = np.sqrt((pts**2).sum(axis=1))
        assert np.abs(r - 1.0).max() <= 1e-12

    @pytest.mark.parametrize("h", [0.0, -0.1, 2.0, 2.5, float("nan")])
    def test_invalid_spacing(self, h):
        with pytest.raises(InvalidSpacingError):
            discretize_boundary(h)
        with pytest.raises(InvalidSpacingError):
            fill_interior(np.array([[1.0, 0.0]]), h, 0)


class TestFill:
    def test_deterministic_and_seed_sensitive(self):
        a = discretize_disc(0.3, seed=1)
        b = discretize_disc(0.3, seed=1)
        c = discretize_disc(0.3, seed=2)
        assert np.array_equal(a.xy, b.xy)
        assert np.array_equal(a.is_boundary, b.is_boundary)
        assert a.xy.shape != c.xy.shape or not np.array_equal(a.xy, c.xy)

    def test_minimum_separation(self):
        nodes = discretize_disc(0.15, seed=3)
        d, _ = cKDTree(nodes.xy).query(nodes.xy, k=2)
        assert d[:, 1].min() >= 0.5 * 0.15

    def test_positions_inside_disc(self):
        nodes = discretize_disc(0.1, seed=0)
        r = np.sqrt((nodes.xy**2).sum(axis=1))
        assert r.max() <= 1 + 1e-12
        assert np.abs(r[nodes.is_boundary] - 1).max() <= 1e-12
        assert r[~nodes.is_boundary].max() < 1 - 0.5 * 0.1

    def test_node_count_matches_packing_bounds(self):
        # oracle: N within [0.7, 1.4] * (disc area / h^2)
        nodes = discretize_disc(0.05, seed=0)
        ratio = nodes.n_nodes / (math.pi / 0.05**2)
        assert 0.7 <= ratio <= 1.4

    def test_coverage(self):
        h = 0.15
        nodes = discretize_disc(h, seed=0)
        grid = np.linspace(-1, 1, 41)
        probes = np.array(
            [(x, y) for x in grid for y in grid if math.hypot(x, y) <= 1 - h]
        )
        d, _ = cKDTree(nodes.xy).query(probes, k=1)
        assert d.max() <= 2 * h

    def test_empty_interior_is_legal(self):
        nodes = discretize_disc(1.9, seed=0)
        assert nodes.n_interior == 0
        assert nodes.n_nodes == round(2 * math.pi / 1.9)

    def test_boundary_nodes_come_first_and_never_move(self):
        boundary = discretize_boundary(0.3)
        nodes = fill_interior(boundary, 0.3, seed=5)
        assert np.array_equal(nodes.xy[: boundary.shape[0]], boundary)
        assert nodes.is_boundary[: boundary.shape[0]].all()
        assert not nodes.is_boundary[boundary.shape[0] :].any()

    @given(
        h=st.floats(min_value=0.25, max_value=1.5),
        seed=st.integers(min_value=0, max_value=2**32),
    )
    def test_fill_properties(self, h, seed):
        nodes = discretize_disc(h, seed)
        again = discretize_disc(h, seed)
        assert np.array_equal(nodes.xy, again.xy)
        if nodes.n_nodes > 1:
            d, _ = cKDTree(nodes.xy).query(nodes.xy, k=2)
            assert d[:, 1].min() >= 0.5 * h


class TestStencils:
    def test_sizes_for_degree(self):
        # n = (m+1)(m+2)
        nodes = discretize_disc(0.2, seed=0)
        assert build_stencils(nodes, 12).members.shape[1] == 12
        assert build_stencils(nodes, 20).members.shape[1] == 20

    def test_self_is_first_member(self):
        nodes = discretize_disc(0.2, seed=1)
        st_set = build_stencils(nodes, 12)
        assert np.array_equal(st_set.members[:, 0], st_set.centers)

    def test_members_sorted_by_distance(self):
        nodes = discretize_disc(0.25, seed=2)
        st_set = build_stencils(nodes, 12)
        for row, c in zip(st_set.members, st_set.centers):
            d = np.linalg.norm(nodes.xy[row] - nodes.xy[c], axis=1)
            assert (np.diff(d) >= 0).all()

    def test_matches_brute_force_on_random_points(self):
        rng = np.random.default_rng(7)
        for total, n in [(200, 12), (500, 20)]:
            xy = rng.uniform(-1, 1, size=(total, 2))
            nodes = _nodeset_from(xy)
            st_set = build_stencils(nodes, n)
            for row, c in zip(st_set.members, st_set.centers):
                assert np.array_equal(row, oracles.knn_brute_force(xy, c, n))

    def test_matches_brute_force_with_ties(self):
        # regular grid: equidistant neighbours everywhere
        g = np.arange(15, dtype=float)
        xy = np.array([(x, y) for x in g for y in g])
        nodes = _nodeset_from(xy)
        st_set = build_stencils(nodes, 9)
        for row, c in zip(st_set.members, st_set.centers):
            assert np.array_equal(row, oracles.knn_brute_force(xy, c, 9))

    def test_insufficient_nodes(self):
        nodes = discretize_disc(1.0, seed=0)
        with pytest.raises(InsufficientNodesError):
            build_stencils(nodes, nodes.n_nodes + 1)
        with pytest.raises(ValueError):
            build_stencils(nodes, 0)


def _nodeset_from(xy):
    from phsfd import NodeSet

    return NodeSet(
        xy=np.asarray(xy, dtype=float),
        is_boundary=np.zeros(len(xy), dtype=bool),
        h=1.0,
        seed=0,
    )
