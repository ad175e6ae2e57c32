import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetclust.oracle import graph_from_code
from hetclust.pairs import n_pairs
from hetclust.sampling import Graph, SeedSpec, sample_graph
from hetclust.stats import (
    avg_clustering,
    local_clustering,
    triangle_profile,
    weighted_triangle_sum,
)

import reference
from conftest import er_model


def complete_graph(n: int) -> Graph:
    iu, ju = np.triu_indices(n, k=1)
    return Graph.from_edges(n, iu, ju)


def path_graph() -> Graph:
    return Graph.from_edges(3, np.array([0, 1]), np.array([1, 2]))


def test_triangle_profile_k3():
    prof = triangle_profile(complete_graph(3))
    assert prof.t.tolist() == [2, 2, 2]
    assert prof.d.tolist() == [2, 2, 2]


def test_triangle_profile_path():
    prof = triangle_profile(path_graph())
    assert prof.t.tolist() == [0, 0, 0]


def test_triangle_profile_k4():
    prof = triangle_profile(complete_graph(4))
    assert prof.t.tolist() == [6, 6, 6, 6]


def test_avg_clustering_extremes():
    assert avg_clustering(complete_graph(3)) == 1.0
    assert avg_clustering(path_graph()) == 0.0


def test_weighted_triangle_sum_k4():
    assert weighted_triangle_sum(complete_graph(4)) == pytest.approx(4 / 27, rel=1e-15)


def test_weighted_triangle_sum_triangle_free():
    g = Graph.from_edges(6, np.array([0, 1, 2]), np.array([3, 4, 5]))
    assert weighted_triangle_sum(g) == 0.0


def test_local_clustering_star_center():
    g = Graph.from_edges(4, np.array([0, 0, 0]), np.array([1, 2, 3]))
    assert local_clustering(g, 0) == 0.0  # degree 3, no triangle
    assert local_clustering(g, 1) == 0.0  # degree 1, zero convention


def test_local_clustering_bounds_and_errors():
    g = complete_graph(5)
    assert local_clustering(g, 2) == 1.0
    with pytest.raises(IndexError):
        local_clustering(g, 5)


def test_all_graphs_n4_match_direct_definition():
    for code in range(1 << n_pairs(4)):
        g = graph_from_code(4, code)
        adj = g.adjacency_dense()
        assert avg_clustering(g) == pytest.approx(
            reference.avg_clustering_direct(adj), rel=1e-14, abs=1e-300
        )
        assert weighted_triangle_sum(g) == pytest.approx(
            reference.weighted_triangle_sum_direct(adj), rel=1e-14, abs=1e-300
        )


def test_random_graphs_n5_match_direct_definition(rng):
    for code in rng.integers(0, 1 << n_pairs(5), size=64):
        g = graph_from_code(5, int(code))
        adj = g.adjacency_dense()
        prof = triangle_profile(g)
        assert np.array_equal(prof.t, reference.ordered_triangle_counts(adj))
        assert weighted_triangle_sum(g) == pytest.approx(
            reference.weighted_triangle_sum_direct(adj), rel=1e-14, abs=1e-300
        )


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**15 - 1), st.randoms(use_true_random=False))
def test_relabeling_invariance(code, pyrandom):
    n = 6
    g = graph_from_code(n, code)
    perm = list(range(n))
    pyrandom.shuffle(perm)
    rows, cols = g.edge_pairs()
    p = np.asarray(perm)
    pr, pc = p[rows], p[cols]
    relabeled = Graph.from_edges(n, np.minimum(pr, pc), np.maximum(pr, pc))
    assert avg_clustering(relabeled) == pytest.approx(avg_clustering(g), rel=1e-13, abs=0)
    assert weighted_triangle_sum(relabeled) == pytest.approx(
        weighted_triangle_sum(g), rel=1e-13, abs=0
    )


def test_statistic_ranges_and_triangle_identity():
    m = er_model(30, alpha=0.3)
    for r in range(8):
        g = sample_graph(m, SeedSpec(11, r))
        assert 0.0 <= avg_clustering(g) <= 1.0
        assert weighted_triangle_sum(g) >= 0.0
        prof = triangle_profile(g)
        assert np.all(prof.t <= prof.d * (prof.d - 1))
        assert np.all(prof.t % 2 == 0)
        # total equals 6x the unordered triangle count
        adj = g.adjacency_dense()
        tri = sum(
            adj[i, j] * adj[j, k] * adj[k, i]
            for i, j, k in itertools.combinations(range(g.n), 3)
        )
        assert prof.t.sum() == 6 * tri


def test_complete_graph_formulas():
    for n in (4, 5, 6, 7):
        g = complete_graph(n)
        assert avg_clustering(g) == 1.0
        expect = math.comb(n, 3) / (n - 1) ** 3
        assert weighted_triangle_sum(g) == pytest.approx(expect, rel=1e-14)


def test_statistics_on_empty_graph():
    g = Graph.from_edges(4, np.array([], dtype=np.int64), np.array([], dtype=np.int64))
    assert avg_clustering(g) == 0.0
    assert weighted_triangle_sum(g) == 0.0
    assert local_clustering(g, 0) == 0.0
