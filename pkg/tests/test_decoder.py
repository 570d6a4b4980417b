import numpy as np
import pytest

from swimgap import (
    ConfigError,
    build_code_capacity_graph,
    decode,
    defect_distances,
    is_success,
    min_weight_perfect_matching,
    rng_stream,
    sample_error,
    syndrome_of,
)
from swimgap.decoder import _mwpm_blossom, _mwpm_dp
from swimgap.errors import DecodingError


def brute_force_matching_cost(costs, boundary):
    """Exhaustive oracle: every defect pairs with another or its boundary."""

    def rec(remaining):
        if not remaining:
            return 0.0
        i, rest = remaining[0], remaining[1:]
        best = boundary[i] + rec(rest)
        for k, j in enumerate(rest):
            c = costs[i][j] + rec(rest[:k] + rest[k + 1 :])
            if c < best:
                best = c
        return best

    return rec(list(range(len(boundary))))


def random_instance(rng, n):
    costs = rng.uniform(0.1, 10.0, size=(n, n))
    costs = (costs + costs.T) / 2
    np.fill_diagonal(costs, 0.0)
    boundary = rng.uniform(0.1, 10.0, size=n)
    return costs, boundary


def test_matching_matches_brute_force():
    rng = rng_stream(42)
    for _ in range(300):
        n = int(rng.integers(0, 9))
        costs, boundary = random_instance(rng, n)
        _, _, total = min_weight_perfect_matching(costs, boundary)
        assert total == pytest.approx(brute_force_matching_cost(costs, boundary), abs=1e-9)


def test_dp_and_blossom_agree():
    rng = rng_stream(43)
    for _ in range(100):
        n = int(rng.integers(2, 11))
        costs, boundary = random_instance(rng, n)
        _, _, t_dp = _mwpm_dp(costs, boundary)
        _, _, t_bl = _mwpm_blossom(costs, boundary)
        assert t_dp == pytest.approx(t_bl, abs=1e-9)


def test_matching_structure_is_valid():
    rng = rng_stream(44)
    costs, boundary = random_instance(rng, 7)
    pairs, to_boundary, total = min_weight_perfect_matching(costs, boundary)
    seen = [i for p in pairs for i in p] + list(to_boundary)
    assert sorted(seen) == list(range(7))
    recomputed = sum(costs[i, j] for i, j in pairs) + sum(boundary[i] for i in to_boundary)
    assert total == pytest.approx(recomputed)


def test_matching_rejects_bad_input():
    with pytest.raises(ConfigError):
        min_weight_perfect_matching(np.zeros((2, 3)), np.zeros(2))
    with pytest.raises(ConfigError):
        min_weight_perfect_matching(np.full((2, 2), np.inf), np.zeros(2))


def floyd_warshall_oracle(graph):
    n = graph.num_nodes
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for a, b, w in zip(graph.edges_a, graph.edges_b, graph.edge_w):
        d[a, b] = min(d[a, b], w)
        d[b, a] = min(d[b, a], w)
    for k in range(n):
        d = np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :])
    return d


def test_defect_distances_against_floyd_warshall(d3_graph):
    oracle = floyd_warshall_oracle(d3_graph)
    defects = [0, 3, 5]
    dd = defect_distances(d3_graph, defects)
    assert np.allclose(dd.dist, oracle[defects])
    assert np.allclose(
        dd.boundary_dist, oracle[defects][:, list(d3_graph.boundaries)].min(axis=1)
    )


def test_decode_empty_syndrome(d3_graph):
    corr = decode(d3_graph, [])
    assert corr.edges.size == 0
    assert corr.total_weight == 0.0


def test_decode_correction_matches_syndrome(d3_graph):
    rng = rng_stream(5)
    for _ in range(200):
        s = sample_error(d3_graph, rng)
        corr = decode(d3_graph, s.syndrome)
        assert np.array_equal(
            np.sort(syndrome_of(d3_graph, corr.edges)), np.sort(np.asarray(s.syndrome))
        )
        assert corr.total_weight == pytest.approx(
            float(d3_graph.edge_w[corr.edges].sum())
        )


def test_decode_single_defect_takes_cheapest_route(fig_graph):
    # detector 0 sits next to the left boundary: one unit edge suffices
    corr = decode(fig_graph, [0])
    assert corr.total_weight == 1.0
    assert len(corr.matching) == 1 and corr.matching[0][0] == "boundary"


def test_decode_rejects_boundary_in_syndrome(d3_graph):
    with pytest.raises(ConfigError):
        decode(d3_graph, [d3_graph.left_boundary])


def test_is_success(d3_graph):
    rng = rng_stream(6)
    hits = 0
    for _ in range(100):
        s = sample_error(d3_graph, rng)
        corr = decode(d3_graph, s.syndrome)
        hits += is_success(d3_graph, s.error_edges, corr)
    assert hits > 80  # p=0.05 decoding mostly succeeds
    # mismatched syndromes must raise, not silently report failure
    s = sample_error(d3_graph, rng)
    while s.syndrome.size == 0:
        s = sample_error(d3_graph, rng)
    with pytest.raises(DecodingError):
        is_success(d3_graph, [], decode(d3_graph, s.syndrome))


def test_decode_weighted_prefers_light_path():
    # make horizontal edges heavy on one row: matching routes around them
    g = build_code_capacity_graph(3, 3, 0.05)
    w = g.edge_w.copy()
    corr_before = decode(g, [0, 1])
    w[corr_before.edges] *= 10.0
    g2 = g.with_weights(w)
    corr_after = decode(g2, [0, 1])
    assert corr_after.total_weight <= float(g2.edge_w[corr_before.edges].sum())
