import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from swimgap import (
    ConfigError,
    build_code_capacity_graph,
    perturb_weights,
    rng_stream,
    sample_error,
    sample_error_batch,
    syndrome_of,
)


def test_rng_stream_reproducible():
    a = rng_stream(7, 3).random(5)
    b = rng_stream(7, 3).random(5)
    c = rng_stream(7, 4).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_syndrome_of_simple(d3_graph):
    g = d3_graph
    # a single left-boundary edge flips exactly one detector
    e = int(np.flatnonzero(g.edge_logical)[0])
    s = syndrome_of(g, [e])
    assert len(s) == 1
    # an internal edge flips its two endpoints
    internal = np.flatnonzero(
        (g.edges_a < g.num_detectors) & (g.edges_b < g.num_detectors)
    )
    s = syndrome_of(g, [int(internal[0])])
    assert len(s) == 2


def test_syndrome_of_validates(d3_graph):
    with pytest.raises(ConfigError):
        syndrome_of(d3_graph, [d3_graph.num_edges])
    assert syndrome_of(d3_graph, []).size == 0


@settings(max_examples=50)
@given(st.sets(st.integers(min_value=0, max_value=12), max_size=8))
def test_syndrome_linear_over_gf2(edges):
    # syndrome of a disjoint union is the xor of syndromes
    g = build_code_capacity_graph(3, 3, 0.05)
    edges = sorted(edges)
    half = edges[: len(edges) // 2]
    rest = edges[len(edges) // 2 :]
    s_all = set(syndrome_of(g, edges).tolist())
    s_xor = set(syndrome_of(g, half).tolist()) ^ set(syndrome_of(g, rest).tolist())
    assert s_all == s_xor


def test_sample_error_consistency(d3_graph, rng):
    s = sample_error(d3_graph, rng)
    assert np.array_equal(s.syndrome, syndrome_of(d3_graph, s.error_edges))


def test_sample_error_batch_matches_marginals(d3_graph):
    rng = rng_stream(0)
    shots = 20000
    batch = sample_error_batch(d3_graph, shots, rng)
    assert len(batch) == shots
    rate = sum(len(b) for b in batch) / (shots * d3_graph.num_edges)
    assert rate == pytest.approx(0.05, rel=0.05)


def test_sample_error_batch_probability_override(d3_graph):
    rng = rng_stream(1)
    batch = sample_error_batch(
        d3_graph, 5000, rng, probabilities=np.full(d3_graph.num_edges, 0.2)
    )
    rate = sum(len(b) for b in batch) / (5000 * d3_graph.num_edges)
    assert rate == pytest.approx(0.2, rel=0.05)


def test_perturb_weights_bounds(d3_graph, rng):
    delta = 0.3
    g2 = perturb_weights(d3_graph, delta, rng)
    ratio = g2.edge_w / d3_graph.edge_w
    assert np.all(ratio >= 1 - delta) and np.all(ratio <= 1 + delta)
    assert np.allclose(g2.edge_p, 1.0 / (1.0 + 10.0**g2.edge_w))
    # delta=0 is the identity
    assert perturb_weights(d3_graph, 0.0, rng) is d3_graph
    with pytest.raises(ConfigError):
        perturb_weights(d3_graph, 1.0, rng)
