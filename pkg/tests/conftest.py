import numpy as np
import pytest

from swimgap import build_code_capacity_graph, rng_stream


@pytest.fixture
def d3_graph():
    """d=3 code-capacity graph: 13 edges, 6 detectors, fully enumerable."""
    return build_code_capacity_graph(3, 3, 0.05)


@pytest.fixture
def fig_graph():
    """The (5, 3) worked-example graph with all weights forced to 1."""
    g = build_code_capacity_graph(5, 3, 0.05)
    return g.with_weights(np.ones(g.num_edges))


@pytest.fixture
def rng():
    return rng_stream(12345)
