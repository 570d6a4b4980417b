"""Error sampling, syndromes, and the perturbed-weight model.

All randomness flows through counter-based Philox streams keyed by
(seed, stream), so shot i is reproducible independent of execution
order or thread scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .graphs import DecodingGraph

__all__ = [
    "rng_stream",
    "ErrorSample",
    "sample_error",
    "sample_error_batch",
    "syndrome_of",
    "perturb_weights",
]


def rng_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for (seed, stream); identical inputs
    reproduce identical draws."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, stream], dtype=np.uint64)))


@dataclass(frozen=True)
class ErrorSample:
    """One sampled error chain and its syndrome."""

    error_edges: np.ndarray    # sorted edge indices
    syndrome: np.ndarray       # sorted detector ids flipped an odd number of times


def syndrome_of(graph: DecodingGraph, edge_indices) -> np.ndarray:
    """Detectors incident to an odd number of the given edges.

    Boundary flips are discarded.  Edge indices outside the graph raise.
    """
    idx = np.asarray(list(edge_indices), dtype=np.int64)
    if idx.size == 0:
        return np.empty(0, dtype=np.int64)
    if idx.min() < 0 or idx.max() >= graph.num_edges:
        raise ConfigError("edge index out of range")
    counts = np.bincount(
        np.concatenate([graph.edges_a[idx], graph.edges_b[idx]]),
        minlength=graph.num_nodes,
    )
    flipped = np.flatnonzero(counts % 2 == 1)
    return flipped[flipped < graph.num_detectors]


def sample_error(graph: DecodingGraph, rng: np.random.Generator) -> ErrorSample:
    """Include each edge independently with its probability p."""
    flips = rng.random(graph.num_edges) < graph.edge_p
    idx = np.flatnonzero(flips)
    return ErrorSample(error_edges=idx, syndrome=syndrome_of(graph, idx))


def sample_error_batch(
    graph: DecodingGraph,
    shots: int,
    rng: np.random.Generator,
    probabilities: np.ndarray | None = None,
) -> list[np.ndarray]:
    """Edge-index arrays for many shots at once.

    ``probabilities`` overrides the graph's sampling probabilities
    (used when training calibration at an elevated noise level while
    keeping the deployment weights).
    """
    p = graph.edge_p if probabilities is None else np.asarray(probabilities, dtype=float)
    out = []
    chunk = max(1, int(2e7) // max(1, graph.num_edges))
    done = 0
    while done < shots:
        m = min(chunk, shots - done)
        flips = rng.random((m, graph.num_edges)) < p
        rows, cols = np.nonzero(flips)
        splits = np.searchsorted(rows, np.arange(1, m))
        out.extend(np.split(cols, splits))
        done += m
    return out


def perturb_weights(
    graph: DecodingGraph, delta: float, rng: np.random.Generator
) -> DecodingGraph:
    """Scale each edge weight by an independent uniform draw from
    [1 - delta, 1 + delta]; probabilities are re-derived by inverting
    the weight formula.  The original graph is unmodified."""
    if not 0.0 <= delta < 1.0:
        raise ConfigError(f"delta must lie in [0, 1), got {delta}")
    if delta == 0.0:
        return graph
    scale = rng.uniform(1.0 - delta, 1.0 + delta, size=graph.num_edges)
    return graph.with_weights(graph.edge_w * scale, {"perturb_delta": delta})
