"""Decoder confidence scores and the exact log-success-odds oracle.

Two scores are provided for a decoding window:

* complementary gap: weight difference between the MWPM correction and
  the best correction forced into the opposite logical class;
* swim distance: shortest left-to-right boundary path length after the
  weights inside decoder clusters are (fractionally) zeroed.

On small graphs the true log success odds is computed exactly by
exhaustive coset enumeration, which serves as ground truth when
calibrating and validating the scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import dijkstra as _dijkstra

from .decoder import Correction, decode
from .errors import CapabilityError, ConfigError
from .graphs import DecodingGraph, logical_parity, min_weight_adjacency
from .noise import perturb_weights, sample_error

__all__ = [
    "DcsRecord",
    "LogOdds",
    "LAMBDA_CAP",
    "complementary_gap",
    "build_clusters",
    "swim_distance",
    "coset_probabilities",
    "exact_odds_table",
    "exact_log_success_odds",
    "residual_dataset",
]

LAMBDA_CAP = 16.0
ENUMERATION_EDGE_LIMIT = 30
_ENUM_CHUNK = 1 << 20


@dataclass(frozen=True)
class DcsRecord:
    """One scored decoding window."""

    phi: float
    kind: str                  # "complementary_gap" | "swim_distance"
    window_id: int = 0
    success: int | None = None


@dataclass(frozen=True)
class LogOdds:
    """Exact log success odds and the matching failure probability."""

    lambda_: float
    p_L: float
    capped: bool = False

    @staticmethod
    def from_p(p_L: float, cap: float = LAMBDA_CAP) -> "LogOdds":
        if p_L <= 0.0:
            return LogOdds(cap, 1.0 / (1.0 + 10.0 ** cap), capped=True)
        if p_L >= 1.0:
            return LogOdds(-cap, 1.0 / (1.0 + 10.0 ** -cap), capped=True)
        lam = math.log10((1.0 - p_L) / p_L)
        if abs(lam) > cap:
            lam = math.copysign(cap, lam)
            return LogOdds(lam, 1.0 / (1.0 + 10.0 ** lam), capped=True)
        return LogOdds(lam, p_L, capped=False)


def complementary_gap(graph: DecodingGraph, syndrome) -> tuple[float, Correction]:
    """Complementary gap wt(C') - wt(C) plus the original correction.

    The complementary correction is obtained by demoting the left
    boundary node to a detector, taking the syndrome of C on that graph,
    flipping the left node's membership, and decoding again.
    """
    corr = decode(graph, syndrome)
    v_left = graph.left_boundary
    idx = corr.edges
    touches_left = int(
        np.count_nonzero(
            (graph.edges_a[idx] == v_left) | (graph.edges_b[idx] == v_left)
        )
    )
    s_prime = set(int(s) for s in corr.syndrome)
    if touches_left % 2 == 1:
        s_prime.add(v_left)
    # flip the left node's membership
    s_prime ^= {v_left}
    comp = decode(graph, s_prime, boundaries=(graph.right_boundary,))
    return comp.total_weight - corr.total_weight, corr


def build_clusters(graph: DecodingGraph, correction: Correction) -> np.ndarray:
    """Covered fraction in [0, 1] per edge from the matching's clusters.

    A matched defect pair (u, v) at distance D grows geodesic balls of
    radius D/2 around each endpoint; a boundary-matched defect at
    distance D grows a single ball of radius D.  An edge partially
    inside a ball is covered pro rata by the remaining radius at each
    endpoint.
    """
    centers, radii = [], []
    for kind, u, v, dist in correction.matching:
        if kind == "pair":
            centers += [u, v]
            radii += [dist / 2.0, dist / 2.0]
        else:
            centers.append(u)
            radii.append(dist)
    frac = np.zeros(graph.num_edges)
    if not centers:
        return frac
    mat, _ = graph.adjacency()
    dist = _dijkstra(mat, directed=True, indices=np.asarray(centers, dtype=np.int64))
    dist = np.atleast_2d(dist)
    node_reach = (np.asarray(radii)[:, None] - dist).max(axis=0)
    w = graph.edge_w
    reach_a = np.clip(node_reach[graph.edges_a], 0.0, w)
    reach_b = np.clip(node_reach[graph.edges_b], 0.0, w)
    covered = np.minimum(w, reach_a + reach_b)
    pos = w > 0
    frac[pos] = covered[pos] / w[pos]
    # zero-weight edges count as covered when a ball reaches either end
    zero = ~pos
    frac[zero] = (
        (node_reach[graph.edges_a[zero]] >= 0) | (node_reach[graph.edges_b[zero]] >= 0)
    ).astype(float)
    return frac


def swim_distance(
    graph: DecodingGraph, syndrome, correction: Correction | None = None
) -> float:
    """Shortest boundary-to-boundary path after cluster weights are
    zeroed; 0 iff the clusters bridge the two boundaries."""
    if correction is None:
        correction = decode(graph, syndrome)
    frac = build_clusters(graph, correction)
    reduced = graph.edge_w * (1.0 - frac)
    adj, _ = min_weight_adjacency(graph.edges_a, graph.edges_b, reduced, graph.num_nodes)
    dist = _dijkstra(adj, directed=True, indices=np.array([graph.left_boundary]))
    return float(np.atleast_2d(dist)[0, graph.right_boundary])


# -- exact oracle --------------------------------------------------------


def _enumeration_guard(graph: DecodingGraph) -> None:
    if graph.num_edges > ENUMERATION_EDGE_LIMIT:
        raise CapabilityError(
            f"exact coset enumeration supports at most {ENUMERATION_EDGE_LIMIT} "
            f"edges, graph has {graph.num_edges}"
        )
    if graph.num_detectors > 20:
        raise CapabilityError(
            f"exact coset enumeration supports at most 20 detectors, "
            f"graph has {graph.num_detectors}"
        )


def exact_odds_table(graph: DecodingGraph) -> np.ndarray:
    """Total probability per (syndrome bitmask, logical parity).

    Enumerates all 2^|E| error subsets; returns an array of shape
    (2^D, 2) whose entry [s, c] is the probability that the error has
    detector-syndrome bitmask s and logical-cut parity c.
    """
    _enumeration_guard(graph)
    n_e = graph.num_edges
    n_d = graph.num_detectors
    delta = np.log(graph.edge_p) - np.log1p(-graph.edge_p)
    const = float(np.log1p(-graph.edge_p).sum())
    # detector incidence (E x D) over GF(2)
    inc = np.zeros((n_e, n_d), dtype=np.uint8)
    for side in (graph.edges_a, graph.edges_b):
        det = side < n_d
        inc[np.flatnonzero(det), side[det]] ^= 1
    key_weights = (1 << np.arange(n_d, dtype=np.int64))
    logical = graph.edge_logical.astype(np.uint8)

    acc = np.zeros((1 << n_d) * 2)
    total = 1 << n_e
    shifts = np.arange(n_e, dtype=np.uint64)
    start = 0
    while start < total:
        stop = min(start + _ENUM_CHUNK, total)
        idx = np.arange(start, stop, dtype=np.uint64)
        bits = ((idx[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8)
        prob = np.exp(bits @ delta + const)
        synd = (bits @ inc) & 1
        key = synd.astype(np.int64) @ key_weights
        parity = (bits @ logical) & 1
        acc += np.bincount(key * 2 + parity, weights=prob, minlength=acc.size)
        start = stop
    return acc.reshape(-1, 2)


def syndrome_key(graph: DecodingGraph, syndrome) -> int:
    """Bitmask index of a detector syndrome for exact_odds_table."""
    key = 0
    for s in syndrome:
        if not 0 <= int(s) < graph.num_detectors:
            raise ConfigError(f"node {s} is not a detector")
        key |= 1 << int(s)
    return key


def exact_log_success_odds(
    graph: DecodingGraph,
    syndrome,
    correction: Correction,
    table: np.ndarray | None = None,
) -> LogOdds:
    """Exact log success odds for a decoded window.

    p_L is the probability mass of the logical coset opposite to the
    correction's class, normalized over both cosets.  Swapping the
    correction's parity negates lambda.
    """
    if table is None:
        table = exact_odds_table(graph)
    key = syndrome_key(graph, syndrome)
    cls = logical_parity(graph, correction.edges)
    good, bad = table[key, cls], table[key, 1 - cls]
    norm = good + bad
    if norm <= 0.0:
        raise ConfigError("syndrome is unreachable under this error model")
    return LogOdds.from_p(bad / norm)


def residual_dataset(
    graphs,
    shots_per_graph: int,
    rng: np.random.Generator,
    delta: float = 0.0,
    lambda_cap: float = LAMBDA_CAP,
) -> dict:
    """(lambda, phi) samples for both score kinds across a graph family.

    Errors are drawn from each graph's own (unperturbed) probabilities;
    when delta > 0 every shot is decoded and scored on a freshly
    perturbed copy of the graph.  Samples whose |lambda| reaches the cap
    are excluded.
    """
    lams, gaps, swims = [], [], []
    for graph in graphs:
        table = exact_odds_table(graph)
        for _ in range(shots_per_graph):
            sample = sample_error(graph, rng)
            dec_graph = perturb_weights(graph, delta, rng) if delta > 0 else graph
            gap, corr = complementary_gap(dec_graph, sample.syndrome)
            swim = swim_distance(dec_graph, sample.syndrome, corr)
            odds = exact_log_success_odds(graph, sample.syndrome, corr, table)
            if odds.capped or abs(odds.lambda_) >= lambda_cap:
                continue
            lams.append(odds.lambda_)
            gaps.append(gap)
            swims.append(swim)
    return {
        "lambda": np.asarray(lams),
        "complementary_gap": np.asarray(gaps),
        "swim_distance": np.asarray(swims),
    }
