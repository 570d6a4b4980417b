"""Minimum-weight perfect matching decoding.

The syndrome is reduced to a defect-matching problem on shortest-path
distances; each defect may pair with another defect or with its nearest
boundary.  Small instances are solved exactly by bitmask dynamic
programming; larger ones fall back to the blossom algorithm via
networkx using the standard defect-mirroring construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import dijkstra as _dijkstra

from .errors import ConfigError, DecodingError
from .graphs import DecodingGraph, logical_parity
from .noise import syndrome_of

__all__ = [
    "Correction",
    "DefectDistances",
    "defect_distances",
    "min_weight_perfect_matching",
    "decode",
    "is_success",
]

_DP_LIMIT = 12


@dataclass
class Correction:
    """Decoder output: an edge set with its weight and defect matching."""

    edges: np.ndarray                      # edge indices, sorted
    total_weight: float
    matching: list = field(default_factory=list)   # ("pair", u, v, dist) / ("boundary", u, b, dist)
    syndrome: np.ndarray | None = None


@dataclass
class DefectDistances:
    """Shortest-path data from each defect to everything it can match."""

    defects: np.ndarray          # defect node ids in row order
    dist: np.ndarray             # (n_defects, n_nodes) geodesic distances
    predecessors: np.ndarray     # (n_defects, n_nodes) from scipy dijkstra
    boundary_nodes: tuple        # boundary node ids considered matchable
    boundary_dist: np.ndarray    # (n_defects,) distance to nearest boundary
    boundary_choice: np.ndarray  # (n_defects,) the nearest boundary node id


def defect_distances(
    graph: DecodingGraph, defects, boundaries: tuple | None = None
) -> DefectDistances:
    """Exact single-source shortest paths from each defect.

    Raises if any defect cannot reach a boundary (disconnected graph).
    """
    nodes = np.asarray(sorted(defects), dtype=np.int64)
    bnodes = tuple(boundaries) if boundaries is not None else graph.boundaries
    mat, _ = graph.adjacency()
    if nodes.size == 0:
        return DefectDistances(
            defects=nodes,
            dist=np.empty((0, graph.num_nodes)),
            predecessors=np.empty((0, graph.num_nodes), dtype=np.int32),
            boundary_nodes=bnodes,
            boundary_dist=np.empty(0),
            boundary_choice=np.empty(0, dtype=np.int64),
        )
    dist, pred = _dijkstra(mat, directed=True, indices=nodes, return_predecessors=True)
    dist = np.atleast_2d(dist)
    pred = np.atleast_2d(pred)
    bcols = dist[:, list(bnodes)]
    pick = np.argmin(bcols, axis=1)
    bdist = bcols[np.arange(len(nodes)), pick]
    if not np.all(np.isfinite(bdist)):
        raise DecodingError("a defect is disconnected from every boundary")
    bchoice = np.array([bnodes[k] for k in pick], dtype=np.int64)
    return DefectDistances(nodes, dist, pred, bnodes, bdist, bchoice)


def _mwpm_dp(costs: np.ndarray, boundary: np.ndarray):
    """Exact solver by bitmask DP; O(2^n * n) states."""
    n = len(boundary)
    full = (1 << n) - 1
    best = np.full(1 << n, np.inf)
    choice = np.full(1 << n, -1, dtype=np.int64)
    best[0] = 0.0
    for mask in range(1, 1 << n):
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        # match i to its boundary
        c = best[rest] + boundary[i]
        pick = -1
        # or pair i with another unmatched defect j (scan ascending for
        # deterministic lowest-id tie-breaking)
        m = rest
        while m:
            j = (m & -m).bit_length() - 1
            m &= m - 1
            cand = best[rest & ~(1 << j)] + costs[i, j]
            if cand < c - 1e-15:
                c, pick = cand, j
        best[mask] = c
        choice[mask] = pick
    pairs, to_boundary = [], []
    mask = full
    while mask:
        i = (mask & -mask).bit_length() - 1
        j = choice[mask]
        if j < 0:
            to_boundary.append(i)
            mask &= ~(1 << i)
        else:
            pairs.append((i, int(j)))
            mask &= ~((1 << i) | (1 << int(j)))
    return pairs, to_boundary, float(best[full])


def _mwpm_blossom(costs: np.ndarray, boundary: np.ndarray):
    """Blossom solver on the mirrored graph: defect i gets a virtual
    partner n+i at its boundary cost; virtual nodes interconnect freely
    at zero cost, so every defect can always match a boundary."""
    import networkx as nx

    n = len(boundary)
    g = nx.Graph()
    for i in range(n):
        g.add_edge(i, n + i, weight=float(boundary[i]))
        for j in range(i + 1, n):
            g.add_edge(i, j, weight=float(costs[i, j]))
            g.add_edge(n + i, n + j, weight=0.0)
    match = nx.min_weight_matching(g)
    pairs, to_boundary = [], []
    total = 0.0
    for u, v in match:
        u, v = min(u, v), max(u, v)
        if u < n and v < n:
            pairs.append((u, v))
            total += costs[u, v]
        elif v == u + n:
            to_boundary.append(u)
            total += boundary[u]
    return pairs, to_boundary, float(total)


def min_weight_perfect_matching(costs: np.ndarray, boundary: np.ndarray):
    """Minimum-cost matching where each defect pairs with one other
    defect or its boundary.

    Returns (pairs, to_boundary, total_cost) with pairs as index tuples.
    """
    costs = np.asarray(costs, dtype=float)
    boundary = np.asarray(boundary, dtype=float)
    n = len(boundary)
    if costs.shape != (n, n):
        raise ConfigError("cost matrix shape does not match boundary vector")
    probe = costs[~np.eye(n, dtype=bool)] if n else costs
    if not (np.all(np.isfinite(probe)) and np.all(np.isfinite(boundary))):
        raise ConfigError("matching costs must be finite")
    if n == 0:
        return [], [], 0.0
    if n <= _DP_LIMIT:
        return _mwpm_dp(costs, boundary)
    return _mwpm_blossom(costs, boundary)


def _walk_path(graph: DecodingGraph, pred_row: np.ndarray, source: int, target: int):
    """Edge indices along the stored shortest path from source to target."""
    edges = []
    v = target
    while v != source:
        u = int(pred_row[v])
        if u < 0:
            raise DecodingError(f"no path between nodes {source} and {target}")
        edges.append(graph.edge_between(u, v))
        v = u
    return edges


def decode(
    graph: DecodingGraph, syndrome, boundaries: tuple | None = None
) -> Correction:
    """MWPM correction for a syndrome.

    ``boundaries`` overrides the matchable boundary nodes (used by the
    complementary decoding pass, where the left boundary is demoted to a
    detector); nodes not listed are treated as detectors.
    """
    bnodes = tuple(boundaries) if boundaries is not None else graph.boundaries
    defects = np.asarray(sorted(set(int(s) for s in syndrome)), dtype=np.int64)
    if defects.size and (defects.min() < 0 or defects.max() >= graph.num_nodes):
        raise ConfigError("syndrome contains an unknown node id")
    if set(defects.tolist()) & set(bnodes):
        raise ConfigError("syndrome may not contain a boundary node")
    if defects.size == 0:
        return Correction(
            edges=np.empty(0, dtype=np.int64),
            total_weight=0.0,
            matching=[],
            syndrome=defects,
        )
    dd = defect_distances(graph, defects, boundaries=bnodes)
    costs = dd.dist[:, defects]
    pairs, to_boundary, _ = min_weight_perfect_matching(costs, dd.boundary_dist)

    parity = np.zeros(graph.num_edges, dtype=bool)
    matching = []
    for i, j in pairs:
        u, v = int(defects[i]), int(defects[j])
        for e in _walk_path(graph, dd.predecessors[i], u, v):
            parity[e] ^= True
        matching.append(("pair", u, v, float(costs[i, j])))
    for i in to_boundary:
        u = int(defects[i])
        b = int(dd.boundary_choice[i])
        for e in _walk_path(graph, dd.predecessors[i], u, b):
            parity[e] ^= True
        matching.append(("boundary", u, b, float(dd.boundary_dist[i])))

    edges = np.flatnonzero(parity)
    return Correction(
        edges=edges,
        total_weight=float(graph.edge_w[edges].sum()),
        matching=matching,
        syndrome=defects,
    )


def is_success(graph: DecodingGraph, error_edges, correction: Correction) -> int:
    """1 iff the correction is logically equivalent to the error."""
    err = np.asarray(list(error_edges), dtype=np.int64)
    s_err = syndrome_of(graph, err)
    s_cor = syndrome_of(graph, correction.edges)
    if not np.array_equal(np.sort(s_err), np.sort(s_cor)):
        raise DecodingError("error and correction have different syndromes")
    return int(logical_parity(graph, err) == logical_parity(graph, correction.edges))
