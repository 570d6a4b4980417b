"""Decoding graphs for unrotated surface codes.

The X decoding graph of an unrotated surface code with distances
(d_X, d_Z) is a grid of detectors with d_Z rows and d_X - 1 columns,
flanked by two merged boundary nodes (left and right).  Each edge is an
independent error mechanism with probability p and weight
log10((1 - p) / p).  Edges incident to the left boundary node form the
logical cut: any left-to-right crossing toggles the logical class.

Node ids are dense integers: detectors come first in row-major order
(and, for the phenomenological model, round-major outermost), followed
by the left then right boundary node.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix

from .errors import ConfigError

__all__ = [
    "DecodingGraph",
    "edge_weight",
    "probability_from_weight",
    "build_code_capacity_graph",
    "build_phenomenological_graph",
    "logical_parity",
]


def min_weight_adjacency(edges_a, edges_b, weights, n_nodes):
    """Symmetric CSR adjacency keeping the lightest parallel edge per
    node pair, plus a CSR map of representative edge index + 1."""
    a = np.asarray(edges_a, dtype=np.int64)
    b = np.asarray(edges_b, dtype=np.int64)
    w = np.asarray(weights, dtype=float)
    order = np.lexsort((w, b, a))
    aa, bb, ww = a[order], b[order], w[order]
    keep = np.ones(len(aa), dtype=bool)
    keep[1:] = (aa[1:] != aa[:-1]) | (bb[1:] != bb[:-1])
    aa, bb, ww, ee = aa[keep], bb[keep], ww[keep], order[keep]
    rows = np.concatenate([aa, bb])
    cols = np.concatenate([bb, aa])
    data = np.concatenate([ww, ww])
    eidx = np.concatenate([ee, ee])
    mat = csr_matrix((data, (rows, cols)), shape=(n_nodes, n_nodes))
    emat = csr_matrix((eidx + 1, (rows, cols)), shape=(n_nodes, n_nodes), dtype=np.int64)
    return mat, emat


def edge_weight(p: float) -> float:
    """Weight log10((1-p)/p) of an error mechanism with probability p."""
    if not 0.0 < p < 1.0:
        raise ConfigError(f"edge probability must lie in (0, 1), got {p}")
    return math.log10((1.0 - p) / p)


def probability_from_weight(w) -> np.ndarray:
    """Invert the weight formula: p = 1 / (1 + 10**w)."""
    return 1.0 / (1.0 + np.power(10.0, np.asarray(w, dtype=float)))


@dataclass(eq=False)
class DecodingGraph:
    """Weighted detector/boundary graph with a marked logical cut.

    Immutable by convention after construction; the adjacency cache is
    the only lazily filled field.  Safe to share across workers.
    """

    detectors: np.ndarray          # detector node ids, dense 0..D-1
    boundaries: tuple[int, ...]    # (left, right) node ids, or (right,) in derived graphs
    edges_a: np.ndarray            # first endpoint per edge (a < b)
    edges_b: np.ndarray            # second endpoint per edge
    edge_p: np.ndarray             # error probability per edge
    edge_w: np.ndarray             # log10((1-p)/p) per edge (before any perturbation)
    edge_logical: np.ndarray       # bool, True if the edge crosses the logical cut
    meta: dict = field(default_factory=dict)

    _adjacency: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.detectors = np.asarray(self.detectors, dtype=np.int64)
        self.edges_a = np.asarray(self.edges_a, dtype=np.int64)
        self.edges_b = np.asarray(self.edges_b, dtype=np.int64)
        self.edge_p = np.asarray(self.edge_p, dtype=float)
        self.edge_w = np.asarray(self.edge_w, dtype=float)
        self.edge_logical = np.asarray(self.edge_logical, dtype=bool)
        if set(self.detectors) & set(self.boundaries):
            raise ConfigError("detector and boundary node sets must be disjoint")

    @property
    def num_detectors(self) -> int:
        return len(self.detectors)

    @property
    def num_nodes(self) -> int:
        return len(self.detectors) + len(self.boundaries)

    @property
    def num_edges(self) -> int:
        return len(self.edges_a)

    @property
    def left_boundary(self) -> int:
        return self.boundaries[0]

    @property
    def right_boundary(self) -> int:
        return self.boundaries[-1]

    def is_boundary(self, node: int) -> bool:
        return node in self.boundaries

    def weight_of(self, edge_indices) -> float:
        """Total weight of an edge subset given by indices."""
        return float(self.edge_w[np.asarray(edge_indices, dtype=np.int64)].sum())

    def adjacency(self):
        """Sparse min-weight adjacency plus a representative-edge map.

        Parallel edges between the same node pair are collapsed to the
        lightest one for shortest-path purposes; ``edge_of[i, j]`` gives
        the representative edge index in CSR layout.
        """
        if self._adjacency is None:
            self._adjacency = min_weight_adjacency(
                self.edges_a, self.edges_b, self.edge_w, self.num_nodes
            )
        return self._adjacency

    def edge_between(self, u: int, v: int) -> int:
        """Representative (lightest) edge index between adjacent nodes u, v."""
        _, emat = self.adjacency()
        e = int(emat[u, v])
        if e == 0:
            raise ConfigError(f"no edge between nodes {u} and {v}")
        return e - 1

    def with_weights(self, new_w: np.ndarray, meta_update: dict | None = None) -> "DecodingGraph":
        """Copy of this graph with replaced weights (probabilities re-derived)."""
        meta = dict(self.meta)
        if meta_update:
            meta.update(meta_update)
        return DecodingGraph(
            detectors=self.detectors.copy(),
            boundaries=self.boundaries,
            edges_a=self.edges_a.copy(),
            edges_b=self.edges_b.copy(),
            edge_p=probability_from_weight(new_w),
            edge_w=np.asarray(new_w, dtype=float).copy(),
            edge_logical=self.edge_logical.copy(),
            meta=meta,
        )

    # -- serialization ---------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "detectors": self.detectors.tolist(),
            "boundaries": list(self.boundaries),
            "edges": [
                {"a": int(a), "b": int(b), "p": float(p), "w": float(w), "logical": bool(l)}
                for a, b, p, w, l in zip(
                    self.edges_a, self.edges_b, self.edge_p, self.edge_w, self.edge_logical
                )
            ],
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "DecodingGraph":
        try:
            edges = doc["edges"]
            return cls(
                detectors=np.array(doc["detectors"], dtype=np.int64),
                boundaries=tuple(doc["boundaries"]),
                edges_a=np.array([e["a"] for e in edges], dtype=np.int64),
                edges_b=np.array([e["b"] for e in edges], dtype=np.int64),
                edge_p=np.array([e["p"] for e in edges], dtype=float),
                edge_w=np.array([e["w"] for e in edges], dtype=float),
                edge_logical=np.array([e["logical"] for e in edges], dtype=bool),
                meta=doc.get("meta", {}),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed graph document: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "DecodingGraph":
        return cls.from_json_dict(json.loads(text))


def _check_distance(name: str, d: int) -> None:
    if d < 3 or d % 2 == 0:
        raise ConfigError(f"{name} must be an odd integer >= 3, got {d}")


def _finish_graph(detectors, boundaries, edge_list, meta) -> DecodingGraph:
    """Sort edges lexicographically by normalized endpoints and assemble."""
    norm = [
        (min(a, b), max(a, b), p, w)
        for a, b, p, w in edge_list
    ]
    norm.sort(key=lambda t: (t[0], t[1], t[3]))
    left = boundaries[0]
    a = np.array([t[0] for t in norm], dtype=np.int64)
    b = np.array([t[1] for t in norm], dtype=np.int64)
    p = np.array([t[2] for t in norm], dtype=float)
    w = np.array([t[3] for t in norm], dtype=float)
    logical = (a == left) | (b == left)
    return DecodingGraph(
        detectors=np.arange(len(detectors), dtype=np.int64),
        boundaries=boundaries,
        edges_a=a,
        edges_b=b,
        edge_p=p,
        edge_w=w,
        edge_logical=logical,
        meta=meta,
    )


def build_code_capacity_graph(d_x: int, d_z: int, p: float) -> DecodingGraph:
    """X decoding graph under code capacity noise, boundaries pre-merged.

    One edge per data qubit (d_x*d_z + (d_x-1)*(d_z-1) edges in total),
    one detector per Z stabiliser, two boundary nodes.
    """
    _check_distance("d_x", d_x)
    _check_distance("d_z", d_z)
    if not 0.0 < p < 0.5:
        raise ConfigError(f"code capacity probability must lie in (0, 0.5), got {p}")
    rows, cols = d_z, d_x - 1
    n_det = rows * cols
    left, right = n_det, n_det + 1
    w = edge_weight(p)

    def det(r, c):
        return r * cols + c

    edges = []
    for r in range(rows):
        edges.append((left, det(r, 0), p, w))
        for c in range(cols - 1):
            edges.append((det(r, c), det(r, c + 1), p, w))
        edges.append((det(r, cols - 1), right, p, w))
    for r in range(rows - 1):
        for c in range(cols):
            edges.append((det(r, c), det(r + 1, c), p, w))

    meta = {"model": "code-capacity", "d_x": d_x, "d_z": d_z, "rounds": 1, "p": p}
    return _finish_graph(range(n_det), (left, right), edges, meta)


def build_phenomenological_graph(
    d: int, rounds: int, p_data: float, p_meas: float
) -> DecodingGraph:
    """Space-time decoding graph under phenomenological noise.

    Detectors are (stabiliser, round) pairs.  Each round repeats the
    code-capacity layer with space-like edges of probability p_data;
    measurement errors add time-like edges of probability p_meas between
    consecutive rounds.  Final-round time-like edges attach to a virtual
    time boundary that is merged into the nearest spatial boundary
    (ties go left).
    """
    _check_distance("d", d)
    if rounds < 1:
        raise ConfigError(f"rounds must be >= 1, got {rounds}")
    for name, p in (("p_data", p_data), ("p_meas", p_meas)):
        if not 0.0 < p < 0.5:
            raise ConfigError(f"{name} must lie in (0, 0.5), got {p}")
    rows, cols = d, d - 1
    layer = rows * cols
    n_det = layer * rounds
    left, right = n_det, n_det + 1
    w_data = edge_weight(p_data)
    w_meas = edge_weight(p_meas)

    def det(r, c, t):
        return t * layer + r * cols + c

    edges = []
    for t in range(rounds):
        for r in range(rows):
            edges.append((left, det(r, 0, t), p_data, w_data))
            for c in range(cols - 1):
                edges.append((det(r, c, t), det(r, c + 1, t), p_data, w_data))
            edges.append((det(r, cols - 1, t), right, p_data, w_data))
        for r in range(rows - 1):
            for c in range(cols):
                edges.append((det(r, c, t), det(r + 1, c, t), p_data, w_data))
    for t in range(rounds):
        for r in range(rows):
            for c in range(cols):
                if t < rounds - 1:
                    edges.append((det(r, c, t), det(r, c, t + 1), p_meas, w_meas))
                else:
                    # distance to left boundary is c+1 edges, to right cols-c
                    target = left if c + 1 <= cols - c else right
                    edges.append((det(r, c, t), target, p_meas, w_meas))

    meta = {
        "model": "phenomenological",
        "d_x": d,
        "d_z": d,
        "rounds": rounds,
        "p_data": p_data,
        "p_meas": p_meas,
    }
    return _finish_graph(range(n_det), (left, right), edges, meta)


def logical_parity(graph: DecodingGraph, edge_indices) -> int:
    """Parity of logical-cut crossings of an edge subset (0 or 1)."""
    idx = np.asarray(list(edge_indices), dtype=np.int64)
    if idx.size == 0:
        return 0
    if idx.min() < 0 or idx.max() >= graph.num_edges:
        raise ConfigError("edge index out of range")
    return int(graph.edge_logical[idx].sum() % 2)
