"""Bulk shot scoring and pool construction.

Scoring a decoding window is expensive (two matchings plus a shortest
path) but depends only on the syndrome, and at realistic error rates
the same few syndromes recur millions of times.  Shots are therefore
sampled in vectorized chunks, grouped by syndrome, and each distinct
syndrome is decoded and scored exactly once.

Errors may be drawn at elevated per-edge probabilities with importance
weights attached, so that calibration statistics for a low-error-rate
deployment can be collected from far fewer shots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calibration import CalibrationCurve, bin_dcs, fit_calibration
from .confidence import complementary_gap, swim_distance
from .errors import ConfigError
from .graphs import DecodingGraph, logical_parity
from .multiwindow import WindowPool

__all__ = [
    "ScoredShots",
    "score_shots",
    "calibrate_scores",
    "build_pool",
]

_CHUNK_SHOTS = 1 << 17


@dataclass
class ScoredShots:
    """Per-shot scores with the per-syndrome working set retained.

    Per-shot arrays are views into the unique-syndrome arrays through
    `inverse`; `weights` is None unless the shots were importance
    sampled, in which case it holds per-shot likelihood ratios back to
    the graph's own error probabilities.
    """

    unique_gap: np.ndarray          # phi per distinct syndrome
    unique_swim: np.ndarray
    unique_parity: np.ndarray       # correction's logical class
    unique_syndromes: list          # tuple of detector ids per distinct syndrome
    inverse: np.ndarray             # shot -> distinct syndrome index
    error_parity: np.ndarray        # logical class of each shot's true error
    weights: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n_shots(self) -> int:
        return self.inverse.size

    @property
    def n_distinct(self) -> int:
        return self.unique_gap.size

    @property
    def phi_gap(self) -> np.ndarray:
        return self.unique_gap[self.inverse]

    @property
    def phi_swim(self) -> np.ndarray:
        return self.unique_swim[self.inverse]

    @property
    def success(self) -> np.ndarray:
        return (self.unique_parity[self.inverse] == self.error_parity).astype(np.uint8)


def _incidence(graph: DecodingGraph) -> np.ndarray:
    n_d = graph.num_detectors
    inc = np.zeros((graph.num_edges, n_d), dtype=np.float32)
    for side in (graph.edges_a, graph.edges_b):
        det = side < n_d
        inc[np.flatnonzero(det), side[det]] += 1.0
    return inc % 2


def score_shots(
    graph: DecodingGraph,
    shots: int,
    rng: np.random.Generator,
    sample_probabilities=None,
    chunk: int = _CHUNK_SHOTS,
) -> ScoredShots:
    """Sample, decode and score `shots` error draws on a graph.

    With `sample_probabilities` the errors are drawn at those per-edge
    rates instead of the graph's own, and each shot receives the
    likelihood-ratio weight that reweights it back to the graph's error
    model.
    """
    if shots < 1:
        raise ConfigError("shots must be >= 1")
    p_true = graph.edge_p
    if sample_probabilities is None:
        q = p_true
        log_ratio = None
    else:
        q = np.broadcast_to(np.asarray(sample_probabilities, dtype=float), p_true.shape)
        if q.min() <= 0.0 or q.max() >= 1.0:
            raise ConfigError("sampling probabilities must lie in (0, 1)")
        log_ratio = (
            np.log(p_true) - np.log(q) - np.log1p(-p_true) + np.log1p(-q)
        ).astype(np.float64)
        log_const = float((np.log1p(-p_true) - np.log1p(-q)).sum())

    inc = _incidence(graph)
    logical = graph.edge_logical.astype(np.float32)
    n_d = graph.num_detectors

    seen: dict[bytes, int] = {}
    packed_rows: list[np.ndarray] = []
    inverse = np.empty(shots, dtype=np.int64)
    error_parity = np.empty(shots, dtype=np.uint8)
    weights = np.empty(shots) if log_ratio is not None else None

    done = 0
    while done < shots:
        m = min(chunk, shots - done)
        flips = (rng.random((m, graph.num_edges)) < q).astype(np.float32)
        synd = (flips @ inc).astype(np.int64) & 1
        error_parity[done : done + m] = (flips @ logical).astype(np.int64) & 1
        if weights is not None:
            weights[done : done + m] = np.exp(flips @ log_ratio + log_const)
        packed = np.packbits(synd.astype(np.uint8), axis=1)
        # dedupe inside the chunk first; only chunk-unique rows touch the dict
        chunk_rows, chunk_inv = np.unique(packed, axis=0, return_inverse=True)
        local_to_global = np.empty(chunk_rows.shape[0], dtype=np.int64)
        for j, row in enumerate(chunk_rows):
            key = row.tobytes()
            idx = seen.get(key)
            if idx is None:
                idx = len(seen)
                seen[key] = idx
                packed_rows.append(row)
            local_to_global[j] = idx
        inverse[done : done + m] = local_to_global[chunk_inv.ravel()]
        done += m

    n_u = len(packed_rows)
    unique_gap = np.empty(n_u)
    unique_swim = np.empty(n_u)
    unique_parity = np.empty(n_u, dtype=np.uint8)
    unique_syndromes = []
    for i, row in enumerate(packed_rows):
        bits = np.unpackbits(row)[:n_d]
        syndrome = tuple(int(v) for v in np.flatnonzero(bits))
        unique_syndromes.append(syndrome)
        gap, corr = complementary_gap(graph, syndrome)
        unique_gap[i] = gap
        unique_swim[i] = swim_distance(graph, syndrome, corr)
        unique_parity[i] = logical_parity(graph, corr.edges)

    return ScoredShots(
        unique_gap=unique_gap,
        unique_swim=unique_swim,
        unique_parity=unique_parity,
        unique_syndromes=unique_syndromes,
        inverse=inverse,
        error_parity=error_parity,
        weights=weights,
        meta={"shots": shots, "importance_sampled": log_ratio is not None},
    )


def calibrate_scores(
    scored: ScoredShots,
    kind: str = "complementary_gap",
    bin_count: int = 50,
    meta: dict | None = None,
) -> CalibrationCurve:
    """Fit a score-to-log-odds calibration line from scored shots."""
    if kind == "complementary_gap":
        phi = scored.phi_gap
    elif kind == "swim_distance":
        phi = scored.phi_swim
    else:
        raise ConfigError(f"unknown score kind {kind!r}")
    bins = bin_dcs(
        phi=phi, success=scored.success, weights=scored.weights, bin_count=bin_count
    )
    full_meta = {"kind": kind, **(meta or {}), **scored.meta}
    return fit_calibration(bins, meta=full_meta)


def build_pool(
    scored: ScoredShots, curve: CalibrationCurve, kind: str = "complementary_gap"
) -> WindowPool:
    """Turn scored shots into a window pool of (calibrated LEP, logical
    error) pairs.  Importance-sampled shots are rejected: pools feed
    with-replacement circuit synthesis, which assumes unweighted draws.
    """
    if scored.weights is not None:
        raise ConfigError("pools must be built from unweighted (deployment) shots")
    from .calibration import lep_from_dcs

    phi = scored.phi_gap if kind == "complementary_gap" else scored.phi_swim
    lep = lep_from_dcs(curve, phi)
    x = 1 - scored.success
    return WindowPool(p_L=np.asarray(lep), x=x, meta={"kind": kind, **scored.meta})
