"""Whole-circuit composition of window LEPs, abort protocols and
resource planning.

Windows are assumed independent; an N-window circuit built from window
LEPs p_i fails with probability P_L = (1 - prod(1 - 2 p_i)) / 2.
Circuits are synthesized by sampling windows with replacement from an
empirical pool of (p_L, x) pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .calibration import wilson_interval
from .errors import CapabilityError, ConfigError

__all__ = [
    "WindowPool",
    "CircuitRuns",
    "compose_lep",
    "circuit_moments",
    "select_distance",
    "simulate_circuits",
    "abort_filter",
    "retained_ler_curve",
    "time_overhead",
    "abort_event_simulation",
    "spacetime_plan",
]

# pools at most this large are simulated via multinomial counts
_MULTINOMIAL_POOL_LIMIT = 64


@dataclass
class WindowPool:
    """Empirical set of single-window (LEP, logical error) pairs."""

    p_L: np.ndarray
    x: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.p_L = np.asarray(self.p_L, dtype=float)
        self.x = np.asarray(self.x, dtype=np.uint8)
        if self.p_L.shape != self.x.shape:
            raise ConfigError("pool p_L and x arrays must have equal length")
        if self.p_L.size and (self.p_L.min() < 0.0 or self.p_L.max() > 0.5):
            raise ConfigError("pool LEPs must lie in [0, 0.5]")

    def __len__(self) -> int:
        return self.p_L.size


@dataclass
class CircuitRuns:
    """M synthesized N-window circuit runs."""

    P_L: np.ndarray
    X: np.ndarray
    n_windows: int


def compose_lep(p_list) -> float:
    """Probability an odd number of windows fail:
    P_L = (1 - prod(1 - 2 p_i)) / 2."""
    p = np.asarray(p_list, dtype=float)
    if p.size and (p.min() < 0.0 or p.max() > 0.5):
        raise ConfigError("window LEPs must lie in [0, 0.5]")
    with np.errstate(divide="ignore"):
        log_terms = np.log1p(-2.0 * p)
    return -0.5 * math.expm1(float(log_terms.sum()))


def circuit_moments(mu1: float, sigma1_sq: float, n_windows: int):
    """Mean and variance of the N-window LEP from single-window moments.

    mu_N = (1 - (1 - 2 mu1)^N) / 2
    sigma_N^2 = ((( (1-2 mu1)^2 + 4 sigma1^2 )^N - (1-2 mu1)^(2N))) / 4
    evaluated in log space so N ~ 1e9 stays stable.
    """
    if n_windows < 1:
        raise ConfigError("n_windows must be >= 1")
    if not 0.0 <= mu1 <= 0.5 or sigma1_sq < 0.0:
        raise ConfigError("invalid single-window moments")
    s = 1.0 - 2.0 * mu1
    if s <= 0.0:
        mu_n = 0.5 * (1.0 - s**n_windows)
        var_n = 0.25 * ((s * s + 4.0 * sigma1_sq) ** n_windows - s ** (2 * n_windows))
        return mu_n, var_n
    log_s = math.log1p(-2.0 * mu1)
    mu_n = -0.5 * math.expm1(n_windows * log_s)
    # s^2 + 4 sigma^2 = 1 + (-4 mu1 + 4 mu1^2 + 4 sigma^2), kept in log1p form
    log_q = math.log1p(4.0 * (mu1 * mu1 - mu1 + sigma1_sq))
    # q^N - s^(2N) = s^(2N) * expm1(N*(log q - 2 log s)), all in logs
    var_n = 0.25 * math.exp(2.0 * n_windows * log_s) * math.expm1(
        n_windows * (log_q - 2.0 * log_s)
    )
    return mu_n, var_n


def select_distance(moment_model: dict, n_windows: int, eps: float) -> int:
    """Smallest code distance whose N-window mean LEP is at most eps.

    moment_model maps d -> (mu1, sigma1_sq).  Raises a capability error
    listing the best achievable mean when no distance qualifies.
    """
    best = None
    for d in sorted(moment_model):
        mu1, sig_sq = moment_model[d]
        mu_n, _ = circuit_moments(mu1, sig_sq, n_windows)
        if best is None or mu_n < best[1]:
            best = (d, mu_n)
        if mu_n <= eps:
            return d
    raise CapabilityError(
        f"no distance reaches mean LEP <= {eps:g}; best is d={best[0]} "
        f"with mu_N={best[1]:.3g}"
    )


def _simulate_multinomial(pool, n_windows, n_runs, rng):
    k = len(pool)
    with np.errstate(divide="ignore"):
        log_terms = np.log1p(-2.0 * pool.p_L)
    counts = rng.multinomial(n_windows, np.full(k, 1.0 / k), size=n_runs)
    log_prod = counts @ log_terms
    p_total = -0.5 * np.expm1(log_prod)
    parity = (counts @ pool.x.astype(np.int64)) % 2
    return p_total, parity.astype(np.uint8)


def _simulate_indexed(pool, n_windows, n_runs, rng):
    with np.errstate(divide="ignore"):
        log_terms = np.log1p(-2.0 * pool.p_L)
    x = pool.x.astype(np.int64)
    p_total = np.empty(n_runs)
    parity = np.empty(n_runs, dtype=np.uint8)
    chunk = max(1, int(5e7) // max(1, n_windows))
    done = 0
    while done < n_runs:
        m = min(chunk, n_runs - done)
        idx = rng.integers(0, len(pool), size=(m, n_windows))
        p_total[done : done + m] = -0.5 * np.expm1(log_terms[idx].sum(axis=1))
        parity[done : done + m] = x[idx].sum(axis=1) % 2
        done += m
    return p_total, parity


def simulate_circuits(
    pool: WindowPool, n_windows: int, n_runs: int, rng: np.random.Generator
) -> CircuitRuns:
    """Synthesize N-window circuits by drawing windows with replacement.

    X is the parity of the drawn windows' logical errors; P_L composes
    the drawn LEPs.  Small pools use multinomial draw counts, which is
    distributionally identical and much faster for large N.
    """
    if len(pool) == 0:
        raise ConfigError("pool must be non-empty")
    if len(pool) <= _MULTINOMIAL_POOL_LIMIT:
        p_total, parity = _simulate_multinomial(pool, n_windows, n_runs, rng)
    else:
        p_total, parity = _simulate_indexed(pool, n_windows, n_runs, rng)
    return CircuitRuns(P_L=np.minimum(p_total, 0.5), X=parity, n_windows=n_windows)


def abort_filter(
    pool: WindowPool,
    rho: float | None = None,
    threshold: float | None = None,
    n_windows: int | None = None,
):
    """Remove the riskiest windows from a pool.

    Give either a per-window discard rate rho (the top-rho fraction by
    p_L is removed; ties broken by position for an exact count) or a
    p_L threshold.  Returns (filtered pool, rho, f) where
    f = 1 - (1-rho)^N is the circuit discard fraction (nan without N).
    """
    if (rho is None) == (threshold is None):
        raise ConfigError("give exactly one of rho or threshold")
    n = len(pool)
    if n == 0:
        raise ConfigError("pool must be non-empty")
    if rho is not None:
        if not 0.0 <= rho < 1.0:
            raise ConfigError("rho must lie in [0, 1)")
        n_drop = int(round(rho * n))
        order = np.argsort(pool.p_L, kind="stable")
        keep_idx = np.sort(order[: n - n_drop])
    else:
        keep_idx = np.flatnonzero(pool.p_L <= threshold)
        if keep_idx.size == 0:
            raise ConfigError("threshold removes the entire pool")
    rho_eff = 1.0 - keep_idx.size / n
    f = float("nan")
    if n_windows is not None:
        f = -math.expm1(n_windows * math.log1p(-rho_eff)) if rho_eff > 0 else 0.0
    filtered = WindowPool(
        p_L=pool.p_L[keep_idx],
        x=pool.x[keep_idx],
        meta={**pool.meta, "abort_rho": rho_eff},
    )
    return filtered, rho_eff, f


def retained_ler_curve(pool: WindowPool, fractions, z: float = 1.96):
    """Mean retained LEP and observed LER after discarding the
    highest-p_L fraction of a pool.

    Returns one row per fraction:
    (fraction, mean_lep, ler, ler_wilson_lo, ler_wilson_hi, n_kept).
    """
    n = len(pool)
    if n == 0:
        raise ConfigError("pool must be non-empty")
    order = np.argsort(pool.p_L, kind="stable")
    p_sorted = pool.p_L[order]
    x_sorted = pool.x[order].astype(np.float64)
    cum_p = np.cumsum(p_sorted)
    cum_x = np.cumsum(x_sorted)
    rows = []
    for frac in fractions:
        if not 0.0 <= frac < 1.0:
            raise ConfigError("discard fractions must lie in [0, 1)")
        keep = n - int(round(frac * n))
        keep = max(1, keep)
        mean_lep = cum_p[keep - 1] / keep
        fails = cum_x[keep - 1]
        ler = fails / keep
        lo, hi = wilson_interval(fails, keep, z)
        rows.append((frac, float(mean_lep), float(ler), lo, hi, keep))
    return rows


def time_overhead(f: float, n_windows: int) -> float:
    """Mean time overhead per accepted shot at circuit discard fraction
    f: (f/N) / ((1-f) (1 - (1-f)^(1/N))); continuous extension 1 at f=0."""
    if not 0.0 <= f < 1.0:
        raise ConfigError("discard fraction must lie in [0, 1)")
    if n_windows < 1:
        raise ConfigError("n_windows must be >= 1")
    if f == 0.0:
        return 1.0
    # 1 - (1-f)^(1/N) computed as -expm1(log1p(-f)/N)
    denom = (1.0 - f) * (-math.expm1(math.log1p(-f) / n_windows))
    return (f / n_windows) / denom


def abort_event_simulation(
    rho: float, n_windows: int, trials: int, rng: np.random.Generator
) -> float:
    """Monte Carlo oracle for time_overhead.

    Simulates per-window abort draws: a run aborts at the first window
    whose draw fires (probability rho each), else completes.  Returns
    total executed windows per accepted run, divided by N.
    """
    if not 0.0 < rho < 1.0:
        raise ConfigError("rho must lie in (0, 1)")
    first = rng.geometric(rho, size=trials)
    executed = np.minimum(first, n_windows).sum()
    completed = int((first > n_windows).sum())
    if completed == 0:
        raise CapabilityError("no run completed; increase trials or lower rho")
    return float(executed) / (n_windows * completed)


@dataclass(frozen=True)
class SpacetimePlan:
    spacetime_factor: float
    qubit_factor: float
    duration_factor: float
    overhead: float


def spacetime_plan(d_from: int, d_to: int, overhead: float) -> SpacetimePlan:
    """Relative spacetime cost of running at d_to instead of d_from with
    a given abort time overhead: overhead * (d_to/d_from)^3."""
    if d_to > d_from:
        raise ConfigError("spacetime_plan expects d_to <= d_from")
    if overhead < 1.0:
        raise ConfigError("overhead must be >= 1")
    r = d_to / d_from
    return SpacetimePlan(
        spacetime_factor=overhead * r**3,
        qubit_factor=r**2,
        duration_factor=r,
        overhead=overhead,
    )
