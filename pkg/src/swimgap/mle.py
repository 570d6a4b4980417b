"""Expectation-value estimators over synthesized noisy circuit runs.

Each run carries an observed outcome z in {-1, +1} and a whole-circuit
LEP P.  Under the randomizing error model the probability of observing
+1 is theta*(1 - q) + (1 - theta)*q with q = eta*P clamped to [0, 0.5],
where theta = (1 + <Z>_th)/2 and eta absorbs a global LEP
miscalibration.  The MLE estimator minimizes the negative log
likelihood over (theta, eta); its estimate is 2*theta_hat - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .multiwindow import CircuitRuns

__all__ = [
    "RunDataset",
    "EstimatorOutput",
    "synthesize_runs",
    "estimate_unmitigated",
    "estimate_noiseless_reference",
    "negative_log_likelihood",
    "estimate_mle",
    "estimator_metrics",
]

ETA_MAX = 10.0
_GOLDEN_TOL = 1e-10


@dataclass
class RunDataset:
    """M runs of (z, P_L) with the underlying truth retained for
    benchmarking."""

    z: np.ndarray                 # observed outcomes, +-1
    P_L: np.ndarray               # whole-circuit LEPs
    z_mean_true: float
    n_windows: int = 0
    z_noiseless: np.ndarray | None = None   # latent outcomes, kept on request
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=np.int8)
        self.P_L = np.asarray(self.P_L, dtype=float)
        if self.z.shape != self.P_L.shape:
            raise ConfigError("z and P_L must have equal length")
        if self.z.size and not np.all(np.abs(self.z) == 1):
            raise ConfigError("outcomes must be +-1")
        if self.P_L.size and (self.P_L.min() < 0.0 or self.P_L.max() > 0.5):
            raise ConfigError("run LEPs must lie in [0, 0.5]")

    def __len__(self) -> int:
        return self.z.size


@dataclass(frozen=True)
class EstimatorOutput:
    estimate: float
    tag: str                        # unmitigated | abort | mle | noiseless-reference
    theta: float | None = None
    eta: float | None = None
    flags: tuple = ()


def synthesize_runs(
    runs: CircuitRuns,
    z_mean_true: float,
    rng: np.random.Generator,
    keep_latents: bool = False,
) -> RunDataset:
    """Attach noisy observable outcomes to synthesized circuit runs.

    The noiseless outcome is +1 with probability (1 + <Z>_th)/2; a
    logical error replaces it with a fresh uniform sign:
    z = z_tilde*(1 - X) - U*X.
    """
    if not -1.0 <= z_mean_true <= 1.0:
        raise ConfigError("the true expectation value must lie in [-1, 1]")
    m = runs.P_L.size
    theta = 0.5 * (1.0 + z_mean_true)
    z_tilde = np.where(rng.random(m) < theta, 1, -1).astype(np.int8)
    u = np.where(rng.random(m) < 0.5, 1, -1).astype(np.int8)
    x = runs.X.astype(np.int8)
    z = (z_tilde * (1 - x) - u * x).astype(np.int8)
    return RunDataset(
        z=z,
        P_L=runs.P_L,
        z_mean_true=z_mean_true,
        n_windows=runs.n_windows,
        z_noiseless=z_tilde if keep_latents else None,
    )


def estimate_unmitigated(dataset: RunDataset) -> EstimatorOutput:
    """Plain average of the observed outcomes."""
    if len(dataset) < 1:
        raise ConfigError("dataset is empty")
    return EstimatorOutput(estimate=float(dataset.z.mean()), tag="unmitigated")


def estimate_noiseless_reference(dataset: RunDataset) -> EstimatorOutput:
    """Average of the latent noiseless outcomes (requires keep_latents)."""
    if dataset.z_noiseless is None:
        raise ConfigError("dataset was synthesized without latents")
    return EstimatorOutput(
        estimate=float(dataset.z_noiseless.mean()), tag="noiseless-reference"
    )


def _run_probabilities(theta: float, eta: float, dataset: RunDataset) -> np.ndarray:
    q = np.clip(eta * dataset.P_L, 0.0, 0.5)
    pr_plus = theta * (1.0 - q) + (1.0 - theta) * q
    return np.where(dataset.z > 0, pr_plus, 1.0 - pr_plus)


def negative_log_likelihood(theta: float, eta: float, dataset: RunDataset) -> float:
    """-sum(log Pr(Z_j = z_j)); returns +inf (not an exception) when any
    per-run probability vanishes."""
    if not 0.0 <= theta <= 1.0:
        raise ConfigError("theta must lie in [0, 1]")
    if eta < 0.0:
        raise ConfigError("eta must be >= 0")
    pr = _run_probabilities(theta, eta, dataset)
    if np.any(pr <= 0.0):
        return math.inf
    return -float(np.log(pr).sum())


def _golden_minimize(fun, lo: float, hi: float, tol: float) -> float:
    """Derivative-free 1-D minimization; assumes unimodality on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def _solve_theta(eta: float, dataset: RunDataset) -> tuple[float, float]:
    """Exact 1-D theta solve at fixed eta (NLL is convex in theta)."""
    q = np.clip(eta * dataset.P_L, 0.0, 0.5)
    # Pr(+1) = theta (1 - 2q) + q, so per-run prob is affine in theta
    sign = dataset.z > 0
    slope = np.where(sign, 1.0 - 2.0 * q, 2.0 * q - 1.0)
    offset = np.where(sign, q, 1.0 - q)

    def nll(theta):
        pr = slope * theta + offset
        if np.any(pr <= 0.0):
            return math.inf
        return -float(np.log(pr).sum())

    theta = _golden_minimize(nll, 0.0, 1.0, _GOLDEN_TOL)
    return theta, nll(theta)


def estimate_mle(
    dataset: RunDataset, eta_max: float = ETA_MAX, fix_eta: float | None = None
) -> EstimatorOutput:
    """Two-parameter maximum likelihood estimate of the expectation.

    theta is solved exactly (convex) inside a bounded golden-section
    search over eta in [0, eta_max]; set fix_eta to skip the eta search.
    A flat likelihood falls back to the unmitigated mean with a flag.
    """
    if len(dataset) < 2:
        raise ConfigError("MLE needs at least 2 runs")
    if fix_eta is not None:
        eta_hat = fix_eta
        theta_hat, _ = _solve_theta(eta_hat, dataset)
    else:
        def profile(eta):
            return _solve_theta(eta, dataset)[1]

        eta_hat = _golden_minimize(profile, 0.0, eta_max, 1e-6 * eta_max)
        theta_hat, _ = _solve_theta(eta_hat, dataset)

    flags = []
    nll0 = negative_log_likelihood(max(0.0, theta_hat - 0.1), eta_hat, dataset)
    nll1 = negative_log_likelihood(min(1.0, theta_hat + 0.1), eta_hat, dataset)
    nll_opt = negative_log_likelihood(theta_hat, eta_hat, dataset)
    if math.isfinite(nll_opt) and abs(nll0 - nll_opt) < 1e-12 and abs(nll1 - nll_opt) < 1e-12:
        flags.append("flat-likelihood")
        return EstimatorOutput(
            estimate=float(dataset.z.mean()),
            tag="mle",
            theta=0.5 * (1.0 + float(dataset.z.mean())),
            eta=eta_hat,
            flags=tuple(flags),
        )
    clamp_active = float(np.mean(eta_hat * dataset.P_L > 0.5)) if len(dataset) else 0.0
    if clamp_active > 0:
        flags.append(f"clamp-active:{clamp_active:.3f}")
    return EstimatorOutput(
        estimate=2.0 * theta_hat - 1.0,
        tag="mle",
        theta=theta_hat,
        eta=eta_hat,
        flags=tuple(flags),
    )


def estimator_metrics(estimates, truth: float) -> tuple[float, float, float]:
    """(MSPE, bias, variance) of repeated estimates against the truth.

    Variance is the population variance, so MSPE = bias^2 + variance
    holds exactly.
    """
    e = np.asarray(estimates, dtype=float)
    if e.size < 2:
        raise ConfigError("estimator_metrics needs at least 2 repetitions")
    mspe = float(np.mean((e - truth) ** 2))
    bias = float(abs(truth - e.mean()))
    variance = float(e.var())
    return mspe, bias, variance
