"""Analytic large-distance model: a latent log-odds distribution
smeared by Gaussian score noise.

The latent per-window log odds lambda is tabulated as a density on a
uniform grid; the observed score is phi = lambda + r with r ~
N(0, smear_sigma^2) and an identity calibration map.  The model is
deformed (axis shift by default) until its implied mean LEP matches a
target, then used to compare abort criteria acting on the observable
phi versus the ideal latent lambda.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError
from .multiwindow import time_overhead

__all__ = [
    "GRID_STEP",
    "GRID_RANGE",
    "LatentOddsModel",
    "model_from_histogram",
    "deform_to_target_mean",
    "implied_dcs_distribution",
    "sample_circuit_scores",
    "compare_abort_channels",
]

GRID_STEP = 1.0 / 64.0
GRID_RANGE = 40.0


def _standard_grid() -> np.ndarray:
    n = int(round(2 * GRID_RANGE / GRID_STEP))
    return -GRID_RANGE + GRID_STEP * np.arange(n + 1)


def _p_of_lambda(lam: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.power(10.0, lam))


@dataclass
class LatentOddsModel:
    """Tabulated latent log-odds density with Gaussian score smear."""

    grid: np.ndarray               # uniform lambda grid
    pdf: np.ndarray                # density, integrates to 1
    smear_sigma: float             # std of the score noise r

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.pdf = np.asarray(self.pdf, dtype=float)
        if self.grid.shape != self.pdf.shape:
            raise ConfigError("grid and pdf must have equal length")
        if self.smear_sigma < 0.0:
            raise ConfigError("smear_sigma must be >= 0")
        step = self.step
        norm = float(self.pdf.sum() * step)
        if abs(norm - 1.0) > 1e-6:
            raise ConfigError(f"density must be normalized, integral is {norm:.8f}")

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def mean_lep(self) -> float:
        """E[1 / (1 + 10^lambda)] under the latent density."""
        return float((self.pdf * _p_of_lambda(self.grid)).sum() * self.step)

    def mean_lambda(self) -> float:
        return float((self.pdf * self.grid).sum() * self.step)

    def var_lambda(self) -> float:
        m = self.mean_lambda()
        return float((self.pdf * (self.grid - m) ** 2).sum() * self.step)

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.pdf) * self.step

    def lambda_quantile(self, q: float) -> float:
        c = self.cdf()
        return float(np.interp(q, c / c[-1], self.grid))


def model_from_histogram(centers, weights, smear_sigma: float) -> LatentOddsModel:
    """Interpolate a measured score histogram onto the standard grid and
    normalize it into a latent density (identity calibration)."""
    centers = np.asarray(centers, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if centers.size == 0 or weights.sum() <= 0:
        raise ConfigError("histogram must be non-empty with positive mass")
    grid = _standard_grid()
    pdf = np.interp(grid, centers, weights / weights.sum(), left=0.0, right=0.0)
    if centers.size == 1:
        # point mass: place it in the nearest grid cell
        pdf = np.zeros_like(grid)
        pdf[int(np.argmin(np.abs(grid - centers[0])))] = 1.0
    norm = pdf.sum() * GRID_STEP
    if norm <= 0:
        raise ConfigError("histogram support does not overlap the model grid")
    return LatentOddsModel(grid=grid, pdf=pdf / norm, smear_sigma=smear_sigma)


def _shifted(model: LatentOddsModel, shift: float) -> LatentOddsModel:
    pdf = np.interp(model.grid - shift, model.grid, model.pdf, left=0.0, right=0.0)
    norm = pdf.sum() * model.step
    if norm <= 0:
        raise ConfigError("deformation pushed all density off the grid")
    return LatentOddsModel(grid=model.grid, pdf=pdf / norm, smear_sigma=model.smear_sigma)


def _scaled(model: LatentOddsModel, a: float) -> LatentOddsModel:
    # lambda -> a*lambda: density of the scaled variable on the same grid
    pdf = np.interp(model.grid / a, model.grid, model.pdf, left=0.0, right=0.0) / a
    norm = pdf.sum() * model.step
    if norm <= 0:
        raise ConfigError("deformation pushed all density off the grid")
    return LatentOddsModel(grid=model.grid, pdf=pdf / norm, smear_sigma=model.smear_sigma)


def deform_to_target_mean(
    model: LatentOddsModel,
    target_mean_p_L: float,
    mode: str = "shift",
    max_shift: float = 30.0,
) -> LatentOddsModel:
    """Deform the latent axis until the implied mean LEP matches the
    target.

    mode "shift" (default) translates the axis; mode "scale" stretches
    it about zero.  The achievable interval is reported on failure.
    """
    if not 0.0 < target_mean_p_L < 1.0:
        raise ConfigError("target mean LEP must lie in (0, 1)")
    if mode not in ("shift", "scale"):
        raise ConfigError(f"unknown deformation mode {mode!r}")
    current = model.mean_lep()
    if abs(current - target_mean_p_L) / target_mean_p_L < 1e-12:
        return model
    if mode == "shift":
        deform = lambda t: _shifted(model, t)
        lo, hi = -max_shift, max_shift
    else:
        # stretching must not push support off the grid; cap the factor
        # by the outermost point still carrying density
        support = np.abs(model.grid[model.pdf > 0])
        s_max = float(support.max()) if support.size else model.step
        a_hi = max(1.0, GRID_RANGE / max(s_max, model.step))
        deform = lambda t: _scaled(model, math.exp(t))
        lo, hi = math.log(1e-3), math.log(a_hi)

    def gap(t):
        return deform(t).mean_lep() - target_mean_p_L

    lo_val, hi_val = gap(lo), gap(hi)
    if not (min(lo_val, hi_val) <= 0.0 <= max(lo_val, hi_val)):
        lo_mean = lo_val + target_mean_p_L
        hi_mean = hi_val + target_mean_p_L
        raise ConfigError(
            f"target {target_mean_p_L:g} outside achievable mean LEP range "
            f"[{min(lo_mean, hi_mean):.3g}, {max(lo_mean, hi_mean):.3g}]"
        )
    t_star = brentq(gap, lo, hi, xtol=1e-12)
    return deform(t_star)


def implied_dcs_distribution(model: LatentOddsModel) -> np.ndarray:
    """Density of phi = lambda + r on the model grid: the latent density
    convolved with a Gaussian of std smear_sigma (identity at 0)."""
    if model.smear_sigma == 0.0:
        return model.pdf.copy()
    half = int(math.ceil(8.0 * model.smear_sigma / model.step))
    offsets = np.arange(-half, half + 1) * model.step
    kernel = np.exp(-0.5 * (offsets / model.smear_sigma) ** 2)
    kernel /= kernel.sum()
    out = np.convolve(model.pdf, kernel, mode="same")
    norm = out.sum() * model.step
    return out / norm


def sample_circuit_scores(
    model: LatentOddsModel, n: int, rng: np.random.Generator, chunk: int = 1 << 22
):
    """Paired (phi, lambda) samples, generated in chunks.

    Yields (phi_chunk, lambda_chunk) arrays so that circuit-scale counts
    can be aggregated without materializing everything.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    cdf = model.cdf()
    cdf = cdf / cdf[-1]
    done = 0
    while done < n:
        m = min(chunk, n - done)
        u = rng.random(m)
        lam = np.interp(u, cdf, model.grid)
        phi = lam + model.smear_sigma * rng.standard_normal(m) if model.smear_sigma else lam
        yield phi, lam
        done += m


def compare_abort_channels(
    model: LatentOddsModel,
    thresholds=None,
    n_windows: int = 1,
    trials: int = 1,
    rng: np.random.Generator | None = None,
    samples_per_trial: int | None = None,
    abort_rates=None,
) -> list[dict]:
    """Abort on the observable phi versus the ideal latent lambda.

    Each phi threshold fixes a per-window abort rate rho = Pr(phi < t);
    the matching lambda threshold is the rho-quantile of the latent
    distribution, so both channels abort at the same rate (matched
    overhead).  Thresholds may instead be given as abort rates.  Each
    trial draws fresh windows and reports the factor by which the mean
    retained LEP drops under either channel, plus the time overhead.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    if (thresholds is None) == (abort_rates is None):
        raise ConfigError("give exactly one of thresholds or abort_rates")
    if rng is None:
        raise ConfigError("an rng is required")
    n_samp = samples_per_trial or min(n_windows, 1 << 20)
    grid = model.grid
    phi_pdf = implied_dcs_distribution(model)
    phi_cdf = np.cumsum(phi_pdf) * model.step
    phi_cdf /= phi_cdf[-1]
    lam_cdf = model.cdf()
    lam_cdf /= lam_cdf[-1]
    if abort_rates is None:
        pairs = [(float(np.interp(t, grid, phi_cdf)), float(t)) for t in thresholds]
    else:
        pairs = [(float(r), float(np.interp(r, phi_cdf, grid))) for r in abort_rates]
    results = []
    for rho, t_phi in pairs:
        if not 0.0 <= rho < 1.0:
            raise ConfigError("abort rates must lie in [0, 1)")
        t_lam = float(np.interp(rho, lam_cdf, grid))
        f = -math.expm1(n_windows * math.log1p(-rho)) if rho > 0 else 0.0
        overhead = time_overhead(min(f, 1.0 - 1e-15), n_windows)
        phi_factors, lam_factors = [], []
        for _ in range(trials):
            collected = 0
            base_sum = 0.0
            phi_sum, phi_n = 0.0, 0
            lam_sum, lam_n = 0.0, 0
            for phi, lam in sample_circuit_scores(model, n_samp, rng):
                p = _p_of_lambda(lam)
                base_sum += p.sum()
                keep_phi = phi >= t_phi
                keep_lam = lam >= t_lam
                phi_sum += p[keep_phi].sum()
                phi_n += int(keep_phi.sum())
                lam_sum += p[keep_lam].sum()
                lam_n += int(keep_lam.sum())
                collected += len(p)
            base_mean = base_sum / collected
            phi_mean = phi_sum / phi_n if phi_n else math.nan
            lam_mean = lam_sum / lam_n if lam_n else math.nan
            phi_factors.append(base_mean / phi_mean if phi_mean else math.inf)
            lam_factors.append(base_mean / lam_mean if lam_mean else math.inf)
        results.append(
            {
                "rho": rho,
                "discard_fraction": f,
                "overhead": overhead,
                "phi_threshold": t_phi,
                "lambda_threshold": t_lam,
                "phi_reduction": phi_factors,
                "lambda_reduction": lam_factors,
            }
        )
    return results
