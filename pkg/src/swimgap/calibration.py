"""Calibrating confidence scores into logical error probabilities.

Scores with success flags are binned (equal linear width), the
empirical log success odds of each failing bin is computed, and an
unweighted least-squares line lambda_hat(phi) = a*phi + b is fitted.
Inverting the log-odds relation turns the line into a map from score to
LEP.  The module also quantifies the two sources of score variation:
the spread of the underlying log odds versus the score's own
inaccuracy.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CalibrationError, ConfigError

__all__ = [
    "CalibrationBin",
    "CalibrationCurve",
    "VariationReport",
    "bin_dcs",
    "wilson_interval",
    "fit_calibration",
    "lep_from_dcs",
    "variation_report",
]

P_MIN = 1e-12      # extrapolation floor for lep_from_dcs
P_MAX = 0.5


@dataclass(frozen=True)
class CalibrationBin:
    phi_center: float
    n_total: float
    n_fail: float
    lambda_hat: float      # nan when no failures observed
    wilson_lo: float
    wilson_hi: float


@dataclass
class CalibrationCurve:
    """Linear map lambda_hat(phi) = a*phi + b with its binned data."""

    a: float
    b: float
    bins: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def bin_count(self) -> int:
        return len(self.bins)

    def to_json_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "bins": [
                {
                    "phi_center": b.phi_center,
                    "n_total": b.n_total,
                    "n_fail": b.n_fail,
                    "lambda_hat": None if math.isnan(b.lambda_hat) else b.lambda_hat,
                    "wilson_lo": b.wilson_lo,
                    "wilson_hi": b.wilson_hi,
                }
                for b in self.bins
            ],
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "CalibrationCurve":
        try:
            bins = [
                CalibrationBin(
                    phi_center=b["phi_center"],
                    n_total=b["n_total"],
                    n_fail=b["n_fail"],
                    lambda_hat=float("nan") if b["lambda_hat"] is None else b["lambda_hat"],
                    wilson_lo=b["wilson_lo"],
                    wilson_hi=b["wilson_hi"],
                )
                for b in doc["bins"]
            ]
            return cls(a=doc["a"], b=doc["b"], bins=bins, meta=doc.get("meta", {}))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed calibration curve document: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "CalibrationCurve":
        return cls.from_json_dict(json.loads(text))


def wilson_interval(k: float, n: float, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval on a binomial proportion k/n."""
    if n < 1:
        raise ConfigError("wilson_interval requires n >= 1")
    if not 0 <= k <= n:
        raise ConfigError("wilson_interval requires 0 <= k <= n")
    p_hat = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = p_hat + z2 / (2.0 * n)
    radius = z * math.sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n))
    lo = max(0.0, (center - radius) / denom)
    hi = min(1.0, (center + radius) / denom)
    return lo, hi


def _as_arrays(records, phi=None, success=None, weights=None):
    if records is not None:
        phi = np.array([r.phi for r in records], dtype=float)
        success = np.array([r.success for r in records], dtype=float)
        weights = None
    else:
        phi = np.asarray(phi, dtype=float)
        success = np.asarray(success, dtype=float)
        if weights is not None:
            weights = np.asarray(weights, dtype=float)
    return phi, success, weights


def bin_dcs(
    records=None,
    bin_count: int = 50,
    *,
    phi=None,
    success=None,
    weights=None,
    z: float = 1.96,
) -> list[CalibrationBin]:
    """Equal-linear-width bins over [min phi, max phi] with per-bin
    failure counts and Wilson bounds.

    Accepts either DcsRecord objects or raw (phi, success) arrays; an
    optional weights array supports importance-sampled shots.
    """
    phi, success, weights = _as_arrays(records, phi, success, weights)
    if phi.size == 0:
        raise ConfigError("cannot bin an empty record set")
    if bin_count < 2:
        raise ConfigError("bin_count must be >= 2")
    lo, hi = float(phi.min()), float(phi.max())
    if lo == hi:
        raise CalibrationError("all phi values identical; binning impossible")
    edges = np.linspace(lo, hi, bin_count + 1)
    which = np.clip(np.searchsorted(edges, phi, side="right") - 1, 0, bin_count - 1)
    fail = 1.0 - success
    w = np.ones_like(phi) if weights is None else weights
    n_total = np.bincount(which, weights=w, minlength=bin_count)
    n_fail = np.bincount(which, weights=w * fail, minlength=bin_count)
    # effective count for Wilson bounds under weighting (Kish approximation)
    if weights is None:
        n_eff = n_total
    else:
        sq = np.bincount(which, weights=w * w, minlength=bin_count)
        with np.errstate(divide="ignore", invalid="ignore"):
            n_eff = np.where(sq > 0, n_total**2 / sq, 0.0)
    centers = 0.5 * (edges[:-1] + edges[1:])
    bins = []
    for i in range(bin_count):
        if n_total[i] <= 0:
            continue
        p_hat = n_fail[i] / n_total[i]
        lam = (
            math.log10((1.0 - p_hat) / p_hat)
            if 0.0 < p_hat < 1.0
            else float("nan")
        )
        ne = max(1.0, float(n_eff[i]))
        wl, wh = wilson_interval(min(ne, p_hat * ne), ne, z)
        bins.append(
            CalibrationBin(
                phi_center=float(centers[i]),
                n_total=float(n_total[i]),
                n_fail=float(n_fail[i]),
                lambda_hat=lam,
                wilson_lo=wl,
                wilson_hi=wh,
            )
        )
    return bins


def fit_calibration(bins, meta: dict | None = None) -> CalibrationCurve:
    """Unweighted least squares of empirical lambda on phi_center,
    restricted to bins with at least one observed failure."""
    usable = [b for b in bins if b.n_fail >= 1 and math.isfinite(b.lambda_hat)]
    if len(usable) < 2:
        raise CalibrationError(
            f"calibration needs >= 2 bins with failures, got {len(usable)}"
        )
    x = np.array([b.phi_center for b in usable])
    y = np.array([b.lambda_hat for b in usable])
    a, b_ = np.polyfit(x, y, 1)
    if a <= 0:
        raise CalibrationError(
            f"fitted slope must be positive (confidence rises with score), got {a:.4g}"
        )
    return CalibrationCurve(a=float(a), b=float(b_), bins=list(bins), meta=meta or {})


def lep_from_dcs(curve: CalibrationCurve, phi) -> np.ndarray | float:
    """LEP assigned to a score: p = 1 / (1 + 10**(a*phi + b)), clamped
    to [P_MIN, 0.5]."""
    lam = curve.a * np.asarray(phi, dtype=float) + curve.b
    p = 1.0 / (1.0 + np.power(10.0, lam))
    p = np.clip(p, P_MIN, P_MAX)
    return float(p) if np.isscalar(phi) or np.ndim(phi) == 0 else p


@dataclass(frozen=True)
class VariationReport:
    """Decomposition of score variance into log-odds spread and score
    inaccuracy: sigma_phi^2 = sigma_alpha^2 + sigma_r^2."""

    s_r: float
    sigma_alpha_hat: float
    sigma_phi: float
    fit_slope: float
    fit_intercept: float

    @property
    def ratio(self) -> float:
        return self.s_r / self.sigma_alpha_hat


def variation_report(pairs_lambda, pairs_phi, fixed_noise_phi) -> VariationReport:
    """Estimate the residual spread s_r from (lambda, phi) pairs and the
    log-odds-driven spread from fixed-noise phi samples.

    s_r is the sample root mean squared residual of the unweighted
    least-squares line phi_hat(lambda); sigma_alpha_hat is
    sqrt(s_phi^2 - s_r^2).  An invalid decomposition (s_phi <= s_r)
    raises rather than clipping.
    """
    lam = np.asarray(pairs_lambda, dtype=float)
    phi = np.asarray(pairs_phi, dtype=float)
    fixed = np.asarray(fixed_noise_phi, dtype=float)
    if lam.size < 3 or fixed.size < 3:
        raise ConfigError("variation_report needs at least 3 samples per dataset")
    slope, intercept = np.polyfit(lam, phi, 1)
    resid = phi - (slope * lam + intercept)
    s_r = math.sqrt(float(resid @ resid) / (lam.size - 1))
    s_phi = float(np.std(fixed, ddof=1))
    if s_phi**2 <= s_r**2:
        raise CalibrationError(
            f"invalid decomposition: s_phi={s_phi:.4g} <= s_r={s_r:.4g}"
        )
    return VariationReport(
        s_r=s_r,
        sigma_alpha_hat=math.sqrt(s_phi**2 - s_r**2),
        sigma_phi=s_phi,
        fit_slope=float(slope),
        fit_intercept=float(intercept),
    )
