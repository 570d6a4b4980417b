import math

import numpy as np
import pytest

from swimgap import (
    CalibrationCurve,
    CalibrationError,
    ConfigError,
    bin_dcs,
    fit_calibration,
    lep_from_dcs,
    rng_stream,
    variation_report,
    wilson_interval,
)
from swimgap.calibration import P_MAX, P_MIN

# frozen oracle: endpoints are the roots of (p_hat - p)^2 = z^2 p(1-p)/n
# at z = 1.96, solved independently with numpy.roots; cross-checked
# against statsmodels proportion_confint (which differs only through its
# z = norm.ppf(0.975) = 1.95996...)
WILSON_ORACLE = [
    (1, 10, 0.017875749515721153, 0.40415638549757205),
    (0, 20, 0.0, 0.1611301254949332),
    (7, 50, 0.0695074526202286, 0.2618645719852809),
    (50, 50, 0.928649965825681, 1.0),
    (3, 1000, 0.0010207654054443255, 0.008783171789427854),
]


def test_wilson_against_oracle():
    for k, n, lo, hi in WILSON_ORACLE:
        got_lo, got_hi = wilson_interval(k, n)
        assert got_lo == pytest.approx(lo, abs=1e-12)
        assert got_hi == pytest.approx(hi, abs=1e-12)


def test_wilson_validates():
    with pytest.raises(ConfigError):
        wilson_interval(1, 0)
    with pytest.raises(ConfigError):
        wilson_interval(5, 3)


def synthetic_records(n, a, b, rng, phi_max=8.0):
    """phi samples whose conditional failure rate follows the inverse
    log-odds line p(phi) = 1/(1 + 10**(a*phi + b))."""
    phi = rng.uniform(0.0, phi_max, size=n)
    p_fail = 1.0 / (1.0 + 10.0 ** (a * phi + b))
    success = (rng.random(n) >= p_fail).astype(float)
    return phi, success


def test_bin_dcs_structure(rng):
    phi, success = synthetic_records(20000, 0.5, -1.0, rng)
    bins = bin_dcs(phi=phi, success=success, bin_count=50)
    assert len(bins) <= 50
    centers = [b.phi_center for b in bins]
    assert centers == sorted(centers)
    widths = np.diff(np.linspace(phi.min(), phi.max(), 51))
    assert np.allclose(widths, widths[0])  # equal linear width
    assert sum(b.n_total for b in bins) == 20000


def test_fit_recovers_synthetic_line(rng):
    # keep phi in a range where every bin still sees failures; bins with
    # near-zero failure counts bias the empirical log odds downward
    a_true, b_true = 0.8, -0.5
    phi, success = synthetic_records(200000, a_true, b_true, rng, phi_max=3.0)
    bins = bin_dcs(phi=phi, success=success, bin_count=50)
    curve = fit_calibration(bins)
    assert curve.a == pytest.approx(a_true, rel=0.1)
    assert curve.b == pytest.approx(b_true, abs=0.3)


def test_weighted_binning_matches_unweighted_limit(rng):
    phi, success = synthetic_records(5000, 0.5, -1.0, rng)
    plain = bin_dcs(phi=phi, success=success, bin_count=10)
    weighted = bin_dcs(phi=phi, success=success, weights=np.ones_like(phi), bin_count=10)
    for b1, b2 in zip(plain, weighted):
        assert b1.n_total == pytest.approx(b2.n_total)
        assert b1.n_fail == pytest.approx(b2.n_fail)
        assert b1.wilson_lo == pytest.approx(b2.wilson_lo)


def test_fit_requires_failures():
    bins = bin_dcs(phi=np.arange(100.0), success=np.ones(100), bin_count=10)
    with pytest.raises(CalibrationError):
        fit_calibration(bins)


def test_fit_rejects_negative_slope(rng):
    # failures increasing with phi: slope would be negative
    phi, success = synthetic_records(50000, -0.8, 1.0, rng)
    bins = bin_dcs(phi=phi, success=success, bin_count=20)
    with pytest.raises(CalibrationError):
        fit_calibration(bins)


def test_lep_from_dcs_clamps():
    curve = CalibrationCurve(a=1.0, b=0.0)
    assert lep_from_dcs(curve, 100.0) == P_MIN
    assert lep_from_dcs(curve, -100.0) == P_MAX
    assert lep_from_dcs(curve, 1.0) == pytest.approx(1.0 / 11.0)
    arr = lep_from_dcs(curve, np.array([0.0, 1.0]))
    assert arr.shape == (2,)


def test_curve_json_roundtrip(rng):
    phi, success = synthetic_records(50000, 0.5, -1.0, rng)
    curve = fit_calibration(bin_dcs(phi=phi, success=success), meta={"tag": "t"})
    curve2 = CalibrationCurve.from_json(curve.to_json())
    assert curve2.a == curve.a and curve2.b == curve.b
    assert len(curve2.bins) == len(curve.bins)
    assert curve2.meta == {"tag": "t"}
    with pytest.raises(ConfigError):
        CalibrationCurve.from_json_dict({"a": 1.0})


def test_variation_report_recovers_components(rng):
    n = 100000
    sigma_alpha, sigma_r = 2.0, 0.7
    lam = rng.normal(0.0, sigma_alpha, size=n)
    phi = lam + rng.normal(0.0, sigma_r, size=n)
    fixed = rng.normal(0.0, math.hypot(sigma_alpha, sigma_r), size=n)
    rep = variation_report(lam, phi, fixed)
    assert rep.s_r == pytest.approx(sigma_r, rel=0.05)
    assert rep.sigma_alpha_hat == pytest.approx(sigma_alpha, rel=0.05)
    assert rep.fit_slope == pytest.approx(1.0, rel=0.05)


def test_variation_report_rejects_invalid_decomposition(rng):
    lam = rng.normal(0.0, 1.0, size=100)
    phi = lam + rng.normal(0.0, 2.0, size=100)
    fixed = rng.normal(0.0, 0.1, size=100)  # s_phi << s_r
    with pytest.raises(CalibrationError):
        variation_report(lam, phi, fixed)
