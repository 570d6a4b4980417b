"""End-to-end acceptance suite.

Each test covers one headline capability at deployment-like scale and
prints a single PASS line with its key numbers; the unit suites cover
the fine-grained behavior.
"""

import math

import numpy as np
import pytest
from scipy import stats

from swimgap import (
    RunDataset,
    build_code_capacity_graph,
    build_phenomenological_graph,
    build_pool,
    calibrate_scores,
    circuit_moments,
    compare_abort_channels,
    complementary_gap,
    deform_to_target_mean,
    estimate_mle,
    estimate_unmitigated,
    estimator_metrics,
    exact_odds_table,
    min_weight_perfect_matching,
    retained_ler_curve,
    rng_stream,
    score_shots,
    select_distance,
    simulate_circuits,
    spacetime_plan,
    swim_distance,
    synthesize_runs,
    time_overhead,
    variation_report,
    wilson_interval,
    abort_event_simulation,
    LatentOddsModel,
    WindowPool,
)
from swimgap.scalemodel import GRID_STEP, _standard_grid


def report(name: str, detail: str) -> None:
    print(f"PASS {name}: {detail}")


# ---------------------------------------------------------------------------
# worked figure


def test_worked_figure(fig_graph):
    gap, corr = complementary_gap(fig_graph, (1, 5, 7, 8))
    swim = swim_distance(fig_graph, (1, 5, 7, 8), corr)
    assert corr.total_weight == 3.0
    assert gap == 2.0
    assert swim == 1.0
    report("worked-figure", f"weight={corr.total_weight} gap={gap} swim={swim}")


# ---------------------------------------------------------------------------
# matching optimality


def brute_force_matching_cost(costs, boundary):
    def rec(remaining):
        if not remaining:
            return 0.0
        i, rest = remaining[0], remaining[1:]
        best = boundary[i] + rec(rest)
        for k, j in enumerate(rest):
            c = costs[i][j] + rec(rest[:k] + rest[k + 1 :])
            if c < best:
                best = c
        return best

    return rec(list(range(len(boundary))))


def test_matching_optimality():
    rng = rng_stream(2001)
    instances = 10_000
    for _ in range(instances):
        n = int(rng.integers(0, 11))
        costs = rng.uniform(0.1, 10.0, size=(n, n))
        costs = (costs + costs.T) / 2
        np.fill_diagonal(costs, 0.0)
        boundary = rng.uniform(0.1, 10.0, size=n)
        _, _, total = min_weight_perfect_matching(costs, boundary)
        oracle = brute_force_matching_cost(costs, boundary)
        assert total == pytest.approx(oracle, abs=1e-9)
    report("matching-optimality", f"{instances} instances (<=10 defects) exact")


# ---------------------------------------------------------------------------
# oracle-grounded confidence monotonicity


def _monotone_up_to_wilson(score_values, fail_expected, counts):
    """No score bin may have a significantly *higher* failure rate than
    any lower-score bin (z=1.96 Wilson intervals)."""
    order = np.argsort(score_values)
    bounds = [wilson_interval(fail_expected[i], counts[i]) for i in order]
    violations = 0
    for a in range(len(bounds)):
        for b in range(a + 1, len(bounds)):
            if bounds[b][0] > bounds[a][1]:  # higher score, significantly worse
                violations += 1
    return violations


def test_confidence_monotone_against_exact_oracle():
    g = build_code_capacity_graph(3, 3, 0.05)
    scored = score_shots(g, 100_000, rng_stream(2002))
    table = exact_odds_table(g)
    # exact LEP of the decoder's choice for every distinct syndrome
    lep = np.empty(scored.n_distinct)
    for i, syndrome in enumerate(scored.unique_syndromes):
        key = sum(1 << s for s in syndrome)
        cls = int(scored.unique_parity[i])
        good, bad = table[key, cls], table[key, 1 - cls]
        lep[i] = bad / (good + bad)
    shot_lep = lep[scored.inverse]
    for label, shot_phi in (("gap", scored.phi_gap), ("swim", scored.phi_swim)):
        values, inv = np.unique(shot_phi, return_inverse=True)
        counts = np.bincount(inv).astype(float)
        fails = np.bincount(inv, weights=shot_lep)
        v = _monotone_up_to_wilson(values, fails, counts)
        assert v == 0, f"{label}: {v} significant monotonicity violations"
    report("confidence-monotone", "gap and swim LEPs non-increasing (z=1.96)")


# ---------------------------------------------------------------------------
# residual decomposition


def test_residual_decomposition():
    rng = rng_stream(2003)
    n = 100_000
    sigma_alpha, sigma_r = 2.0, 0.7
    lam = rng.normal(0.0, sigma_alpha, size=n)
    phi = lam + rng.normal(0.0, sigma_r, size=n)
    fixed = rng.normal(0.0, math.hypot(sigma_alpha, sigma_r), size=n)
    rep = variation_report(lam, phi, fixed)
    assert rep.s_r == pytest.approx(sigma_r, rel=0.05)
    assert rep.sigma_alpha_hat == pytest.approx(sigma_alpha, rel=0.05)
    report(
        "residual-decomposition",
        f"s_r={rep.s_r:.4f} (true {sigma_r}) "
        f"sigma_alpha={rep.sigma_alpha_hat:.4f} (true {sigma_alpha})",
    )


# ---------------------------------------------------------------------------
# closed-form moments vs Monte Carlo


def test_moments_match_monte_carlo():
    rng = rng_stream(2004)
    m_runs = 1_000_000
    cases = [
        (1e-4, 5e-5, 1_000),
        (1e-4, 5e-5, 100_000),
        (2e-5, 1e-5, 1_000),
        (2e-5, 1e-5, 100_000),
    ]
    for mu1, s1, n_windows in cases:
        # two-point pool {mu1 - s1, mu1 + s1}: exact moments (mu1, s1^2)
        pool = WindowPool(p_L=[mu1 - s1, mu1 + s1], x=[0, 1])
        mu_n, var_n = circuit_moments(mu1, s1 * s1, n_windows)
        runs = simulate_circuits(pool, n_windows, m_runs, rng)
        sample_mean = float(runs.P_L.mean())
        sample_var = float(runs.P_L.var())
        se_mean = math.sqrt(var_n / m_runs)
        m4 = float(np.mean((runs.P_L - sample_mean) ** 4))
        se_var = math.sqrt(max(m4 - sample_var**2, 0.0) / m_runs)
        assert abs(sample_mean - mu_n) <= 3 * se_mean, (mu1, s1, n_windows)
        assert abs(sample_var - var_n) <= 3 * se_var, (mu1, s1, n_windows)
    report(
        "moments-vs-mc",
        f"{len(cases)} (mu1, sigma1, N) cells within 3 sigma at M={m_runs}",
    )


# ---------------------------------------------------------------------------
# time overhead


def test_time_overhead_against_event_simulation():
    rng = rng_stream(2005)
    for f in (0.1, 0.5, 0.9):
        assert time_overhead(f, 1) == pytest.approx(1.0 / (1.0 - f), rel=1e-15)
        for n_windows in (1, 10, 1_000, 1_000_000):
            rho = -math.expm1(math.log1p(-f) / n_windows)
            closed = time_overhead(f, n_windows)
            simulated = abort_event_simulation(rho, n_windows, 4_000_000, rng)
            assert simulated == pytest.approx(closed, rel=0.01), (f, n_windows)
    report(
        "time-overhead",
        "12 (f, N) cells within 1%; N=1 closed form exact",
    )


# ---------------------------------------------------------------------------
# abort improvement at scale


def test_abort_improvement_at_scale():
    g = build_phenomenological_graph(5, 5, 1e-3, 1e-3)
    # calibrate at an elevated error rate via importance sampling; the
    # gap takes few discrete values here, so fine bins isolate them and
    # the fitted line interpolates the per-class estimates exactly
    cal = score_shots(g, 1_000_000, rng_stream(2006), sample_probabilities=0.005)
    curve = calibrate_scores(cal, kind="complementary_gap", bin_count=200)
    # deployment shots at the true rate
    dep = score_shots(g, 10_000_000, rng_stream(2007))
    pool = build_pool(dep, curve)
    fractions = [0.0, 1e-3, 3e-3, 1e-2, 3e-2, 0.1]
    rows = retained_ler_curve(pool, fractions)
    for frac, mean_lep, ler, lo, hi, kept in rows:
        assert lo <= mean_lep <= hi, (
            f"fraction {frac}: calculated LEP {mean_lep:.3g} outside "
            f"Wilson bounds [{lo:.3g}, {hi:.3g}] of LER {ler:.3g} (n={kept})"
        )
    base = rows[0][1]
    at_1pct = next(r[1] for r in rows if r[0] == 1e-2)
    drop = base / at_1pct
    assert drop >= 5.0, f"LEP drop at 1% discard is only {drop:.2f}x"
    report(
        "abort-improvement",
        f"d=5 phenomenological p=1e-3, 1e7 shots: {drop:.1f}x LEP drop at "
        f"1% discard; LEP inside Wilson bounds at all {len(rows)} fractions",
    )


# ---------------------------------------------------------------------------
# MLE end-to-end


def _abort_estimate(dataset: RunDataset, keep_fraction: float = 0.5) -> float:
    order = np.argsort(dataset.P_L, kind="stable")
    keep = order[: max(1, int(round(keep_fraction * len(dataset))))]
    return float(dataset.z[keep].mean())


def test_mle_end_to_end():
    g = build_code_capacity_graph(3, 3, 0.035)
    scored = score_shots(g, 100_000, rng_stream(2008))
    curve = calibrate_scores(scored, bin_count=20)
    pool = build_pool(scored, curve)
    mean_lep = float(pool.p_L.mean())
    # pick N so the composed circuit LER is close to 7.7%
    target_ler = 0.077
    n_windows = max(1, round(math.log1p(-2 * target_ler) / math.log1p(-2 * mean_lep)))
    mu_n, _ = circuit_moments(mean_lep, float(pool.p_L.var()), n_windows)
    z_true = 0.8
    rng = rng_stream(2009)
    reps = 200
    sq_unmit = np.empty(reps)
    sq_mle = np.empty(reps)
    small_mle, small_abort = np.empty(reps), np.empty(reps)
    for r in range(reps):
        runs = simulate_circuits(pool, n_windows, 10_000, rng)
        data = synthesize_runs(runs, z_true, rng)
        sq_unmit[r] = (estimate_unmitigated(data).estimate - z_true) ** 2
        sq_mle[r] = (estimate_mle(data).estimate - z_true) ** 2
        small = simulate_circuits(pool, n_windows, 100, rng)
        small_data = synthesize_runs(small, z_true, rng)
        small_mle[r] = estimate_mle(small_data).estimate
        small_abort[r] = _abort_estimate(small_data)
    diff = sq_unmit - sq_mle
    t = diff.mean() / (diff.std(ddof=1) / math.sqrt(reps))
    assert t > 1.645, f"MLE not better than unmitigated at 95%: t={t:.2f}"
    mspe_m, _, _ = estimator_metrics(small_mle, z_true)
    mspe_a, _, _ = estimator_metrics(small_abort, z_true)
    # reported, not asserted: at M=100 the MLE advantage may not yet show
    report(
        "mle-end-to-end",
        f"N={n_windows} LER={mu_n:.3f}: MSPE(MLE)={sq_mle.mean():.2e} < "
        f"MSPE(unmitigated)={sq_unmit.mean():.2e} (t={t:.1f}); at M=100 "
        f"MSPE(MLE)={mspe_m:.2e} vs MSPE(abort-50%)={mspe_a:.2e} [reported only]",
    )


# ---------------------------------------------------------------------------
# MLE identifiability


def test_mle_identifiability():
    rng = rng_stream(2010)
    m_runs = 100_000
    eta_true, z_true = 1.5, 0.8
    p_l = rng.uniform(0.02, 0.25, size=m_runs)
    theta = 0.5 * (1.0 + z_true)
    q = np.clip(eta_true * p_l, 0.0, 0.5)
    pr_plus = theta * (1.0 - q) + (1.0 - theta) * q
    z = np.where(rng.random(m_runs) < pr_plus, 1, -1)
    data = RunDataset(z=z, P_L=p_l, z_mean_true=z_true)
    out = estimate_mle(data)
    assert 1.2 <= out.eta <= 1.8, f"eta_hat={out.eta:.3f} outside [1.2, 1.8]"
    report(
        "mle-identifiability",
        f"injected eta=1.5 recovered as {out.eta:.3f} at M={m_runs}",
    )


# ---------------------------------------------------------------------------
# analytic model orderings


def test_analytic_model_orderings():
    grid = _standard_grid()
    pdf = np.exp(-0.5 * ((grid - 3.0) / 2.0) ** 2)
    pdf /= pdf.sum() * GRID_STEP
    target = 0.153
    trials, per_trial, rho = 100, 200_000, 0.2
    results = {}
    for delta in (0.7, 1.0):
        model = LatentOddsModel(grid=grid, pdf=pdf.copy(), smear_sigma=delta)
        model = deform_to_target_mean(model, target)
        # internal consistency of the deformation itself
        assert model.mean_lep() == pytest.approx(target, rel=1e-6)
        (row,) = compare_abort_channels(
            model,
            abort_rates=[rho],
            n_windows=1_000_000,
            trials=trials,
            rng=rng_stream(2011 + int(10 * delta)),
            samples_per_trial=per_trial,
        )
        results[delta] = row

    def one_sided_t(better, worse, paired):
        a, b = np.asarray(better), np.asarray(worse)
        d = a - b if paired else None
        if paired:
            return d.mean() / (d.std(ddof=1) / math.sqrt(d.size))
        t, _ = stats.ttest_ind(a, b, equal_var=False)
        return t

    # latent channel beats the observable channel (paired within trials)
    t_lam = one_sided_t(
        results[0.7]["lambda_reduction"], results[0.7]["phi_reduction"], paired=True
    )
    # tighter smear beats looser smear (independent runs)
    t_phi = one_sided_t(
        results[0.7]["phi_reduction"], results[1.0]["phi_reduction"], paired=False
    )
    assert t_lam > 1.645, f"lambda-abort not above phi-abort(0.7): t={t_lam:.2f}"
    assert t_phi > 1.645, f"phi-abort(0.7) not above phi-abort(1.0): t={t_phi:.2f}"
    lam = float(np.mean(results[0.7]["lambda_reduction"]))
    p07 = float(np.mean(results[0.7]["phi_reduction"]))
    p10 = float(np.mean(results[1.0]["phi_reduction"]))
    assert lam >= p07 >= p10
    report(
        "analytic-orderings",
        f"reduction factors lambda={lam:.2f} >= phi(0.7)={p07:.2f} >= "
        f"phi(1.0)={p10:.2f} (t={t_lam:.0f}, {t_phi:.0f}; {trials} trials)",
    )


# ---------------------------------------------------------------------------
# resource arithmetic


def test_resource_arithmetic():
    plan = spacetime_plan(21, 19, 1.64)
    assert plan.spacetime_factor == pytest.approx(1.21, abs=0.005)
    # moment model mu1(d) = 0.3 * 0.1^((d+1)/2) over odd distances
    model = {d: (0.3 * 0.1 ** ((d + 1) / 2), 0.0) for d in range(3, 33, 2)}
    chosen = select_distance(model, 1_380_000_000, 1e-2)
    assert chosen == 21
    report(
        "resource-arithmetic",
        f"spacetime factor {plan.spacetime_factor:.4f} (target 1.21 +- 0.005); "
        f"selected distance {chosen} at N=1.38e9, eps=1e-2",
    )
