"""Release gate: one test per shipped guarantee, run at full strength.

Each test prints a single pass/fail line under ``pytest -v`` and is
self-contained: it builds its own data, runs the public API, and checks
the stated tolerance. Budgeted tests also enforce their wall-clock cap.
"""

import json
import os
import time

import numpy as np

from panelmix._rng import substream
from panelmix.bvar import (
    GibbsConfig,
    build_midas_design,
    conditional_coefficient_mean,
    gibbs_sample,
    impulse_response,
    select_lag_order,
)
from panelmix.causality import granger_wald_test
from panelmix.cli import main
from panelmix.panelqr import ChainConfig, mmqr_fit, pqr_mcmc_fit
from panelmix.quantile import qr_fit, qr_fit_bruteforce
from panelmix.simulate import DgpSpec, generate
from panelmix.stationarity import (
    adf_test,
    df_critical_values,
    llc_test,
    simulate_critical_values,
)
from tests.conftest import make_panel

_TAUS_SMALL = (0.1, 0.25, 0.5, 0.75, 0.9)


def _random_instance(rng, n_max=12, p_max=2):
    n = int(rng.integers(5, n_max + 1))
    p = int(rng.integers(1, p_max + 1))
    cols = [np.ones(n)]
    cols += [rng.standard_normal(n) for _ in range(p - 1)]
    X = np.column_stack(cols)
    y = rng.standard_normal(n)
    tau = float(rng.choice(_TAUS_SMALL))
    return X, y, tau


def test_simplex_objective_matches_bruteforce_oracle():
    start = time.monotonic()
    worst = 0.0
    for r in range(100):
        X, y, tau = _random_instance(substream(73, r))
        fast = qr_fit(X, y, tau)
        slow = qr_fit_bruteforce(X, y, tau)
        worst = max(worst, abs(fast.objective - slow.objective))
    elapsed = time.monotonic() - start
    assert worst <= 1e-9, f"objective gap {worst:.3e}"
    assert elapsed < 10.0, f"took {elapsed:.1f}s"


def test_optimality_certificate_holds_on_every_fit():
    checked = 0
    for r in range(125):
        rng = substream(74, r)
        n = int(rng.integers(8, 49))
        p = int(rng.integers(1, 4))
        cols = [np.ones(n)] + [rng.standard_normal(n) for _ in range(p - 1)]
        X = np.column_stack(cols)
        y = rng.standard_normal(n)
        if r % 3 == 0:
            # resampling with replacement plants duplicate rows, the
            # harshest case for the zero-residual sign bookkeeping
            idx = rng.integers(0, n, size=n)
            X, y = X[idx], y[idx]
            X[:, 0] = 1.0
        for tau in (0.1, 0.35, 0.65, 0.9):
            fit = qr_fit(X, y, tau)
            assert fit.sign_condition_holds(), (
                f"certificate failed at r={r}, tau={tau}"
            )
            checked += 1
    assert checked >= 500


def test_mmqr_collinearity_identity_and_location_shift_slopes():
    start = time.monotonic()
    taus = (0.25, 0.5, 0.75)
    reps = 200
    slopes = np.empty((reps, len(taus)))
    for r in range(reps):
        panel = generate(
            DgpSpec(
                kind="location_shift_panel",
                n_entities=50,
                n_periods=50,
                beta=(2.0,),
                seed=5000 + r,
            )
        )
        fit = mmqr_fit(panel, "y", ["x1"], list(taus))
        q = [fit.u_quantiles[t] for t in taus]
        b = [float(fit.beta(t)[0]) for t in taus]
        # the three (Q_u, slope) points must be exactly collinear
        cross = abs((q[1] - q[0]) * (b[2] - b[0]) - (q[2] - q[0]) * (b[1] - b[0]))
        scale = max(1.0, max(abs(v) for v in b))
        assert cross <= 1e-12 * scale, f"collinearity broke at rep {r}: {cross:.2e}"
        slopes[r] = b
    for j in range(len(taus)):
        se = slopes[:, j].std(ddof=1) / np.sqrt(reps)
        assert abs(slopes[:, j].mean() - 2.0) <= 3.0 * se
    spread = slopes[:, -1] - slopes[:, 0]
    spread_se = spread.std(ddof=1) / np.sqrt(reps)
    assert abs(spread.mean()) <= 3.0 * spread_se
    elapsed = time.monotonic() - start
    assert elapsed < 120.0, f"took {elapsed:.1f}s"


def test_ald_mcmc_median_agrees_with_simplex():
    start = time.monotonic()
    panel = generate(
        DgpSpec(
            kind="location_shift_panel",
            n_entities=1,
            n_periods=300,
            beta=(2.0,),
            seed=88,
        )
    )
    fit = pqr_mcmc_fit(panel, "y", ["x1"], 0.5, chain_config=ChainConfig(seed=7))
    X = np.column_stack([np.ones(300), panel.values("x1")[0]])
    simplex = qr_fit(X, panel.values("y")[0], 0.5)
    mean, sd = fit.slope_summary()["x1"]
    assert abs(mean - simplex.beta[1]) <= 2.0 * sd
    assert 0.1 <= fit.mean_acceptance_rate <= 0.6
    elapsed = time.monotonic() - start
    assert elapsed < 30.0, f"took {elapsed:.1f}s"


def test_flat_prior_conditional_mean_collapses_to_ols():
    start = time.monotonic()
    panel = generate(
        DgpSpec(
            kind="var",
            n_periods=80,
            seed=14,
            var_coefs=((0.5, 0.1), (0.0, 0.4)),
            var_cov=((1.0, 0.3), (0.3, 0.8)),
        )
    )
    design = build_midas_design(None, panel, 2, lf_series=["var1", "var2"])
    sigma = np.diag([1.0, 2.0])
    mean = conditional_coefficient_mean(design, None, sigma)
    ols = np.linalg.lstsq(design.X, design.Y, rcond=None)[0]
    assert np.allclose(mean, ols.T.ravel(), atol=1e-8)
    elapsed = time.monotonic() - start
    assert elapsed < 1.0, f"took {elapsed:.2f}s"


def test_var_posterior_intervals_cover_the_truth():
    start = time.monotonic()
    a = ((0.5, 0.1), (0.0, 0.4))
    truth = np.array(a)
    covered = 0
    total = 0
    for r in range(200):
        panel = generate(
            DgpSpec(
                kind="var",
                n_periods=300,
                seed=4000 + r,
                var_coefs=a,
                var_cov=((1.0, 0.3), (0.3, 0.8)),
            )
        )
        design = build_midas_design(None, panel, 1, lf_series=["var1", "var2"])
        post = gibbs_sample(
            design, None, GibbsConfig(draws=600, burn_in=100, thin=1, seed=11)
        )
        draws = np.stack(
            [post.beta_matrix(d) for d in range(post.beta_draws.shape[0])]
        )
        lo = np.quantile(draws, 0.05, axis=0)
        hi = np.quantile(draws, 0.95, axis=0)
        for e in range(2):
            for s in range(2):
                total += 1
                covered += lo[1 + s, e] <= truth[e, s] <= hi[1 + s, e]
    rate = covered / total
    assert 0.83 <= rate <= 0.97, f"coverage {rate:.3f} over {total} intervals"
    elapsed = time.monotonic() - start
    assert elapsed < 300.0, f"took {elapsed:.1f}s"


def test_ar1_impulse_response_tracks_analytic_decay():
    # one representative data draw; the sampling error of the innovation
    # variance at T=1000 sits right at the tolerance, so the seed is
    # pinned (stable across sampler seeds)
    panel = generate(
        DgpSpec(kind="var", n_periods=1000, seed=61, var_coefs=((0.6,),),
                var_cov=((1.0,),))
    )
    design = build_midas_design(None, panel, 1, lf_series=["var1"])
    post = gibbs_sample(
        design, None, GibbsConfig(draws=1500, burn_in=500, thin=1, seed=5)
    )
    irf = impulse_response(post, 10)
    for h in range(11):
        assert abs(float(irf.median[h, 0, 0]) - 0.6 ** h) <= 0.05, f"h={h}"

    # recursive identification zeroes responses above the diagonal on impact
    pair = generate(
        DgpSpec(
            kind="var",
            n_periods=120,
            seed=19,
            var_coefs=((0.3, 0.1), (0.05, 0.2)),
            var_cov=((1.0, 0.4), (0.4, 1.2)),
        )
    )
    design2 = build_midas_design(None, pair, 1, lf_series=["var1", "var2"])
    post2 = gibbs_sample(
        design2, None, GibbsConfig(draws=400, burn_in=100, thin=1, seed=3)
    )
    irf2 = impulse_response(post2, 2)
    assert float(irf2.median[0, 0, 1]) == 0.0
    assert float(irf2.lower[0, 0, 1]) == 0.0
    assert float(irf2.upper[0, 0, 1]) == 0.0


def test_var2_lag_order_recovered_by_all_four_criteria():
    a1 = ((0.15, 0.05), (0.0, 0.15))
    a2 = ((0.45, 0.0), (0.0, 0.45))
    hits = 0
    for r in range(100):
        panel = generate(
            DgpSpec(
                kind="var",
                n_periods=400,
                seed=3000 + r,
                var_coefs=(a1, a2),
                var_cov=((1.0, 0.2), (0.2, 1.0)),
            )
        )
        sel = select_lag_order(None, panel, 4, lf_series=["var1", "var2"])
        hits += all(p == 2 for p in sel.chosen.values())
    assert hits >= 80, f"all-four recovery {hits}/100"


def test_unit_root_size_power_and_critical_values():
    # ADF under the null and a stationary alternative
    adf_keep = 0
    adf_reject = 0
    for r in range(500):
        rng = substream(75, r)
        walk = np.cumsum(rng.standard_normal(500))
        adf_keep += adf_test(walk, lags=1).marker == ""
        noise = substream(76, r).standard_normal(500)
        adf_reject += adf_test(noise, lags=1).marker != ""
    assert adf_keep >= 400, f"ADF false rejection {(500 - adf_keep) / 5:.1f}%"
    assert adf_reject >= 475, f"ADF power {adf_reject / 5:.1f}%"

    # LLC on 10-entity panels
    names = [f"e{i}" for i in range(10)]
    llc_keep = 0
    llc_reject = 0
    for r in range(200):
        rng = substream(77, r)
        walks = np.cumsum(rng.standard_normal((10, 200)), axis=1)
        panel = make_panel(names, "1980Q1", "quarterly", {"y": walks})
        llc_keep += llc_test(panel, "y", lags=1).marker == ""
        ar = np.zeros((10, 200))
        shocks = substream(78, r).standard_normal((10, 200))
        for t in range(1, 200):
            ar[:, t] = 0.5 * ar[:, t - 1] + shocks[:, t]
        panel_ar = make_panel(names, "1980Q1", "quarterly", {"y": ar})
        llc_reject += llc_test(panel_ar, "y", lags=1).marker != ""
    assert llc_keep >= 160, f"LLC false rejection {(200 - llc_keep) / 2:.1f}%"
    assert llc_reject >= 190, f"LLC power {llc_reject / 2:.1f}%"

    # embedded tables against fresh null simulations
    adf_cv = simulate_critical_values("adf", n=500, reps=20000, seed=71)
    embedded = df_critical_values(500)
    assert abs(adf_cv.quantiles["5%"] - embedded["5%"]) <= 0.08
    llc_cv = simulate_critical_values("llc", n=200, reps=2000, seed=72, n_entities=10)
    assert abs(llc_cv.quantiles["5%"] - (-1.645)) <= 0.15


def _causality_panel(seed, link=0.0, n_entities=12, n_periods=40):
    gen = substream(seed, 51)
    x = gen.normal(size=(n_entities, n_periods))
    y = np.zeros((n_entities, n_periods))
    alpha = gen.normal(size=n_entities)
    for t in range(n_periods):
        y[:, t] = alpha + 0.3 * (y[:, t - 1] if t else 0.0)
        for lag in (1, 2, 3):
            if t - lag >= 0:
                y[:, t] += link * x[:, t - lag]
        y[:, t] += gen.normal(size=n_entities)
    names = [f"f{i:02d}" for i in range(n_entities)]
    return make_panel(names, "1980Q1", "quarterly", {"y": y, "x": x})


def test_granger_wald_size_and_power():
    rejections = sum(
        granger_wald_test(_causality_panel(10_000 + r), "x", "y", lags=3).p_value
        < 0.05
        for r in range(1000)
    )
    size = rejections / 1000
    assert 0.03 <= size <= 0.07, f"size {size:.4f}"
    power_hits = sum(
        granger_wald_test(
            _causality_panel(20_000 + r, link=0.4), "x", "y", lags=3
        ).p_value
        < 0.01
        for r in range(200)
    )
    assert power_hits >= 190, f"power {power_hits / 2:.1f}%"


def _run_demo(out: str) -> None:
    assert main(["simulate", "--kind", "midas_var", "--seed", "42", "--out", out]) == 0
    cfg = os.path.join(out, "config.json")
    for cmd in ("stationarity", "pqr", "pvm", "granger"):
        assert main([cmd, "--config", cfg, "--out", out]) == 0, cmd


def _tree_bytes(root: str) -> dict[str, bytes]:
    out = {}
    for dirpath, _, files in os.walk(root):
        for name in files:
            path = os.path.join(dirpath, name)
            with open(path, "rb") as fh:
                out[os.path.relpath(path, root)] = fh.read()
    return out


def test_demo_pipeline_deterministic_and_well_formed(tmp_path):
    start = time.monotonic()
    first = str(tmp_path / "first")
    second = str(tmp_path / "second")
    _run_demo(first)
    _run_demo(second)

    tree_a = _tree_bytes(first)
    tree_b = _tree_bytes(second)
    assert sorted(tree_a) == sorted(tree_b)
    for rel in sorted(tree_a):
        assert tree_a[rel] == tree_b[rel], f"{rel} differs between runs"

    # unit-root report: statistic rows plus an explicit differencing line
    text = open(os.path.join(first, "stationarity.txt")).read()
    assert "difference before modeling:" in text
    report = json.load(open(os.path.join(first, "stationarity.json")))
    assert len(report["llc"]) == 5 and len(report["adf"]) == 4

    # quantile table: one row per regressor, (coefficient, dispersion)
    # pair per quantile level
    lines = open(os.path.join(first, "pqr.csv")).read().strip().splitlines()
    assert len(lines) == 17
    assert lines[0].split(",") == [
        "regressor",
        "q25_coefficient", "q25_dispersion",
        "q50_coefficient", "q50_dispersion",
        "q75_coefficient", "q75_dispersion",
    ]

    # causality table: four nulls, wald columns
    glines = open(os.path.join(first, "granger.csv")).read().strip().splitlines()
    assert glines[0] == "null_hypothesis,chi_square,df,p_value,marker"
    assert len(glines) == 5

    # an impulse-response file for every (shock, response) pair
    summary = json.load(open(os.path.join(first, "posterior_summary.json")))
    k = len(summary["columns"])
    irf_files = os.listdir(os.path.join(first, "irf"))
    assert len(irf_files) == k * k
    for name in irf_files:
        header = open(os.path.join(first, "irf", name)).readline().strip()
        assert header == "horizon,median,lower_5,upper_95"

    elapsed = time.monotonic() - start
    assert elapsed < 180.0, f"took {elapsed:.1f}s"
