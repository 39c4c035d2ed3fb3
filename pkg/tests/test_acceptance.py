"""Acceptance checks for the whole toolkit.

Eleven criteria, one test each, in three flavors: exact oracles
(criteria 1-3, 9), statistical calibration checks on fixed master seeds
(4, 5), and desk-scale Monte-Carlo checks of the qualitative claims the
experiments are built to measure (6-8, 10, 11). Every test prints one
``[PASS]``/``[FAIL]`` line with the measured quantity and the bound it
was held to, so a bare ``pytest -v tests/test_acceptance.py`` reads as a
report.
"""

import textwrap
from collections import Counter

import numpy as np

from imputelab.amputation import AmputeConfig, ampute_mcar
from imputelab.dataset import DataMatrix, MissMask
from imputelab.harness import parse_config, run_empirical_accuracy, run_to_directory
from imputelab.imputation import IMPUTE_METHODS, ImputeConfig, impute
from imputelab.intervals import pi_emp_q, pi_gaussian, pi_ols, pi_qrf, residual_stats
from imputelab.learners.boosting import SgbConfig, XgbConfig
from imputelab.learners.forest import (
    ForestConfig,
    ForestModel,
    fit_forest,
    predict_forest,
    qrf_weights,
)
from imputelab.learners.linear import fit_ols
from imputelab.metrics import DegenerateDenominator, nrmse
from imputelab.seeding import derive_seed, rng_for
from imputelab.synthgen import (
    CovarianceSpec,
    SynthConfig,
    build_covariance,
    calibrate_noise,
    generate,
    regression_mean,
    sample_gaussian,
)

# (sigma2_mcorrect, sigma2_simple) for every forest whose residual
# variance is estimated in criteria 5 and 8; criterion 9 audits them
_SIGMA_PAIRS: list[tuple[float, float]] = []


def _report(num: int, name: str, ok: bool, detail: str) -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {num:02d} ({name}): {detail}")
    assert ok, f"criterion {num} failed: {detail}"


def test_criterion_01_nrmse_hand_cases():
    truth = np.array([[1.0, 10.0], [2.0, 20.0], [3.0, 30.0]])

    # one missing cell: the denominator spread is measured around that
    # cell's own true value, so any wrong fill scores exactly 1
    r = np.ones((3, 2), dtype=bool)
    r[0, 0] = False
    imputed = truth.copy()
    imputed[0, 0] = 5.25
    one = nrmse(imputed, truth, MissMask(r=r))

    # two missing cells (true values 1 and 2) both filled at their true
    # mean 1.5: zero denominator must raise, not return infinity
    r2 = np.ones((3, 2), dtype=bool)
    r2[0, 0] = False
    r2[1, 0] = False
    at_mean = truth.copy()
    at_mean[0, 0] = 1.5
    at_mean[1, 0] = 1.5
    try:
        nrmse(at_mean, truth, MissMask(r=r2))
        raised = False
    except DegenerateDenominator:
        raised = True

    _report(
        1,
        "nrmse hand cases",
        one == 1.0 and raised,
        f"single-cell value {one!r} == 1.0 exactly; zero-spread case raised "
        f"DegenerateDenominator: {raised}",
    )


def test_criterion_02_qrf_single_leaf_oracle():
    rng = np.random.default_rng(202)
    n = 20
    x = rng.normal(size=(n, 3))
    y = rng.normal(size=n) * 5.0
    # min_node_size = n forces the root to stay a leaf, so every query
    # weights training row i by its bootstrap multiplicity / n
    model = fit_forest(x, y, ForestConfig(m_trees=1, min_node_size=n, seed=7))
    w = model.inbag[0].astype(np.float64) / n

    order = np.argsort(y, kind="stable")
    ys, ws = y[order], w[order]

    def brute_quantile(beta):
        acc = 0.0
        for yv, wv in zip(ys, ws):
            acc += wv
            if acc >= beta:
                return yv
        return ys[-1]

    mismatches = 0
    for q in rng.normal(size=(25, 3)):
        for level in (0.5, 0.8, 0.95):
            alpha = 1.0 - level
            pi = pi_qrf(model, y, q, level)
            if pi.lower != brute_quantile(alpha / 2.0):
                mismatches += 1
            if pi.upper != brute_quantile(1.0 - alpha / 2.0):
                mismatches += 1

    _report(
        2,
        "qrf single-leaf oracle",
        mismatches == 0,
        f"{mismatches} mismatches against brute-force weighted quantiles "
        "(25 queries x 3 levels, exact equality)",
    )


def test_criterion_03_forest_weight_identity():
    rng = np.random.default_rng(303)
    n, p = 80, 5
    x = rng.normal(size=(n, p))
    y = x[:, 0] ** 2 + np.sin(x[:, 1]) + rng.normal(size=n) * 0.3
    model = fit_forest(x, y, ForestConfig(m_trees=30, min_node_size=5, seed=11))
    worst = 0.0
    for q in rng.normal(size=(100, p)):
        w = qrf_weights(model, q)
        worst = max(worst, abs(float(w @ y) - predict_forest(model, q)))
    _report(
        3,
        "forest/weights identity",
        worst <= 1e-10,
        f"max |predict(x) - sum w_i(x) y_i| = {worst:.3e} <= 1e-10 "
        "(100 random queries)",
    )


def test_criterion_04_ols_interval_calibration():
    master = 1404
    cfg = SynthConfig(n=1000, p=10, seed=master)  # identity cov, linear mean
    data, sigma2 = generate(cfg)
    model = fit_ols(data.x, data.y)

    n_test = 500
    sigma = build_covariance(cfg.cov)
    x_test = sample_gaussian(sigma, n_test, derive_seed(master, 0, "test-x"))
    noise = rng_for(master, 0, "test-noise").standard_normal(n_test)
    y_test = regression_mean(cfg.model, x_test) + noise * np.sqrt(sigma2)

    covered = 0
    for i in range(n_test):
        covered += pi_ols(model, x_test[i], 0.95).covers(y_test[i])
    rate = covered / n_test
    _report(
        4,
        "ols interval calibration",
        0.93 <= rate <= 0.97,
        f"coverage {rate:.3f} in [0.93, 0.97] ({n_test} fresh test points, "
        "n=1000, p=10, signal-to-noise 1)",
    )


def test_criterion_05_complete_case_forest_coverage():
    master = 77
    iterates = 200
    n = 500
    cfg0 = SynthConfig(n=n, p=10, seed=master)
    sigma2 = calibrate_noise(cfg0.model, cfg0.cov, 1.0, seed=master)
    sigma = build_covariance(cfg0.cov)

    points_per_iterate = 5
    hits_emp = 0
    hits_gauss = 0
    for it in range(iterates):
        data, _ = generate(
            SynthConfig(
                n=n, p=10, seed=derive_seed(master, it, "generate"),
                sigma2_override=sigma2,
            )
        )
        model = fit_forest(
            data.x, data.y,
            ForestConfig(m_trees=100, seed=derive_seed(master, it, "forest")),
        )
        st = residual_stats(model, data.x, data.y)
        _SIGMA_PAIRS.append((st.sigma2_mcorrect, st.sigma2_simple))

        x_stars = sample_gaussian(
            sigma, points_per_iterate, derive_seed(master, it, "test-x")
        )
        noise = rng_for(master, it, "test-noise").standard_normal(points_per_iterate)
        y_stars = regression_mean(cfg0.model, x_stars) + noise * np.sqrt(sigma2)

        for x_star, y_star in zip(x_stars, y_stars):
            hits_emp += pi_emp_q(model, st, x_star, 0.95).covers(y_star)
            hits_gauss += pi_gaussian(model, st, x_star, 0.95, "simple").covers(y_star)

    total = iterates * points_per_iterate
    cov_e = hits_emp / total
    cov_g = hits_gauss / total
    _report(
        5,
        "complete-case forest intervals",
        0.90 <= cov_e <= 0.98 and 0.90 <= cov_g <= 0.98,
        f"coverage emp_q={cov_e:.3f}, gaussian(simple)={cov_g:.3f}, both in "
        f"[0.90, 0.98] ({iterates} iterates x {points_per_iterate} test "
        f"points, n={n}, identity covariance)",
    )


def test_criterion_06_missing_rate_degrades_cv_mse(tmp_path):
    config_path = tmp_path / "degradation.ini"
    config_path.write_text(textwrap.dedent("""\
        [experiment]
        kind = empirical_accuracy
        master_seed = 5
        mc_iterates = 50
        missing_rates = 0.1, 0.3
        imputers = miss_forest
        predictors = forest

        [synth]
        n = 120
        p = 10

        [forest]
        m_trees = 50

        [impute]
        n_trees = 15
        """))
    rows, _ = run_empirical_accuracy(parse_config(str(config_path)))
    by_rate = {0.1: [], 0.3: []}
    for row in rows:
        if row.iterate >= 0:
            by_rate[row.missing_rate].append(row.cv_mse)
    med_lo = float(np.median(by_rate[0.1]))
    med_hi = float(np.median(by_rate[0.3]))
    _report(
        6,
        "missing-rate degradation",
        med_hi > med_lo and len(by_rate[0.1]) == 50 and len(by_rate[0.3]) == 50,
        f"median cv_mse {med_lo:.1f} at rate 0.1 < {med_hi:.1f} at rate 0.3 "
        "(miss_forest + forest, 50 iterates)",
    )


def test_criterion_07_forest_imputer_beats_mean():
    master = 9
    iterates = 50
    cov = CovarianceSpec(kind="ar_pos", p=10, rho=0.5)
    wins = 0
    sums = {"miss_forest": 0.0, "mean": 0.0}
    for it in range(iterates):
        # the response plays no part in imputation accuracy, so skip
        # noise calibration entirely
        data, _ = generate(
            SynthConfig(
                n=150, p=10, cov=cov, seed=derive_seed(master, it, "generate"),
                sigma2_override=1.0,
            )
        )
        mask = ampute_mcar(
            data, AmputeConfig(rate=0.2, seed=derive_seed(master, it, "ampute"))
        )
        scores = {}
        for method, n_trees in (("miss_forest", 25), ("mean", None)):
            result = impute(
                data.x, mask,
                ImputeConfig(
                    method=method, n_trees=n_trees,
                    seed=derive_seed(master, it, f"impute:{method}"),
                ),
            )
            scores[method] = nrmse(result.completed, data.x, mask)
            sums[method] += scores[method]
        wins += scores["miss_forest"] < scores["mean"]
    _report(
        7,
        "imputer ordering",
        wins >= 0.8 * iterates,
        f"miss_forest beat mean imputation in {wins}/{iterates} iterates "
        f"(needs >= {int(0.8 * iterates)}); mean nrmse "
        f"{sums['miss_forest'] / iterates:.2f} vs {sums['mean'] / iterates:.2f} "
        "(ar_pos rho=0.5, rate 0.2)",
    )


def test_criterion_08_interval_length_grows_with_missing():
    master = 21
    iterates = 50
    n = 500
    cfg0 = SynthConfig(n=n, p=10, seed=master)
    sigma2 = calibrate_noise(cfg0.model, cfg0.cov, 1.0, seed=master)
    sigma = build_covariance(cfg0.cov)

    lengths = {0.1: [], 0.3: []}
    for it in range(iterates):
        # one dataset per iterate, amputed at both rates (paired design)
        data, _ = generate(
            SynthConfig(
                n=n, p=10, seed=derive_seed(master, it, "generate"),
                sigma2_override=sigma2,
            )
        )
        x_star = sample_gaussian(sigma, 1, derive_seed(master, it, "test-x"))[0]
        for rate in (0.1, 0.3):
            mask = ampute_mcar(
                data, AmputeConfig(rate=rate, seed=derive_seed(master, it, f"ampute:{rate}"))
            )
            completed = impute(data.x, mask, ImputeConfig(method="mean")).completed
            model = fit_forest(
                completed, data.y,
                ForestConfig(m_trees=100, seed=derive_seed(master, it, f"forest:{rate}")),
            )
            st = residual_stats(model, completed, data.y)
            _SIGMA_PAIRS.append((st.sigma2_mcorrect, st.sigma2_simple))
            pi = pi_emp_q(model, st, x_star, 0.95)
            lengths[rate].append(pi.upper - pi.lower)

    med_lo = float(np.median(lengths[0.1]))
    med_hi = float(np.median(lengths[0.3]))
    _report(
        8,
        "interval length grows with missing rate",
        med_hi >= med_lo,
        f"median emp_q length {med_hi:.2f} at rate 0.3 >= {med_lo:.2f} at "
        f"rate 0.1 (mean imputer, {iterates} iterates per rate)",
    )


def test_criterion_09_variance_correction_narrows_widths():
    pairs = list(_SIGMA_PAIRS)
    if not pairs:
        # running this criterion in isolation: audit a fresh batch
        for it in range(12):
            data, _ = generate(
                SynthConfig(n=200, p=10, seed=derive_seed(909, it, "generate"),
                            sigma2_override=99.0)
            )
            model = fit_forest(
                data.x, data.y,
                ForestConfig(m_trees=40, seed=derive_seed(909, it, "forest")),
            )
            st = residual_stats(model, data.x, data.y)
            pairs.append((st.sigma2_mcorrect, st.sigma2_simple))
    # interval width is monotone in the variance estimate, so the width
    # ordering holds iff the sigma^2 ordering does
    ordered = sum(mc <= simple for mc, simple in pairs)

    # cloning one tree makes every row's OOB predictions identical, so
    # the correction term vanishes and the two widths coincide exactly
    rng = np.random.default_rng(99)
    x = rng.normal(size=(40, 4))
    y = x @ np.array([1.0, -2.0, 0.5, 0.0]) + rng.normal(size=40)
    base = fit_forest(x, y, ForestConfig(m_trees=1, seed=10))
    clones = ForestModel(
        trees=base.trees * 6,
        inbag=np.repeat(base.inbag, 6, axis=0),
        config=base.config,
    )
    st = residual_stats(clones, x, y)
    q = rng.normal(size=4)
    width_mc = pi_gaussian(clones, st, q, 0.95, "mcorrect")
    width_simple = pi_gaussian(clones, st, q, 0.95, "simple")
    exact_equal = (
        width_mc.lower == width_simple.lower and width_mc.upper == width_simple.upper
    )

    _report(
        9,
        "variance-correction width ordering",
        ordered == len(pairs) and exact_equal,
        f"corrected width <= simple width for {ordered}/{len(pairs)} fitted "
        f"forests; duplicated-tree widths exactly equal: {exact_equal}",
    )


def test_criterion_10_end_to_end_determinism(tmp_path):
    empirical = textwrap.dedent("""\
        [experiment]
        kind = empirical_accuracy
        master_seed = 31
        mc_iterates = 8
        missing_rates = 0.1, 0.3
        imputers = mean, miss_forest
        predictors = linear, forest

        [synth]
        n = 120
        p = 10

        [forest]
        m_trees = 25

        [impute]
        n_trees = 10
        """)
    intervals = textwrap.dedent("""\
        [experiment]
        kind = synthetic_intervals
        master_seed = 32
        mc_iterates = 3
        missing_rates = 0.2
        imputers = mean
        interval_kinds = emp_q, res_var, ols
        test_points_per_iterate = 2

        [synth]
        n = 150
        p = 10

        [forest]
        m_trees = 30
        """)
    all_equal = True
    for label, text in (("empirical", empirical), ("intervals", intervals)):
        blobs = []
        for run in ("a", "b"):
            path = tmp_path / f"{label}_{run}.ini"
            path.write_text(text)
            out = tmp_path / f"{label}_{run}"
            run_to_directory(parse_config(str(path)), out_dir=str(out))
            blobs.append((out / "results.csv").read_bytes())
        all_equal = all_equal and blobs[0] == blobs[1]
    _report(
        10,
        "end-to-end determinism",
        all_equal,
        "results.csv bitwise identical across repeated runs "
        "(both experiment kinds, same config and master seed)",
    )


def test_criterion_11_imputer_property_suite():
    rng = np.random.default_rng(1100)
    counts = Counter()
    failures = []
    for i in range(200):
        method = IMPUTE_METHODS[i % len(IMPUTE_METHODS)]
        n = int(rng.integers(10, 41))
        p = int(rng.integers(3, 7))
        z = rng.normal(size=(n, p))
        x = z + 0.6 * z[:, [0]]  # correlated columns give donors signal
        data = DataMatrix(x=x, y=rng.normal(size=n))
        mask = ampute_mcar(
            data,
            AmputeConfig(
                rate=float(rng.uniform(0.05, 0.3)), seed=int(rng.integers(2**31))
            ),
        )
        config = ImputeConfig(
            method=method,
            max_iter=3,
            pmm_donors=3,
            n_trees=4,
            seed=int(rng.integers(2**31)),
            sgb=SgbConfig(
                n_rounds=6, shrinkage=0.3, subsample=1.0, max_depth=2, min_node_size=2
            ),
            xgb=XgbConfig(n_rounds=6, shrinkage=0.3, max_depth=2, subsample=1.0),
        )
        result = impute(data.x, mask, config)
        obs = mask.r
        if not np.array_equal(result.completed[obs], x[obs]):
            failures.append(f"case {i} ({method}): observed cell modified")
        if not np.isfinite(result.completed).all():
            failures.append(f"case {i} ({method}): non-finite fill")
        if method in ("mice_pmm", "mice_rf"):
            # every filled value must be copied from an observed donor
            # in the same column
            for j in range(p):
                col_miss = ~mask.r[:, j]
                if not col_miss.any():
                    continue
                donors = x[mask.r[:, j], j]
                if not np.isin(result.completed[col_miss, j], donors).all():
                    failures.append(f"case {i} ({method}): non-donor value in column {j}")
        counts[method] += 1
    _report(
        11,
        "imputer property suite",
        not failures and len(counts) == len(IMPUTE_METHODS),
        f"200 random instances (n<=40, p<=6), per-method counts "
        f"{dict(counts)}; violations: {failures[:3] if failures else 'none'}",
    )
