"""Prediction intervals from one regression forest.

Fits a forest, pulls its out-of-bag residuals, and builds all the
interval flavors at the same query point: quantile-forest (weighted
conditional CDF), empirical-residual-quantile, the three Gaussian
variants (simple / correction-subtracted / count-weighted variance),
and the classical OLS t-interval for comparison. Finishes with a quick
coverage count at 200 fresh points.
"""

import numpy as np

from imputelab.intervals import (
    pi_emp_q,
    pi_gaussian,
    pi_ols,
    pi_qrf,
    residual_stats,
)
from imputelab.learners.forest import ForestConfig, fit_forest, predict_forest
from imputelab.learners.linear import fit_ols
from imputelab.synthgen import SynthConfig, build_covariance, generate, regression_mean, sample_gaussian

config = SynthConfig(n=500, p=10, seed=7)  # identity covariance, linear mean
data, sigma2 = generate(config)
print(f"training data: n={data.n}, p={data.p}, noise sd {np.sqrt(sigma2):.2f}")

forest = fit_forest(data.x, data.y, ForestConfig(m_trees=100, seed=1))
stats = residual_stats(forest, data.x, data.y)
print(f"out-of-bag rows: {int(stats.valid.sum())}/{data.n}")
print(f"sigma^2 estimates: simple {stats.sigma2_simple:.1f}, "
      f"mcorrect {stats.sigma2_mcorrect:.1f}, weighted {stats.sigma2_weighted:.1f}")

ols = fit_ols(data.x, data.y)

# --- all interval kinds at one query -----------------------------------------
x_star = sample_gaussian(build_covariance(config.cov), 1, seed=2)[0]
print(f"\nforest point prediction at x*: {predict_forest(forest, x_star):8.2f}")
print(f"true mean at x*:               {regression_mean(config.model, x_star):8.2f}")

intervals = [
    pi_qrf(forest, data.y, x_star, 0.95),
    pi_emp_q(forest, stats, x_star, 0.95),
    pi_gaussian(forest, stats, x_star, 0.95, "simple"),
    pi_gaussian(forest, stats, x_star, 0.95, "mcorrect"),
    pi_gaussian(forest, stats, x_star, 0.95, "weighted"),
    pi_ols(ols, x_star, 0.95),
]
print(f"\n{'kind':>10}  {'lower':>9}  {'upper':>9}  {'length':>8}")
for pi in intervals:
    print(f"{pi.kind:>10}  {pi.lower:9.2f}  {pi.upper:9.2f}  "
          f"{pi.upper - pi.lower:8.2f}")

# --- coverage at fresh test pairs ---------------------------------------------
n_test = 200
x_test = sample_gaussian(build_covariance(config.cov), n_test, seed=3)
y_test = regression_mean(config.model, x_test) + (
    np.random.default_rng(4).standard_normal(n_test) * np.sqrt(sigma2)
)
hits = {"qrf": 0, "emp_q": 0, "res_var": 0, "ols": 0}
for x_i, y_i in zip(x_test, y_test):
    hits["qrf"] += pi_qrf(forest, data.y, x_i, 0.95).covers(y_i)
    hits["emp_q"] += pi_emp_q(forest, stats, x_i, 0.95).covers(y_i)
    hits["res_var"] += pi_gaussian(forest, stats, x_i, 0.95, "simple").covers(y_i)
    hits["ols"] += pi_ols(ols, x_i, 0.95).covers(y_i)
print(f"\ncoverage at {n_test} fresh points (nominal 0.95):")
for kind, h in hits.items():
    print(f"  {kind:>8}: {h / n_test:.3f}")
