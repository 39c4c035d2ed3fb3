"""Prediction intervals for forest and linear regression.

Forest intervals come in three families: quantile-forest intervals read
off the weighted empirical CDF defined by the forest's leaves; empirical
intervals shift the point prediction by type-1 quantiles of out-of-bag
residuals; Gaussian intervals are symmetric with one of three residual
variance estimates. The linear interval is the classical OLS t-interval
for a new response.

All empirical quantiles use the type-1 (left-continuous generalized
inverse) convention: Q(q) = sorted[ceil(n*q) - 1] with the index clamped
to [1, n].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .learners.forest import ForestModel, oob_tree_stats, predict_forest, qrf_weights
from .learners.linear import LinearModel, predict_ols
from .learners.tree import LearnerError

INTERVAL_KINDS = ("qrf", "emp_q", "res_var", "m_correct", "weighted", "ols")

_VARIANCE_KIND_LABEL = {"simple": "res_var", "mcorrect": "m_correct", "weighted": "weighted"}


class IntervalError(ValueError):
    """Raised when an interval cannot be formed from the given inputs."""


@dataclass
class PredictionInterval:
    """A two-sided interval [lower, upper] at the given nominal level."""

    lower: float
    upper: float
    level: float
    kind: str

    def __post_init__(self) -> None:
        if not 0.0 < self.level < 1.0:
            raise IntervalError(f"level must be in (0, 1), got {self.level}")
        if self.kind not in INTERVAL_KINDS:
            raise IntervalError(f"unknown interval kind {self.kind!r}")
        if not self.lower <= self.upper:
            raise IntervalError(f"lower {self.lower} exceeds upper {self.upper}")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def covers(self, y: float) -> bool:
        return self.lower <= y <= self.upper


@dataclass
class ResidualStats:
    """Out-of-bag residual summaries of a fitted forest.

    ``residuals`` and ``oob_counts`` are per training row; rows with no
    OOB tree are invalid (NaN residual, flagged in ``valid``). The three
    variance estimates are:

    simple:    mean squared OOB residual
    mcorrect:  simple minus mean per-row OOB tree variance / m_trees,
               clamped at zero
    weighted:  OOB-count-weighted mean squared residual
    """

    residuals: np.ndarray = field(repr=False)
    oob_counts: np.ndarray = field(repr=False)
    valid: np.ndarray = field(repr=False)
    sigma2_simple: float = 0.0
    sigma2_mcorrect: float = 0.0
    sigma2_weighted: float = 0.0
    mean_tree_variance: float = 0.0


def quantile_type1(values: np.ndarray, q: float) -> float:
    """Left-continuous empirical quantile: sorted[ceil(n*q) - 1]."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise IntervalError("cannot take a quantile of an empty sample")
    if not 0.0 <= q <= 1.0:
        raise IntervalError(f"q must be in [0, 1], got {q}")
    v = np.sort(values)
    k = int(np.ceil(values.size * q))
    k = min(max(k, 1), values.size)
    return float(v[k - 1])


def normal_quantile(q: float) -> float:
    """Standard normal quantile, accurate to machine precision."""
    if not 0.0 < q < 1.0:
        raise IntervalError(f"q must be in (0, 1), got {q}")
    return float(special.ndtri(q))


def residual_stats(model: ForestModel, x: np.ndarray, y: np.ndarray) -> ResidualStats:
    """Out-of-bag residuals of the forest's own training data.

    Residual sign convention: r_i = y_i - oob_prediction_i. The per-row
    OOB tree variance entering the mcorrect estimate is the sample
    variance of each row's individual OOB tree predictions (rows with at
    least two OOB trees).
    """
    y = np.asarray(y, dtype=np.float64)
    counts, pred_sum, pred_sumsq = oob_tree_stats(model, x)
    if y.shape != counts.shape:
        raise LearnerError(f"y must have shape {counts.shape}, got {y.shape}")
    valid = counts > 0
    if int(valid.sum()) < 2:
        raise IntervalError(
            f"need at least 2 rows with an out-of-bag tree, got {int(valid.sum())}"
        )
    residuals = np.full(y.shape[0], np.nan)
    residuals[valid] = y[valid] - pred_sum[valid] / counts[valid]
    r2 = residuals[valid] ** 2
    sigma2_simple = float(r2.mean())
    c = counts[valid].astype(np.float64)
    sigma2_weighted = float((c * r2).sum() / c.sum())
    multi = counts >= 2
    if multi.any():
        cm = counts[multi].astype(np.float64)
        tree_var = (pred_sumsq[multi] - pred_sum[multi] ** 2 / cm) / (cm - 1.0)
        mean_tree_variance = float(np.maximum(tree_var, 0.0).mean())
    else:
        mean_tree_variance = 0.0
    sigma2_mcorrect = max(0.0, sigma2_simple - mean_tree_variance / model.m_trees)
    return ResidualStats(
        residuals=residuals,
        oob_counts=counts,
        valid=valid,
        sigma2_simple=sigma2_simple,
        sigma2_mcorrect=sigma2_mcorrect,
        sigma2_weighted=sigma2_weighted,
        mean_tree_variance=mean_tree_variance,
    )


def pi_qrf(
    model: ForestModel,
    y_train: np.ndarray,
    x_query: np.ndarray,
    level: float,
) -> PredictionInterval:
    """Quantile-forest interval [Q(alpha/2), Q(1 - alpha/2)].

    Q(beta) is the smallest training response whose weighted empirical
    CDF value reaches beta, with weights from :func:`qrf_weights`.
    """
    if not 0.0 < level < 1.0:
        raise IntervalError(f"level must be in (0, 1), got {level}")
    y_train = np.asarray(y_train, dtype=np.float64)
    if y_train.shape[0] != model.n_train:
        raise IntervalError(
            f"y_train has {y_train.shape[0]} rows, model was fit on {model.n_train}"
        )
    w = qrf_weights(model, x_query)
    total = w.sum()
    if not total > 0.0:
        raise IntervalError("degenerate weights: no training row carries weight")
    order = np.argsort(y_train, kind="stable")
    ys = y_train[order]
    cw = np.cumsum(w[order])
    alpha = 1.0 - level

    def weighted_q(beta: float) -> float:
        idx = int(np.searchsorted(cw, beta, side="left"))
        return float(ys[min(idx, ys.size - 1)])

    return PredictionInterval(
        lower=weighted_q(alpha / 2.0),
        upper=weighted_q(1.0 - alpha / 2.0),
        level=level,
        kind="qrf",
    )


def pi_emp_q(
    model: ForestModel,
    stats_: ResidualStats,
    x_query: np.ndarray,
    level: float,
) -> PredictionInterval:
    """Point prediction shifted by OOB-residual quantiles.

    [m(x) + D(alpha/2), m(x) + D(1 - alpha/2)] with D(beta) the type-1
    empirical quantile of the valid OOB residuals.
    """
    if not 0.0 < level < 1.0:
        raise IntervalError(f"level must be in (0, 1), got {level}")
    m = predict_forest(model, x_query)
    r = stats_.residuals[stats_.valid]
    alpha = 1.0 - level
    lo = quantile_type1(r, alpha / 2.0)
    hi = quantile_type1(r, 1.0 - alpha / 2.0)
    return PredictionInterval(lower=m + lo, upper=m + hi, level=level, kind="emp_q")


def pi_gaussian(
    model: ForestModel,
    stats_: ResidualStats,
    x_query: np.ndarray,
    level: float,
    variance_kind: str = "simple",
) -> PredictionInterval:
    """Symmetric normal interval m(x) +/- z_{1-alpha/2} * sigma_hat."""
    if not 0.0 < level < 1.0:
        raise IntervalError(f"level must be in (0, 1), got {level}")
    if variance_kind not in _VARIANCE_KIND_LABEL:
        raise IntervalError(
            f"variance_kind must be one of {sorted(_VARIANCE_KIND_LABEL)}, "
            f"got {variance_kind!r}"
        )
    sigma2 = {
        "simple": stats_.sigma2_simple,
        "mcorrect": stats_.sigma2_mcorrect,
        "weighted": stats_.sigma2_weighted,
    }[variance_kind]
    m = predict_forest(model, x_query)
    half = normal_quantile(1.0 - (1.0 - level) / 2.0) * float(np.sqrt(sigma2))
    return PredictionInterval(
        lower=m - half,
        upper=m + half,
        level=level,
        kind=_VARIANCE_KIND_LABEL[variance_kind],
    )


def pi_ols(model: LinearModel, x_query: np.ndarray, level: float) -> PredictionInterval:
    """Classical OLS t-interval for a new response at x_query.

    m(x) +/- t_{1-alpha/2, n-p-1} * sqrt(sigma2_hat * (1 + leverage)),
    with leverage = [1, x]' (X'X)^{-1} [1, x].
    """
    if not 0.0 < level < 1.0:
        raise IntervalError(f"level must be in (0, 1), got {level}")
    x_query = np.asarray(x_query, dtype=np.float64)
    if x_query.ndim != 1:
        raise IntervalError(f"x_query must be a single vector, got ndim={x_query.ndim}")
    m = predict_ols(model, x_query)
    xt = np.concatenate([[1.0], x_query])
    leverage = float(xt @ model.gram_inv @ xt)
    tq = float(stats.t.ppf(1.0 - (1.0 - level) / 2.0, model.df))
    half = tq * float(np.sqrt(model.sigma2_hat * (1.0 + leverage)))
    return PredictionInterval(lower=m - half, upper=m + half, level=level, kind="ols")
