"""Single imputation of missing covariate cells.

Seven methods share one surface: the column-mean fill, three iterative
learner-based imputers in the missForest mold (random forest, SGB, and
the XGB variant), and three chained-equation (MICE) samplers (Bayesian
normal regression, predictive mean matching, and a forest donor scheme).

All methods visit columns in ascending order of missing count, preserve
observed cells exactly, and are deterministic given their seed. The
response never participates: imputation models see covariates only.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import DataMatrix, MissMask
from .learners.boosting import SgbConfig, XgbConfig, fit_sgb, fit_xgb, predict_boost
from .learners.forest import ForestConfig, fit_forest, predict_forest
from .seeding import derive_seed, rng_for

IMPUTE_METHODS = (
    "mean",
    "miss_forest",
    "gbm_impute",
    "xgb_impute",
    "mice_norm",
    "mice_pmm",
    "mice_rf",
)

_RIDGE = 1e-8


class ImputationError(ValueError):
    """Raised for invalid imputation inputs or configuration."""


@dataclass
class ImputeConfig:
    """Method name plus the knobs shared across the method families.

    ``n_trees`` overrides the forest size of forest-based imputers
    (miss_forest defaults to 100, mice_rf to 10). ``sgb`` / ``xgb``
    override the boosting imputers' hyperparameters; their seed fields
    are ignored in favor of per-fit derived seeds.
    """

    method: str
    max_iter: int = 10
    pmm_donors: int = 5
    n_trees: int | None = None
    min_node_size: int = 5
    seed: int = 0
    sgb: SgbConfig | None = None
    xgb: XgbConfig | None = None

    def __post_init__(self) -> None:
        if self.method not in IMPUTE_METHODS:
            raise ImputationError(f"unknown imputation method {self.method!r}")
        if self.max_iter < 1:
            raise ImputationError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.pmm_donors < 1:
            raise ImputationError(f"pmm_donors must be >= 1, got {self.pmm_donors}")
        if self.n_trees is not None and self.n_trees < 1:
            raise ImputationError(f"n_trees must be >= 1, got {self.n_trees}")


@dataclass
class ImputeResult:
    """Completed covariate matrix plus the iteration record.

    ``iterations_run`` counts full column sweeps executed;
    ``delta_trace`` holds the relative-change statistic after each sweep
    (one entry per sweep; empty for the one-shot mean fill).
    """

    completed: np.ndarray = field(repr=False)
    iterations_run: int
    delta_trace: list[float]
    method: str

    def __post_init__(self) -> None:
        self.completed = np.array(self.completed, copy=True)
        self.completed.flags.writeable = False


def _working_matrix(x: DataMatrix | np.ndarray, mask: MissMask) -> np.ndarray:
    """Covariates with NaN planted at masked cells; observed cells checked."""
    if isinstance(x, DataMatrix):
        mask.check_shape(x)
        xv = x.x
    else:
        xv = np.asarray(x, dtype=np.float64)
        if xv.shape != mask.r.shape:
            raise ImputationError(
                f"x shape {xv.shape} does not match mask {mask.r.shape}"
            )
    if not np.all(np.isfinite(xv[mask.r])):
        raise ImputationError("observed cells contain non-finite values")
    out = np.array(xv, dtype=np.float64, copy=True)
    out[~mask.r] = np.nan
    return out


def _columns_by_missing_count(mask: MissMask) -> np.ndarray:
    """Columns with missing cells, ascending by count (ties by index)."""
    counts = (~mask.r).sum(axis=0)
    cols = np.flatnonzero(counts > 0)
    return cols[np.argsort(counts[cols], kind="stable")]


def initialize_fill(
    x_nan: np.ndarray,
    mask: MissMask,
    strategy: str = "mean",
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Fill missing cells column-wise with means or random observed draws."""
    if strategy not in ("mean", "random_draw"):
        raise ImputationError(f"unknown fill strategy {strategy!r}")
    if strategy == "random_draw" and rng is None:
        raise ImputationError("random_draw fill needs an rng")
    out = np.array(x_nan, dtype=np.float64, copy=True)
    for j in range(mask.r.shape[1]):
        mis = ~mask.r[:, j]
        if not mis.any():
            continue
        observed = out[mask.r[:, j], j]
        if strategy == "mean":
            out[mis, j] = observed.mean()
        else:
            out[mis, j] = rng.choice(observed, size=int(mis.sum()), replace=True)
    return out


def _sweep_delta(x_new, x_old, miss):
    num = float(((x_new[miss] - x_old[miss]) ** 2).sum())
    den = float((x_new[miss] ** 2).sum())
    if den == 0.0:
        return 0.0 if num == 0.0 else np.inf
    return num / den


def impute_mean(x, mask: MissMask, config: ImputeConfig | None = None) -> ImputeResult:
    """Column-mean fill: zero learner fits, one pass."""
    x_nan = _working_matrix(x, mask)
    return ImputeResult(
        completed=initialize_fill(x_nan, mask, "mean"),
        iterations_run=0,
        delta_trace=[],
        method="mean",
    )


def impute_iterative(x, mask: MissMask, config: ImputeConfig, fit_predict) -> ImputeResult:
    """missForest-style chained refitting with the given learner.

    ``fit_predict(x_train, y_train, x_query, seed)`` fits a regressor of
    one column on the other (currently completed) columns and predicts
    the column's missing rows. Sweeps stop at ``max_iter`` or at the
    first sweep whose relative change increases, in which case the
    previous iterate is returned.
    """
    x_nan = _working_matrix(x, mask)
    if mask.n_missing == 0:
        return ImputeResult(
            completed=x_nan, iterations_run=0, delta_trace=[], method=config.method
        )
    miss = ~mask.r
    cols = _columns_by_missing_count(mask)
    all_cols = np.arange(mask.r.shape[1])
    x_work = initialize_fill(x_nan, mask, "mean")
    delta_old = np.inf
    trace: list[float] = []
    for t in range(config.max_iter):
        x_prev = x_work.copy()
        for j in cols:
            obs = mask.r[:, j]
            others = all_cols[all_cols != j]
            seed = derive_seed(config.seed, t, f"col:{j}")
            preds = fit_predict(
                x_work[obs][:, others], x_work[obs, j], x_work[~obs][:, others], seed
            )
            x_work[~obs, j] = preds
        delta = _sweep_delta(x_work, x_prev, miss)
        trace.append(delta)
        if delta > delta_old:
            return ImputeResult(
                completed=x_prev,
                iterations_run=t + 1,
                delta_trace=trace,
                method=config.method,
            )
        delta_old = delta
    return ImputeResult(
        completed=x_work,
        iterations_run=config.max_iter,
        delta_trace=trace,
        method=config.method,
    )


def _forest_fit_predict(config: ImputeConfig):
    base = ForestConfig(
        m_trees=config.n_trees if config.n_trees is not None else 100,
        min_node_size=config.min_node_size,
    )

    def fit_predict(x_train, y_train, x_query, seed):
        model = fit_forest(x_train, y_train, replace(base, seed=seed))
        return predict_forest(model, x_query)

    return fit_predict


def _sgb_fit_predict(config: ImputeConfig):
    base = config.sgb if config.sgb is not None else SgbConfig()

    def fit_predict(x_train, y_train, x_query, seed):
        model = fit_sgb(x_train, y_train, replace(base, seed=seed))
        return predict_boost(model, x_query)

    return fit_predict


def _xgb_fit_predict(config: ImputeConfig):
    base = config.xgb if config.xgb is not None else XgbConfig()

    def fit_predict(x_train, y_train, x_query, seed):
        model = fit_xgb(x_train, y_train, replace(base, seed=seed))
        return predict_boost(model, x_query)

    return fit_predict


def _bayes_regression(d_obs, y_obs, rng):
    """Posterior draw (beta_hat, beta_star, sigma_star2) for one column.

    Classical normal-inverse-chi-square sampling: sigma*^2 = RSS / chi2(df)
    with df = max(1, n_obs - q), then beta* ~ N(beta_hat, sigma*^2 G^-1)
    on the ridged Gram G.
    """
    n_obs, q = d_obs.shape
    gram = d_obs.T @ d_obs
    gram += _RIDGE * (np.trace(gram) / q + 1.0) * np.eye(q)
    beta_hat = np.linalg.solve(gram, d_obs.T @ y_obs)
    resid = y_obs - d_obs @ beta_hat
    rss = float(resid @ resid)
    df = max(1, n_obs - q)
    sigma_star2 = rss / float(rng.chisquare(df))
    gram_inv = np.linalg.inv(gram)
    chol = np.linalg.cholesky(gram_inv)
    beta_star = beta_hat + np.sqrt(sigma_star2) * (chol @ rng.standard_normal(q))
    return beta_hat, beta_star, sigma_star2


def _mice_sweeps(x, mask: MissMask, config: ImputeConfig, update_column) -> ImputeResult:
    """Shared chained-equations driver: fixed number of sweeps, no stop rule."""
    x_nan = _working_matrix(x, mask)
    if mask.n_missing == 0:
        return ImputeResult(
            completed=x_nan, iterations_run=0, delta_trace=[], method=config.method
        )
    miss = ~mask.r
    cols = _columns_by_missing_count(mask)
    all_cols = np.arange(mask.r.shape[1])
    if config.method == "mice_rf":
        x_work = initialize_fill(
            x_nan, mask, "random_draw", rng_for(config.seed, 0, "mice-init")
        )
    else:
        x_work = initialize_fill(x_nan, mask, "mean")
    trace: list[float] = []
    for t in range(config.max_iter):
        x_prev = x_work.copy()
        for j in cols:
            obs = mask.r[:, j]
            others = all_cols[all_cols != j]
            update_column(x_work, obs, j, others, rng_for(config.seed, t, f"col:{j}"))
        trace.append(_sweep_delta(x_work, x_prev, miss))
    return ImputeResult(
        completed=x_work,
        iterations_run=config.max_iter,
        delta_trace=trace,
        method=config.method,
    )


def mice_norm(x, mask: MissMask, config: ImputeConfig) -> ImputeResult:
    """Chained Bayesian linear regression with noise draws."""

    def update(x_work, obs, j, others, rng):
        d_obs = np.hstack([np.ones((int(obs.sum()), 1)), x_work[obs][:, others]])
        _, beta_star, sigma_star2 = _bayes_regression(d_obs, x_work[obs, j], rng)
        mis = ~obs
        d_mis = np.hstack([np.ones((int(mis.sum()), 1)), x_work[mis][:, others]])
        x_work[mis, j] = d_mis @ beta_star + np.sqrt(sigma_star2) * rng.standard_normal(
            int(mis.sum())
        )

    return _mice_sweeps(x, mask, config, update)


def mice_pmm(x, mask: MissMask, config: ImputeConfig) -> ImputeResult:
    """Chained predictive mean matching.

    Each missing cell copies the observed value of a donor drawn
    uniformly among the ``pmm_donors`` observed rows whose beta_hat
    predictions sit closest to the cell's beta_star prediction.
    """

    def update(x_work, obs, j, others, rng):
        y_obs = x_work[obs, j]
        d_obs = np.hstack([np.ones((int(obs.sum()), 1)), x_work[obs][:, others]])
        beta_hat, beta_star, _ = _bayes_regression(d_obs, y_obs, rng)
        mis = ~obs
        d_mis = np.hstack([np.ones((int(mis.sum()), 1)), x_work[mis][:, others]])
        eta_obs = d_obs @ beta_hat
        eta_mis = d_mis @ beta_star
        donors = min(config.pmm_donors, eta_obs.size)
        dist = np.abs(eta_obs[None, :] - eta_mis[:, None])
        nearest = np.argsort(dist, axis=1, kind="stable")[:, :donors]
        pick = rng.integers(donors, size=eta_mis.size)
        x_work[mis, j] = y_obs[nearest[np.arange(eta_mis.size), pick]]

    return _mice_sweeps(x, mask, config, update)


def mice_rf(x, mask: MissMask, config: ImputeConfig) -> ImputeResult:
    """Chained forest donor sampling.

    Starts from random observed draws. Per column, a small forest is fit
    on the observed rows; each missing row picks one tree uniformly and
    copies the value of one in-bag member (uniform, multiplicity-
    weighted) of the leaf it lands in.
    """
    n_trees = config.n_trees if config.n_trees is not None else 10

    def update(x_work, obs, j, others, rng):
        y_obs = x_work[obs, j]
        fc = ForestConfig(
            m_trees=n_trees,
            min_node_size=config.min_node_size,
            seed=int(rng.integers(2**63)),
        )
        model = fit_forest(x_work[obs][:, others], y_obs, fc)
        mis_rows = np.flatnonzero(~obs)
        x_mis = x_work[mis_rows][:, others]
        tree_pick = rng.integers(model.m_trees, size=mis_rows.size)
        values = np.empty(mis_rows.size)
        for t in np.unique(tree_pick):
            sel = np.flatnonzero(tree_pick == t)
            leaves = model.trees[t].leaf_ids(x_mis[sel])
            for s, leaf in zip(sel, leaves):
                mem = model.trees[t].leaf_members[int(leaf)]
                values[s] = y_obs[mem[rng.integers(mem.size)]]
        x_work[mis_rows, j] = values

    return _mice_sweeps(x, mask, config, update)


def miss_forest(x, mask: MissMask, config: ImputeConfig) -> ImputeResult:
    """Iterative random-forest imputation."""
    return impute_iterative(x, mask, config, _forest_fit_predict(config))


def gbm_impute(x, mask: MissMask, config: ImputeConfig) -> ImputeResult:
    """Iterative imputation with stochastic gradient boosting."""
    return impute_iterative(x, mask, config, _sgb_fit_predict(config))


def xgb_impute(x, mask: MissMask, config: ImputeConfig) -> ImputeResult:
    """Iterative imputation with the second-order boosting variant."""
    return impute_iterative(x, mask, config, _xgb_fit_predict(config))


_DISPATCH = {
    "mean": impute_mean,
    "miss_forest": miss_forest,
    "gbm_impute": gbm_impute,
    "xgb_impute": xgb_impute,
    "mice_norm": mice_norm,
    "mice_pmm": mice_pmm,
    "mice_rf": mice_rf,
}


def impute(x, mask: MissMask, config: ImputeConfig) -> ImputeResult:
    """Run the configured imputation method on (x, mask)."""
    return _DISPATCH[config.method](x, mask, config)
