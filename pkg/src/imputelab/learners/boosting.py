"""Gradient-boosted regression trees: stochastic (SGB) and a second-order
variant with sparsity-aware splits (XGB style).

Both fit shallow trees to residuals of the running prediction under
squared loss. The XGB variant additionally regularizes leaf values with
an L2 term and learns, per split, which side rows with a missing value
in the split feature should follow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..seeding import rng_for
from .tree import LearnerError, TreeConfig, TreeModel, fit_tree


@dataclass
class SgbConfig:
    """Stochastic gradient boosting hyperparameters."""

    n_rounds: int = 300
    shrinkage: float = 0.05
    subsample: float = 0.5
    max_depth: int = 3
    min_node_size: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_rounds < 1:
            raise LearnerError(f"n_rounds must be >= 1, got {self.n_rounds}")
        if not 0.0 < self.shrinkage <= 1.0:
            raise LearnerError(f"shrinkage must be in (0, 1], got {self.shrinkage}")
        if not 0.0 < self.subsample <= 1.0:
            raise LearnerError(f"subsample must be in (0, 1], got {self.subsample}")
        if self.max_depth < 1:
            raise LearnerError(f"max_depth must be >= 1, got {self.max_depth}")


@dataclass
class XgbConfig:
    """Second-order boosting hyperparameters.

    ``reg_lambda`` is the L2 leaf penalty; ``learn_defaults`` toggles
    learning per-split default directions for missing values (when off,
    missing rows always go left).
    """

    n_rounds: int = 300
    shrinkage: float = 0.05
    reg_lambda: float = 1.0
    max_depth: int = 4
    subsample: float = 0.8
    learn_defaults: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_rounds < 1:
            raise LearnerError(f"n_rounds must be >= 1, got {self.n_rounds}")
        if not 0.0 < self.shrinkage <= 1.0:
            raise LearnerError(f"shrinkage must be in (0, 1], got {self.shrinkage}")
        if not 0.0 < self.subsample <= 1.0:
            raise LearnerError(f"subsample must be in (0, 1], got {self.subsample}")
        if self.reg_lambda < 0:
            raise LearnerError(f"reg_lambda must be >= 0, got {self.reg_lambda}")
        if self.max_depth < 1:
            raise LearnerError(f"max_depth must be >= 1, got {self.max_depth}")


@dataclass
class BoostModel:
    """Additive model: base_prediction + shrinkage * sum of tree outputs."""

    kind: str
    base_prediction: float
    shrinkage: float
    trees: list[TreeModel] = field(repr=False)


def _subsample_rows(rng: np.random.Generator, n: int, fraction: float) -> np.ndarray:
    size = max(1, int(np.floor(fraction * n)))
    if size >= n:
        return np.arange(n)
    return rng.choice(n, size=size, replace=False)


def _validate_xy(x, y, allow_nan_x=False):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise LearnerError(f"x must be a non-empty matrix, got shape {x.shape}")
    if y.shape != (x.shape[0],):
        raise LearnerError(f"y must have shape ({x.shape[0]},), got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise LearnerError("y contains non-finite values")
    if not allow_nan_x:
        if not np.all(np.isfinite(x)):
            raise LearnerError("x contains non-finite values")
    elif np.any(np.isinf(x)):
        raise LearnerError("x contains infinite values")
    return x, y


def fit_sgb(x: np.ndarray, y: np.ndarray, config: SgbConfig) -> BoostModel:
    """Friedman-style stochastic gradient boosting under squared loss.

    Starts from mean(y); each round fits a depth-limited tree to the
    current residuals on a fresh row subsample (without replacement) and
    adds its shrunk predictions.
    """
    x, y = _validate_xy(x, y)
    n = x.shape[0]
    base = float(y.mean())
    pred = np.full(n, base)
    tree_cfg = TreeConfig(
        mtry=x.shape[1], min_node_size=config.min_node_size, max_depth=config.max_depth
    )
    trees = []
    for t in range(config.n_rounds):
        rng = rng_for(config.seed, t, "sgb-round")
        rows = _subsample_rows(rng, n, config.subsample)
        tree = fit_tree(x, y - pred, rows, tree_cfg, rng)
        trees.append(tree)
        pred += config.shrinkage * tree.predict(x)
    return BoostModel(
        kind="sgb", base_prediction=base, shrinkage=config.shrinkage, trees=trees
    )


def predict_boost(model: BoostModel, x: np.ndarray) -> np.ndarray | float:
    """Evaluate the boosted ensemble on one vector or a matrix of rows."""
    xa = np.asarray(x, dtype=np.float64)
    single = xa.ndim == 1
    xm = xa[None, :] if single else xa
    acc = np.full(xm.shape[0], model.base_prediction)
    for tree in model.trees:
        acc += model.shrinkage * tree.predict(xm)
    return float(acc[0]) if single else acc


def _xgb_best_split(xb, g, pos, lam, learn_defaults):
    """Best (feature, threshold, missing_left) at one node, or None.

    Scores use the standard second-order gain with unit hessians, so the
    denominator per side is its row count plus lambda. Missing rows are
    tried on both sides when ``learn_defaults`` is on; ties prefer the
    lower feature index, then the lower threshold, then the left side.
    """
    p = xb.shape[1]
    gn = g[pos]
    g_tot = gn.sum()
    n_tot = pos.size
    parent_score = g_tot * g_tot / (n_tot + lam)
    best_gain = 0.0
    best = None
    for f in range(p):
        xf = xb[pos, f]
        present = ~np.isnan(xf)
        n_present = int(present.sum())
        n_miss = n_tot - n_present
        if n_present < 2:
            continue
        xp = xf[present]
        gp = gn[present]
        order = np.argsort(xp, kind="stable")
        xo = xp[order]
        if xo[0] == xo[-1]:
            continue
        go = gp[order]
        g_miss = float(gn[~present].sum())
        cg = np.cumsum(go)[:-1]
        nl = np.arange(1, xo.size)
        distinct = xo[1:] > xo[:-1]
        directions = [True, False] if (learn_defaults and n_miss > 0) else [True]
        feat_cand = None
        for missing_left in directions:
            gl = cg + g_miss if missing_left else cg
            nl_eff = nl + n_miss if missing_left else nl
            gr = g_tot - gl
            nr_eff = n_tot - nl_eff
            gain = 0.5 * (
                gl * gl / (nl_eff + lam) + gr * gr / (nr_eff + lam) - parent_score
            )
            gain = np.where(distinct, gain, -np.inf)
            i = int(np.argmax(gain))
            if gain[i] <= 0.0:
                continue
            thr = 0.5 * (xo[i] + xo[i + 1])
            if thr >= xo[i + 1]:
                thr = float(xo[i])
            cand = (float(gain[i]), float(thr), missing_left)
            if (
                feat_cand is None
                or cand[0] > feat_cand[0]
                or (cand[0] == feat_cand[0] and cand[1] < feat_cand[1])
            ):
                feat_cand = cand
        if feat_cand is not None and feat_cand[0] > best_gain:
            best_gain = feat_cand[0]
            best = (f, feat_cand[1], feat_cand[2])
    return best


def _fit_xgb_tree(x, g, rows, config):
    """One regularized tree on gradient residuals; handles NaN cells."""
    lam = config.reg_lambda
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    default_left: list[bool] = []
    leaf_value: list[float] = []

    def new_node():
        feature.append(-1)
        threshold.append(np.nan)
        left.append(-1)
        right.append(-1)
        default_left.append(True)
        leaf_value.append(np.nan)
        return len(feature) - 1

    def build(pos, depth):
        node = new_node()
        split = None
        if pos.size >= 2 and depth < config.max_depth:
            split = _xgb_best_split(x, g, pos, lam, config.learn_defaults)
        if split is None:
            leaf_value[node] = float(g[pos].sum() / (pos.size + lam))
            return node
        f, thr, missing_left = split
        feature[node] = f
        threshold[node] = thr
        default_left[node] = missing_left
        xv = x[pos, f]
        go_left = xv <= thr
        if missing_left:
            go_left |= np.isnan(xv)
        left[node] = build(pos[go_left], depth + 1)
        right[node] = build(pos[~go_left], depth + 1)
        return node

    build(rows, 0)
    return TreeModel(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        default_left=np.array(default_left, dtype=bool),
        leaf_value=np.array(leaf_value, dtype=np.float64),
        leaf_members=[None] * len(feature),
    )


def fit_xgb(x: np.ndarray, y: np.ndarray, config: XgbConfig) -> BoostModel:
    """Second-order boosting with L2 leaf regularization.

    Accepts NaN covariate cells: candidate splits are searched over the
    observed values and each split learns the gain-maximizing side for
    the rows whose split feature is missing. A column that is entirely
    missing on the training rows simply never splits.
    """
    x, y = _validate_xy(x, y, allow_nan_x=True)
    n = x.shape[0]
    base = float(y.mean())
    pred = np.full(n, base)
    trees = []
    for t in range(config.n_rounds):
        rng = rng_for(config.seed, t, "xgb-round")
        rows = _subsample_rows(rng, n, config.subsample)
        tree = _fit_xgb_tree(x, y - pred, rows, config)
        trees.append(tree)
        pred += config.shrinkage * tree.predict(x)
    return BoostModel(
        kind="xgb", base_prediction=base, shrinkage=config.shrinkage, trees=trees
    )
