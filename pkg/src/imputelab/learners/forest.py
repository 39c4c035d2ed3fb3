"""Bagged regression forest with OOB predictions and QRF leaf weights.

Each tree gets its own derived random stream, so fitting is reproducible
regardless of evaluation order. The in-bag count matrix is kept on the
model: out-of-bag prediction, the quantile-forest weights, and the
variance corrections downstream all read it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..seeding import rng_for
from .tree import LearnerError, TreeConfig, TreeModel, fit_tree, resolve_mtry


@dataclass
class ForestConfig:
    """Forest size, per-split feature sample, leaf floor, and seed."""

    m_trees: int = 100
    mtry: int | None = None
    min_node_size: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m_trees < 1:
            raise LearnerError(f"m_trees must be >= 1, got {self.m_trees}")
        if self.min_node_size < 1:
            raise LearnerError(f"min_node_size must be >= 1, got {self.min_node_size}")


@dataclass
class ForestModel:
    """Fitted trees plus the m x n bootstrap in-bag count matrix."""

    trees: list[TreeModel] = field(repr=False)
    inbag: np.ndarray = field(repr=False)
    config: ForestConfig = None

    @property
    def m_trees(self) -> int:
        return len(self.trees)

    @property
    def n_train(self) -> int:
        return self.inbag.shape[1]


def fit_forest(x: np.ndarray, y: np.ndarray, config: ForestConfig) -> ForestModel:
    """Fit ``m_trees`` fully grown trees on bootstrap resamples of (x, y)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise LearnerError(f"x must be a non-empty matrix, got shape {x.shape}")
    n = x.shape[0]
    if y.shape != (n,):
        raise LearnerError(f"y must have shape ({n},), got {y.shape}")
    tree_cfg = TreeConfig(mtry=config.mtry, min_node_size=config.min_node_size)
    trees = []
    inbag = np.zeros((config.m_trees, n), dtype=np.int64)
    for t in range(config.m_trees):
        rng = rng_for(config.seed, t, "tree")
        boot = rng.integers(0, n, size=n)
        inbag[t] = np.bincount(boot, minlength=n)
        trees.append(fit_tree(x, y, boot, tree_cfg, rng))
    return ForestModel(trees=trees, inbag=inbag, config=config)


def predict_forest(model: ForestModel, x: np.ndarray) -> np.ndarray | float:
    """Mean over trees of the leaf value reached by ``x``.

    Accepts one covariate vector (returns a float) or a matrix (returns
    a vector of row predictions).
    """
    xa = np.asarray(x, dtype=np.float64)
    single = xa.ndim == 1
    xm = xa[None, :] if single else xa
    acc = np.zeros(xm.shape[0])
    for tree in model.trees:
        acc += tree.predict(xm)
    acc /= model.m_trees
    return float(acc[0]) if single else acc


def oob_tree_stats(
    model: ForestModel, x_train: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-row accumulators over out-of-bag trees.

    Returns ``(counts, pred_sum, pred_sumsq)``: for each training row,
    the number of trees whose bootstrap left the row out, and the sum
    and sum of squares of those trees' predictions for it.
    """
    x_train = np.asarray(x_train, dtype=np.float64)
    n = x_train.shape[0]
    if n != model.n_train:
        raise LearnerError(
            f"x_train has {n} rows, model was fit on {model.n_train}"
        )
    counts = np.zeros(n, dtype=np.int64)
    pred_sum = np.zeros(n)
    pred_sumsq = np.zeros(n)
    for t, tree in enumerate(model.trees):
        oob = np.flatnonzero(model.inbag[t] == 0)
        if oob.size == 0:
            continue
        preds = tree.predict(x_train[oob])
        counts[oob] += 1
        pred_sum[oob] += preds
        pred_sumsq[oob] += preds * preds
    return counts, pred_sum, pred_sumsq


def oob_predict(
    model: ForestModel, x_train: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Out-of-bag prediction per training row.

    Row i is averaged over the trees that did not sample it. Returns
    ``(values, valid)``: values are NaN where no tree left the row out,
    and ``valid`` flags rows with at least one OOB tree.
    """
    counts, pred_sum, _ = oob_tree_stats(model, x_train)
    valid = counts > 0
    values = np.full(counts.shape[0], np.nan)
    values[valid] = pred_sum[valid] / counts[valid]
    return values, valid


def qrf_weights(model: ForestModel, x_query: np.ndarray) -> np.ndarray:
    """Training-row weights defining the forest CDF estimate at a query.

    Per tree, the query's leaf distributes weight over the leaf's in-bag
    member rows proportional to their bootstrap multiplicity; the final
    weight averages over trees and sums to one.
    """
    x_query = np.asarray(x_query, dtype=np.float64)
    if x_query.ndim != 1:
        raise LearnerError(f"x_query must be a single vector, got ndim={x_query.ndim}")
    n = model.n_train
    m = model.m_trees
    w = np.zeros(n)
    row = x_query[None, :]
    for tree in model.trees:
        leaf = int(tree.leaf_ids(row)[0])
        mem = tree.leaf_members[leaf]
        np.add.at(w, mem, 1.0 / (m * mem.size))
    return w
