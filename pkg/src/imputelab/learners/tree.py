"""Regression tree grown by exact greedy variance-reduction splits.

The builder works on a row multiset (bootstrap indices may repeat), keeps
the member rows of every leaf, and uses midpoints of sorted distinct
values as candidate thresholds. Ties between equally good splits break
toward the lowest feature index, then the lowest threshold. Routing sends
``value <= threshold`` left; NaN values follow the node's default side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class LearnerError(ValueError):
    """Raised for invalid learner inputs or configuration."""


def resolve_mtry(mtry: int | None, p: int) -> int:
    """Features sampled per split; defaults to max(1, floor(p / 3))."""
    if mtry is None:
        return max(1, p // 3)
    if not 1 <= mtry <= p:
        raise LearnerError(f"mtry must be in 1..{p}, got {mtry}")
    return mtry


@dataclass
class TreeConfig:
    """Growth limits for a single tree."""

    mtry: int | None = None
    min_node_size: int = 5
    max_depth: int | None = None

    def __post_init__(self) -> None:
        if self.min_node_size < 1:
            raise LearnerError(f"min_node_size must be >= 1, got {self.min_node_size}")
        if self.max_depth is not None and self.max_depth < 1:
            raise LearnerError(f"max_depth must be >= 1, got {self.max_depth}")


@dataclass
class TreeModel:
    """Flat-array binary tree.

    Node arrays are parallel and preorder; ``feature[v] == -1`` marks a
    leaf. ``leaf_members[v]`` holds the training-row indices (with
    bootstrap multiplicity) that reached leaf ``v``; ``leaf_value[v]`` is
    the mean response over that multiset.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    default_left: np.ndarray
    leaf_value: np.ndarray
    leaf_members: list = field(repr=False, default_factory=list)

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 0).sum())

    def leaf_ids(self, x: np.ndarray) -> np.ndarray:
        """Leaf node index reached by each row of ``x``."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        out = np.empty(x.shape[0], dtype=np.int64)
        stack = [(0, np.arange(x.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            f = int(self.feature[node])
            if f < 0:
                out[idx] = node
                continue
            xv = x[idx, f]
            go_left = xv <= self.threshold[node]
            if self.default_left[node]:
                go_left |= np.isnan(xv)
            stack.append((int(self.left[node]), idx[go_left]))
            stack.append((int(self.right[node]), idx[~go_left]))
        return out

    def predict(self, x: np.ndarray) -> np.ndarray | float:
        """Leaf value for one covariate vector or each row of a matrix."""
        single = np.asarray(x).ndim == 1
        vals = self.leaf_value[self.leaf_ids(x)]
        return float(vals[0]) if single else vals


def _best_split(xb, yn, pos, p, mtry, min_node_size, rng):
    """Best (feature, threshold) by variance reduction, or None.

    Gains are compared strictly, so scanning features ascending and
    thresholds ascending realizes the documented tie-breaking.
    """
    k = pos.size
    if np.ptp(yn) == 0.0:
        return None
    features = rng.choice(p, size=mtry, replace=False)
    features.sort()
    tot1 = yn.sum()
    tot2 = float(yn @ yn)
    parent_sse = tot2 - tot1 * tot1 / k
    counts_left = np.arange(1, k)
    counts_right = k - counts_left
    best_gain = 1e-12 * max(parent_sse, 0.0)
    best = None
    for f in features:
        xf = xb[pos, f]
        order = np.argsort(xf, kind="stable")
        xo = xf[order]
        if xo[0] == xo[-1]:
            continue
        yo = yn[order]
        c1 = np.cumsum(yo)[:-1]
        c2 = np.cumsum(yo * yo)[:-1]
        sse_left = c2 - c1 * c1 / counts_left
        sse_right = (tot2 - c2) - (tot1 - c1) ** 2 / counts_right
        gain = parent_sse - sse_left - sse_right
        valid = (
            (xo[1:] > xo[:-1])
            & (counts_left >= min_node_size)
            & (counts_right >= min_node_size)
        )
        if not valid.any():
            continue
        gain[~valid] = -np.inf
        i = int(np.argmax(gain))
        if gain[i] > best_gain:
            best_gain = float(gain[i])
            thr = 0.5 * (xo[i] + xo[i + 1])
            if thr >= xo[i + 1]:
                thr = float(xo[i])
            best = (int(f), float(thr))
    return best


def fit_tree(
    x: np.ndarray,
    y: np.ndarray,
    row_indices: np.ndarray,
    config: TreeConfig,
    rng: np.random.Generator,
) -> TreeModel:
    """Grow a tree on the row multiset ``row_indices``.

    A node becomes a leaf when its member count drops below
    ``2 * min_node_size``, the depth limit is reached, or no split
    strictly reduces the within-node sum of squares while keeping both
    children at ``min_node_size`` members.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    rows = np.asarray(row_indices, dtype=np.int64)
    if x.ndim != 2:
        raise LearnerError(f"x must be 2-d, got ndim={x.ndim}")
    if rows.size == 0:
        raise LearnerError("row_indices is empty")
    if rows.min() < 0 or rows.max() >= x.shape[0]:
        raise LearnerError("row_indices out of range")
    n, p = x.shape
    if y.shape != (n,):
        raise LearnerError(f"y must have shape ({n},), got {y.shape}")
    xb = x[rows]
    yb = y[rows]
    if not np.all(np.isfinite(xb)):
        raise LearnerError("x contains non-finite values on the training rows")
    if not np.all(np.isfinite(yb)):
        raise LearnerError("y contains non-finite values on the training rows")
    mtry = resolve_mtry(config.mtry, p)
    min_node = config.min_node_size
    max_depth = config.max_depth

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    leaf_value: list[float] = []
    members: list = []

    def new_node():
        feature.append(-1)
        threshold.append(np.nan)
        left.append(-1)
        right.append(-1)
        leaf_value.append(np.nan)
        members.append(None)
        return len(feature) - 1

    def build(pos: np.ndarray, depth: int) -> int:
        node = new_node()
        yn = yb[pos]
        split = None
        if pos.size >= 2 * min_node and (max_depth is None or depth < max_depth):
            split = _best_split(xb, yn, pos, p, mtry, min_node, rng)
        if split is None:
            leaf_value[node] = float(yn.mean())
            members[node] = rows[pos].copy()
            return node
        f, thr = split
        feature[node] = f
        threshold[node] = thr
        go_left = xb[pos, f] <= thr
        left[node] = build(pos[go_left], depth + 1)
        right[node] = build(pos[~go_left], depth + 1)
        return node

    build(np.arange(rows.size), 0)
    return TreeModel(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        default_left=np.ones(len(feature), dtype=bool),
        leaf_value=np.array(leaf_value, dtype=np.float64),
        leaf_members=members,
    )
