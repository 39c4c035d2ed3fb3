"""From-scratch regression learners: CART, bagged forest, boosting, OLS."""

from .boosting import (
    BoostModel,
    SgbConfig,
    XgbConfig,
    fit_sgb,
    fit_xgb,
    predict_boost,
)
from .forest import (
    ForestConfig,
    ForestModel,
    fit_forest,
    oob_predict,
    oob_tree_stats,
    predict_forest,
    qrf_weights,
)
from .linear import LinearModel, fit_ols, predict_ols
from .tree import LearnerError, TreeConfig, TreeModel, fit_tree, resolve_mtry

__all__ = [
    "BoostModel",
    "ForestConfig",
    "ForestModel",
    "LearnerError",
    "LinearModel",
    "SgbConfig",
    "TreeConfig",
    "TreeModel",
    "XgbConfig",
    "fit_forest",
    "fit_ols",
    "fit_sgb",
    "fit_tree",
    "fit_xgb",
    "oob_predict",
    "oob_tree_stats",
    "predict_boost",
    "predict_forest",
    "predict_ols",
    "qrf_weights",
    "resolve_mtry",
]
