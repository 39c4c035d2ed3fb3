"""imputelab: missing-covariate imputation and its downstream effects.

A numpy/scipy toolkit for studying how the accuracy of imputed
covariates relates to prediction accuracy and to the validity of
forest-based prediction intervals: synthetic Gaussian regression data,
MCAR amputation, seven single-imputation methods, from-scratch tree
ensembles, four interval families, and a deterministic Monte-Carlo
experiment harness.
"""

__version__ = "0.1.0"

from .amputation import AmputationError, AmputeConfig, ampute_mcar, masked_matrix
from .dataset import (
    DataMatrix,
    DatasetError,
    FoldAssignment,
    MissMask,
    load_csv,
    make_folds,
    write_csv,
)
from .imputation import (
    IMPUTE_METHODS,
    ImputationError,
    ImputeConfig,
    ImputeResult,
    impute,
    impute_iterative,
    impute_mean,
    initialize_fill,
    mice_norm,
    mice_pmm,
    mice_rf,
    miss_forest,
)
from .intervals import (
    INTERVAL_KINDS,
    IntervalError,
    PredictionInterval,
    ResidualStats,
    normal_quantile,
    pi_emp_q,
    pi_gaussian,
    pi_ols,
    pi_qrf,
    quantile_type1,
    residual_stats,
)
from .learners import (
    BoostModel,
    ForestConfig,
    ForestModel,
    LearnerError,
    LinearModel,
    SgbConfig,
    TreeConfig,
    TreeModel,
    XgbConfig,
    fit_forest,
    fit_ols,
    fit_sgb,
    fit_tree,
    fit_xgb,
    oob_predict,
    oob_tree_stats,
    predict_boost,
    predict_forest,
    predict_ols,
    qrf_weights,
)
from .metrics import (
    CoverageRecord,
    DegenerateDenominator,
    MetricError,
    coverage_summary,
    cv_mse,
    nrmse,
)
from .seeding import derive_seed, rng_for
from .synthgen import (
    COVARIANCE_KINDS,
    MODEL_KINDS,
    CovarianceSpec,
    RegressionModel,
    SynthConfig,
    SynthError,
    build_covariance,
    calibrate_noise,
    default_beta0,
    generate,
    regression_mean,
    sample_gaussian,
)

__all__ = [
    "AmputationError",
    "AmputeConfig",
    "BoostModel",
    "COVARIANCE_KINDS",
    "CoverageRecord",
    "CovarianceSpec",
    "DataMatrix",
    "DatasetError",
    "DegenerateDenominator",
    "FoldAssignment",
    "ForestConfig",
    "ForestModel",
    "IMPUTE_METHODS",
    "INTERVAL_KINDS",
    "ImputationError",
    "ImputeConfig",
    "ImputeResult",
    "IntervalError",
    "LearnerError",
    "LinearModel",
    "MODEL_KINDS",
    "MetricError",
    "MissMask",
    "PredictionInterval",
    "RegressionModel",
    "ResidualStats",
    "SgbConfig",
    "SynthConfig",
    "SynthError",
    "TreeConfig",
    "TreeModel",
    "XgbConfig",
    "ampute_mcar",
    "build_covariance",
    "calibrate_noise",
    "coverage_summary",
    "cv_mse",
    "default_beta0",
    "derive_seed",
    "fit_forest",
    "fit_ols",
    "fit_sgb",
    "fit_tree",
    "fit_xgb",
    "generate",
    "impute",
    "impute_iterative",
    "impute_mean",
    "initialize_fill",
    "load_csv",
    "make_folds",
    "masked_matrix",
    "mice_norm",
    "mice_pmm",
    "mice_rf",
    "miss_forest",
    "normal_quantile",
    "nrmse",
    "oob_predict",
    "oob_tree_stats",
    "pi_emp_q",
    "pi_gaussian",
    "pi_ols",
    "pi_qrf",
    "predict_boost",
    "predict_forest",
    "predict_ols",
    "qrf_weights",
    "quantile_type1",
    "regression_mean",
    "residual_stats",
    "rng_for",
    "sample_gaussian",
    "write_csv",
]
