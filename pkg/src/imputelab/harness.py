"""Experiment orchestration: config files, Monte-Carlo loops, CSV output.

Two experiment families share one flat sectioned key-value config format
(INI syntax, unknown sections or keys are errors):

empirical_accuracy    ampute -> impute -> NRMSE and k-fold CV-MSE per
                      (iterate x rate x imputer x predictor), plus a
                      complete-data "True" baseline per predictor and,
                      when the xgb predictor is configured, an
                      "internal" path trained directly on masked data.

synthetic_intervals   generate -> ampute -> impute -> fit forest ->
                      prediction intervals at fresh test points, with
                      complete-case control rows at rate 0.

Every stochastic stage draws from a stream derived from the master seed
and the iterate index, so a run is a pure function of (config file,
master_seed): rerunning yields byte-identical results.csv. Wall-clock
timings go to a separate timings.csv, outside the determinism contract.
"""

from __future__ import annotations

import configparser
import hashlib
import os
import sys
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .amputation import AmputeConfig, ampute_mcar, masked_matrix
from .dataset import DataMatrix, load_csv, make_folds
from .imputation import IMPUTE_METHODS, ImputeConfig, impute
from .intervals import (
    INTERVAL_KINDS,
    pi_emp_q,
    pi_gaussian,
    pi_ols,
    pi_qrf,
    residual_stats,
)
from .learners.boosting import SgbConfig, XgbConfig, fit_sgb, fit_xgb, predict_boost
from .learners.forest import ForestConfig, fit_forest, predict_forest
from .learners.linear import fit_ols, predict_ols
from .metrics import cv_mse, nrmse
from .seeding import derive_seed, rng_for
from .synthgen import (
    COVARIANCE_KINDS,
    MODEL_KINDS,
    CovarianceSpec,
    RegressionModel,
    SynthConfig,
    build_covariance,
    generate,
    regression_mean,
    sample_gaussian,
)

EXPERIMENT_KINDS = ("empirical_accuracy", "synthetic_intervals")
PREDICTOR_NAMES = ("forest", "sgb", "xgb", "linear")

RESULT_COLUMNS = (
    "experiment",
    "iterate",
    "missing_rate",
    "imputer",
    "predictor",
    "interval_kind",
    "nrmse",
    "cv_mse",
    "covered",
    "length",
    "seed",
)


class ConfigError(ValueError):
    """Raised for unparsable or invalid experiment configuration."""


def seed_derivation(master_seed: int, iterate: int, stage_tag: str) -> int:
    """Stage seed from (master_seed, iterate, stage_tag); see seeding."""
    return derive_seed(master_seed, iterate, stage_tag)


# Config schema: section -> key -> (converter name, default). A default of
# REQUIRED means the key must be present whenever its section applies.
REQUIRED = object()

_SCHEMA = {
    "experiment": {
        "kind": ("str", REQUIRED),
        "master_seed": ("int", 0),
        "mc_iterates": ("int", None),
        "output_dir": ("str", "results"),
        "level": ("float", 0.95),
        "k_folds": ("int", 5),
        "missing_rates": ("float_list", (0.1, 0.2, 0.3)),
        "imputers": ("str_list", ("mean", "miss_forest")),
        "predictors": ("str_list", ("forest",)),
        "interval_kinds": ("str_list", INTERVAL_KINDS),
        "test_points_per_iterate": ("int", 1),
        "xgb_internal": ("bool", True),
    },
    "data": {
        "path": ("str", REQUIRED),
        "response": ("str", REQUIRED),
        "delimiter": ("str", ","),
        "max_rows": ("int", None),
        "standardize": ("bool", False),
    },
    "synth": {
        "n": ("int", REQUIRED),
        "p": ("int", 10),
        "model": ("str", "linear"),
        "covariance": ("str", "scaled_identity"),
        "rho": ("float", None),
        "scale": ("float", 1.0),
        "target_sn": ("float", 1.0),
    },
    "forest": {
        "m_trees": ("int", 100),
        "mtry": ("int", None),
        "min_node_size": ("int", 5),
        "tune": ("bool", False),
    },
    "sgb": {
        "n_rounds": ("int", 300),
        "shrinkage": ("float", 0.05),
        "subsample": ("float", 0.5),
        "max_depth": ("int", 3),
        "min_node_size": ("int", 10),
    },
    "xgb": {
        "n_rounds": ("int", 300),
        "shrinkage": ("float", 0.05),
        "reg_lambda": ("float", 1.0),
        "max_depth": ("int", 4),
        "subsample": ("float", 0.8),
    },
    "impute": {
        "max_iter": ("int", 10),
        "pmm_donors": ("int", 5),
        "n_trees": ("int", None),
        "min_node_size": ("int", 5),
    },
}

_DEFAULT_ITERATES = {"empirical_accuracy": 50, "synthetic_intervals": 200}


def _convert(section, key, kind, raw):
    raw = raw.strip()
    try:
        if kind == "str":
            return raw
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if kind == "float_list":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if kind == "str_list":
            return tuple(v.strip() for v in raw.split(",") if v.strip())
    except ValueError:
        raise ConfigError(
            f"[{section}] {key}: cannot parse {raw!r} as {kind}"
        ) from None
    raise ConfigError(f"internal: unknown converter {kind}")


@dataclass
class ExperimentConfig:
    """Fully resolved experiment description."""

    kind: str
    master_seed: int
    mc_iterates: int
    output_dir: str
    level: float
    k_folds: int
    missing_rates: tuple[float, ...]
    imputers: tuple[str, ...]
    predictors: tuple[str, ...]
    interval_kinds: tuple[str, ...]
    test_points_per_iterate: int
    xgb_internal: bool
    data_source: str = "synth"  # "file" or "synth"
    data: dict = field(default_factory=dict)
    synth: dict = field(default_factory=dict)
    forest: ForestConfig = field(default_factory=ForestConfig)
    forest_tune: bool = False
    sgb: SgbConfig = field(default_factory=SgbConfig)
    xgb: XgbConfig = field(default_factory=XgbConfig)
    impute_options: dict = field(default_factory=dict)


def _validate(values: dict, present_sections: set) -> ExperimentConfig:
    exp = values["experiment"]
    kind = exp["kind"]
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(
            f"[experiment] kind must be one of {EXPERIMENT_KINDS}, got {kind!r}"
        )
    mc = exp["mc_iterates"]
    if mc is None:
        mc = _DEFAULT_ITERATES[kind]
    if mc < 1:
        raise ConfigError(f"[experiment] mc_iterates must be >= 1, got {mc}")
    if not 0.0 < exp["level"] < 1.0:
        raise ConfigError(f"[experiment] level must be in (0, 1), got {exp['level']}")
    if exp["k_folds"] < 2:
        raise ConfigError(f"[experiment] k_folds must be >= 2, got {exp['k_folds']}")
    if exp["test_points_per_iterate"] < 1:
        raise ConfigError("[experiment] test_points_per_iterate must be >= 1")
    rates = exp["missing_rates"]
    if not rates:
        raise ConfigError("[experiment] missing_rates must not be empty")
    for r in rates:
        if not 0.0 < r < 1.0:
            raise ConfigError(
                f"[experiment] missing rates must lie in (0, 1), got {r}"
            )
    if len(set(rates)) != len(rates):
        raise ConfigError("[experiment] missing_rates contains duplicates")
    for name in exp["imputers"]:
        if name not in IMPUTE_METHODS:
            raise ConfigError(
                f"[experiment] unknown imputer {name!r}; choose from {IMPUTE_METHODS}"
            )
    if not exp["imputers"]:
        raise ConfigError("[experiment] imputers must not be empty")
    for name in exp["predictors"]:
        if name not in PREDICTOR_NAMES:
            raise ConfigError(
                f"[experiment] unknown predictor {name!r}; choose from {PREDICTOR_NAMES}"
            )
    for name in exp["interval_kinds"]:
        if name not in INTERVAL_KINDS:
            raise ConfigError(
                f"[experiment] unknown interval kind {name!r}; "
                f"choose from {INTERVAL_KINDS}"
            )

    if kind == "empirical_accuracy":
        if not exp["predictors"]:
            raise ConfigError("[experiment] predictors must not be empty")
        if ("data" in present_sections) == ("synth" in present_sections):
            raise ConfigError(
                "empirical_accuracy needs exactly one of [data] or [synth]"
            )
    else:
        if "synth" not in present_sections:
            raise ConfigError("synthetic_intervals needs a [synth] section")
        if "data" in present_sections:
            raise ConfigError("synthetic_intervals does not take a [data] section")
        if not exp["interval_kinds"]:
            raise ConfigError("[experiment] interval_kinds must not be empty")

    data = values["data"]
    if "data" in present_sections:
        if not os.path.exists(data["path"]):
            raise ConfigError(f"[data] path {data['path']!r} does not exist")
        if data["max_rows"] is not None and data["max_rows"] < 1:
            raise ConfigError("[data] max_rows must be >= 1")

    synth = values["synth"]
    if "synth" in present_sections:
        if synth["n"] < 1:
            raise ConfigError(f"[synth] n must be >= 1, got {synth['n']}")
        if synth["model"] not in MODEL_KINDS:
            raise ConfigError(
                f"[synth] model must be one of {MODEL_KINDS}, got {synth['model']!r}"
            )
        if synth["covariance"] not in COVARIANCE_KINDS:
            raise ConfigError(
                f"[synth] covariance must be one of {COVARIANCE_KINDS}, "
                f"got {synth['covariance']!r}"
            )
        if synth["target_sn"] <= 0:
            raise ConfigError("[synth] target_sn must be positive")
        # Construct the synth pieces now so bad combinations fail at parse time.
        try:
            build_covariance(CovarianceSpec(
                kind=synth["covariance"], p=synth["p"], rho=synth["rho"],
                scale=synth["scale"],
            ))
            RegressionModel(kind=synth["model"], p=synth["p"])
        except ValueError as exc:
            raise ConfigError(f"[synth] {exc}") from None

    fo = values["forest"]
    try:
        forest_cfg = ForestConfig(
            m_trees=fo["m_trees"], mtry=fo["mtry"], min_node_size=fo["min_node_size"]
        )
        sgb_cfg = SgbConfig(**{k: v for k, v in values["sgb"].items()})
        xgb_cfg = XgbConfig(**{k: v for k, v in values["xgb"].items()})
        ImputeConfig(method="mean", **{
            k: v for k, v in values["impute"].items()
        })
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    return ExperimentConfig(
        kind=kind,
        master_seed=exp["master_seed"],
        mc_iterates=mc,
        output_dir=exp["output_dir"],
        level=exp["level"],
        k_folds=exp["k_folds"],
        missing_rates=rates,
        imputers=exp["imputers"],
        predictors=exp["predictors"],
        interval_kinds=exp["interval_kinds"],
        test_points_per_iterate=exp["test_points_per_iterate"],
        xgb_internal=exp["xgb_internal"],
        data_source="file" if "data" in present_sections else "synth",
        data=data,
        synth=synth,
        forest=forest_cfg,
        forest_tune=fo["tune"],
        sgb=sgb_cfg,
        xgb=xgb_cfg,
        impute_options=dict(values["impute"]),
    )


def parse_config(path: str) -> ExperimentConfig:
    """Parse and validate an experiment config file.

    Unknown sections, unknown keys, missing required keys, unparsable
    values, and invalid combinations all raise :class:`ConfigError`.
    """
    if not os.path.exists(path):
        raise ConfigError(f"config file {path!r} does not exist")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if "experiment" not in parser:
        raise ConfigError(f"{path}: missing required [experiment] section")
    present = set(parser.sections())
    for section in present:
        if section not in _SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
    values: dict[str, dict] = {}
    for section, keys in _SCHEMA.items():
        values[section] = {}
        raw_section = parser[section] if section in parser else {}
        for key in raw_section:
            if key not in keys:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
        for key, (conv, default) in keys.items():
            if section in parser and key in parser[section]:
                values[section][key] = _convert(section, key, conv, parser[section][key])
            elif default is REQUIRED:
                if section in present:
                    raise ConfigError(
                        f"{path}: [{section}] is missing required key {key!r}"
                    )
                values[section][key] = None
            else:
                values[section][key] = default
    return _validate(values, present)


def config_echo(config: ExperimentConfig) -> str:
    """Canonical text rendering of the resolved configuration.

    The echo is itself a valid config file: parsing it back yields the
    same resolved experiment. Unset optional keys are omitted rather
    than printed as None.
    """
    lines = ["[experiment]"]

    def put(key, value):
        if value is None:
            return
        lines.append(f"{key} = {value}")

    put("kind", config.kind)
    put("master_seed", config.master_seed)
    put("mc_iterates", config.mc_iterates)
    put("output_dir", config.output_dir)
    put("level", repr(config.level))
    put("k_folds", config.k_folds)
    put("missing_rates", ", ".join(repr(r) for r in config.missing_rates))
    put("imputers", ", ".join(config.imputers))
    put("predictors", ", ".join(config.predictors))
    put("interval_kinds", ", ".join(config.interval_kinds))
    put("test_points_per_iterate", config.test_points_per_iterate)
    put("xgb_internal", config.xgb_internal)
    if config.data_source == "file":
        lines.append("")
        lines.append("[data]")
        for key in _SCHEMA["data"]:
            put(key, config.data[key])
    else:
        lines.append("")
        lines.append("[synth]")
        for key in _SCHEMA["synth"]:
            put(key, config.synth[key])
    lines.append("")
    lines.append("[forest]")
    put("m_trees", config.forest.m_trees)
    put("mtry", config.forest.mtry)
    put("min_node_size", config.forest.min_node_size)
    put("tune", config.forest_tune)
    lines.append("")
    lines.append("[sgb]")
    put("n_rounds", config.sgb.n_rounds)
    put("shrinkage", repr(config.sgb.shrinkage))
    put("subsample", repr(config.sgb.subsample))
    put("max_depth", config.sgb.max_depth)
    put("min_node_size", config.sgb.min_node_size)
    lines.append("")
    lines.append("[xgb]")
    put("n_rounds", config.xgb.n_rounds)
    put("shrinkage", repr(config.xgb.shrinkage))
    put("reg_lambda", repr(config.xgb.reg_lambda))
    put("max_depth", config.xgb.max_depth)
    put("subsample", repr(config.xgb.subsample))
    lines.append("")
    lines.append("[impute]")
    for key, value in config.impute_options.items():
        put(key, value)
    return "\n".join(lines) + "\n"


@dataclass
class ResultRow:
    """One scored combination; empty fields stay None."""

    experiment: str
    iterate: int
    missing_rate: float
    imputer: str
    predictor: str | None
    interval_kind: str | None
    nrmse: float | None
    cv_mse: float | None
    covered: float | None
    length: float | None
    seed: int

    def as_csv(self) -> list[str]:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, float):
                return repr(v)
            return str(v)

        return [
            self.experiment,
            str(self.iterate),
            repr(float(self.missing_rate)),
            self.imputer,
            fmt(self.predictor),
            fmt(self.interval_kind),
            fmt(self.nrmse),
            fmt(self.cv_mse),
            fmt(self.covered),
            fmt(self.length),
            str(self.seed),
        ]


def _load_dataset(config: ExperimentConfig) -> DataMatrix:
    if config.data_source == "file":
        data = load_csv(
            config.data["path"],
            response=config.data["response"],
            delimiter=config.data["delimiter"],
            max_rows=config.data["max_rows"],
        )
        if config.data["standardize"]:
            mu = data.x.mean(axis=0)
            sd = data.x.std(axis=0, ddof=1)
            sd[sd == 0.0] = 1.0
            data = DataMatrix(
                x=(data.x - mu) / sd, y=data.y, col_names=list(data.col_names)
            )
        return data
    scfg = _synth_config(config, seed=derive_seed(config.master_seed, 0, "dataset"))
    data, _ = generate(scfg)
    return data


def _synth_config(config: ExperimentConfig, seed: int, n: int | None = None) -> SynthConfig:
    s = config.synth
    return SynthConfig(
        n=n if n is not None else s["n"],
        p=s["p"],
        cov=CovarianceSpec(kind=s["covariance"], p=s["p"], rho=s["rho"], scale=s["scale"]),
        model=RegressionModel(kind=s["model"], p=s["p"]),
        target_sn=s["target_sn"],
        seed=seed,
    )


def _impute_config(config: ExperimentConfig, method: str, seed: int) -> ImputeConfig:
    return ImputeConfig(
        method=method,
        seed=seed,
        sgb=config.sgb,
        xgb=config.xgb,
        **config.impute_options,
    )


def _predictor_fit_factory(config: ExperimentConfig, name: str, seed: int):
    """Build cv_mse's fit argument for a named predictor.

    Each fold's model gets its own derived seed, so CV is deterministic
    in (seed, fold) no matter the evaluation order.
    """
    if name == "forest":

        def fit(xt, yt, fold):
            model = fit_forest(
                xt, yt, replace(config.forest, seed=derive_seed(seed, fold, "fold"))
            )
            return lambda xq: predict_forest(model, xq)

    elif name == "sgb":

        def fit(xt, yt, fold):
            model = fit_sgb(
                xt, yt, replace(config.sgb, seed=derive_seed(seed, fold, "fold"))
            )
            return lambda xq: predict_boost(model, xq)

    elif name == "xgb":

        def fit(xt, yt, fold):
            model = fit_xgb(
                xt, yt, replace(config.xgb, seed=derive_seed(seed, fold, "fold"))
            )
            return lambda xq: predict_boost(model, xq)

    elif name == "linear":

        def fit(xt, yt, fold):
            model = fit_ols(xt, yt)
            return lambda xq: predict_ols(model, xq)

    else:
        raise ConfigError(f"unknown predictor {name!r}")
    return fit


def tune_forest(
    x: np.ndarray, y: np.ndarray, config: ExperimentConfig
) -> tuple[ForestConfig, dict]:
    """Small mtry grid for the forest predictor, scored by k-fold CV-MSE
    on the complete data (run before any masking). Ties prefer the
    smaller mtry."""
    p = x.shape[1]
    candidates = sorted({max(1, p // 4), max(1, p // 3), max(1, p // 2)})
    folds = make_folds(
        x.shape[0], config.k_folds, derive_seed(config.master_seed, 0, "tune-folds")
    )
    best_mtry, best_score = None, np.inf
    scores = {}
    for mtry in candidates:
        cfg = replace(config.forest, mtry=mtry)
        trial = replace(config, forest=cfg)
        score = cv_mse(
            x,
            y,
            folds,
            _predictor_fit_factory(
                trial, "forest", derive_seed(config.master_seed, 0, f"tune:{mtry}")
            ),
        )
        scores[mtry] = score
        if score < best_score:
            best_mtry, best_score = mtry, score
    return replace(config.forest, mtry=best_mtry), scores


def run_empirical_accuracy(
    config: ExperimentConfig, data: DataMatrix | None = None
) -> tuple[list[ResultRow], list[tuple[int, float]]]:
    """NRMSE and post-imputation CV-MSE over Monte-Carlo maskings.

    Returns (rows, timings); timings are (iterate, wall_ms) pairs and are
    not part of the deterministic output.
    """
    if config.kind != "empirical_accuracy":
        raise ConfigError(f"config is for {config.kind}, not empirical_accuracy")
    if data is None:
        data = _load_dataset(config)
    cfg = config
    if config.forest_tune:
        tuned, _ = tune_forest(data.x, data.y, config)
        cfg = replace(config, forest=tuned)
    rows: list[ResultRow] = []
    timings: list[tuple[int, float]] = []
    master = cfg.master_seed
    exp = cfg.kind

    base_seed = derive_seed(master, -1, "true-baseline")
    folds_true = make_folds(data.n, cfg.k_folds, derive_seed(base_seed, 0, "folds"))
    for predictor in cfg.predictors:
        score = cv_mse(
            data.x,
            data.y,
            folds_true,
            _predictor_fit_factory(cfg, predictor, derive_seed(base_seed, 0, predictor)),
        )
        rows.append(
            ResultRow(
                experiment=exp,
                iterate=-1,
                missing_rate=0.0,
                imputer="none",
                predictor=predictor,
                interval_kind=None,
                nrmse=None,
                cv_mse=score,
                covered=None,
                length=None,
                seed=base_seed,
            )
        )

    for it in range(cfg.mc_iterates):
        started = time.perf_counter()
        rows.extend(_empirical_iterate(cfg, data, it))
        timings.append((it, (time.perf_counter() - started) * 1000.0))
    return rows, timings


def _empirical_iterate(
    config: ExperimentConfig, data: DataMatrix, it: int
) -> list[ResultRow]:
    """All rows of one empirical iterate; pure in (config, data, iterate)."""
    rows: list[ResultRow] = []
    it_seed = derive_seed(config.master_seed, it, "iterate")
    folds = make_folds(data.n, config.k_folds, derive_seed(it_seed, 0, "folds"))
    for rate in config.missing_rates:
        mask = ampute_mcar(
            data, AmputeConfig(rate=rate, seed=derive_seed(it_seed, 0, f"ampute:{rate}"))
        )
        for imp_name in config.imputers:
            result = impute(
                data,
                mask,
                _impute_config(
                    config, imp_name, derive_seed(it_seed, 0, f"impute:{rate}:{imp_name}")
                ),
            )
            score_nrmse = nrmse(result.completed, data, mask)
            for predictor in config.predictors:
                score = cv_mse(
                    result.completed,
                    data.y,
                    folds,
                    _predictor_fit_factory(
                        config,
                        predictor,
                        derive_seed(it_seed, 0, f"cv:{rate}:{imp_name}:{predictor}"),
                    ),
                )
                rows.append(
                    ResultRow(
                        experiment=config.kind,
                        iterate=it,
                        missing_rate=rate,
                        imputer=imp_name,
                        predictor=predictor,
                        interval_kind=None,
                        nrmse=score_nrmse,
                        cv_mse=score,
                        covered=None,
                        length=None,
                        seed=it_seed,
                    )
                )
        if "xgb" in config.predictors and config.xgb_internal:
            x_masked = masked_matrix(data, mask)
            score = cv_mse(
                x_masked,
                data.y,
                folds,
                _predictor_fit_factory(
                    config, "xgb", derive_seed(it_seed, 0, f"cv:{rate}:internal:xgb")
                ),
            )
            rows.append(
                ResultRow(
                    experiment=config.kind,
                    iterate=it,
                    missing_rate=rate,
                    imputer="internal",
                    predictor="xgb",
                    interval_kind=None,
                    nrmse=None,
                    cv_mse=score,
                    covered=None,
                    length=None,
                    seed=it_seed,
                )
            )
    return rows


def run_synthetic_intervals(
    config: ExperimentConfig,
) -> tuple[list[ResultRow], list[tuple[int, float]]]:
    """Interval coverage and length over fresh synthetic draws.

    Per iterate: draw a dataset and fresh test pairs, then for the
    complete data (rate 0) and each (rate x imputer) completion, fit the
    forest, build every configured interval kind at each test point, and
    record mean coverage and mean length across the test points.
    """
    if config.kind != "synthetic_intervals":
        raise ConfigError(f"config is for {config.kind}, not synthetic_intervals")
    rows: list[ResultRow] = []
    timings: list[tuple[int, float]] = []
    for it in range(config.mc_iterates):
        started = time.perf_counter()
        rows.extend(_intervals_iterate(config, it))
        timings.append((it, (time.perf_counter() - started) * 1000.0))
    return rows, timings


def _intervals_iterate(config: ExperimentConfig, it: int) -> list[ResultRow]:
    """All rows of one intervals iterate; pure in (config, iterate)."""
    rows: list[ResultRow] = []
    it_seed = derive_seed(config.master_seed, it, "iterate")
    scfg = _synth_config(config, seed=derive_seed(it_seed, 0, "generate"))
    data, sigma2 = generate(scfg)
    sigma_mat = build_covariance(scfg.cov)
    tp = config.test_points_per_iterate
    x_test = sample_gaussian(sigma_mat, tp, derive_seed(it_seed, 0, "test-x"))
    y_test = regression_mean(scfg.model, x_test) + rng_for(
        it_seed, 0, "test-noise"
    ).standard_normal(tp) * np.sqrt(sigma2)

    completions: list[tuple[float, str, np.ndarray, float | None]] = [
        (0.0, "none", data.x, None)
    ]
    for rate in config.missing_rates:
        mask = ampute_mcar(
            data, AmputeConfig(rate=rate, seed=derive_seed(it_seed, 0, f"ampute:{rate}"))
        )
        for imp_name in config.imputers:
            result = impute(
                data,
                mask,
                _impute_config(
                    config, imp_name, derive_seed(it_seed, 0, f"impute:{rate}:{imp_name}")
                ),
            )
            completions.append(
                (rate, imp_name, result.completed, nrmse(result.completed, data, mask))
            )

    for rate, imp_name, x_completed, score_nrmse in completions:
        forest = fit_forest(
            x_completed,
            data.y,
            replace(config.forest, seed=derive_seed(it_seed, 0, f"forest:{rate}:{imp_name}")),
        )
        stats = residual_stats(forest, x_completed, data.y)
        linear = fit_ols(x_completed, data.y) if "ols" in config.interval_kinds else None
        for kind in config.interval_kinds:
            covered = np.empty(tp)
            lengths = np.empty(tp)
            for q in range(tp):
                xq = x_test[q]
                if kind == "qrf":
                    pi = pi_qrf(forest, data.y, xq, config.level)
                elif kind == "emp_q":
                    pi = pi_emp_q(forest, stats, xq, config.level)
                elif kind == "res_var":
                    pi = pi_gaussian(forest, stats, xq, config.level, "simple")
                elif kind == "m_correct":
                    pi = pi_gaussian(forest, stats, xq, config.level, "mcorrect")
                elif kind == "weighted":
                    pi = pi_gaussian(forest, stats, xq, config.level, "weighted")
                else:
                    pi = pi_ols(linear, xq, config.level)
                covered[q] = 1.0 if pi.covers(float(y_test[q])) else 0.0
                lengths[q] = pi.length
            rows.append(
                ResultRow(
                    experiment=config.kind,
                    iterate=it,
                    missing_rate=rate,
                    imputer=imp_name,
                    predictor=None,
                    interval_kind=kind,
                    nrmse=score_nrmse,
                    cv_mse=None,
                    covered=float(covered.mean()),
                    length=float(lengths.mean()),
                    seed=it_seed,
                )
            )
    return rows


def run_experiment(
    config: ExperimentConfig,
) -> tuple[list[ResultRow], list[tuple[int, float]]]:
    """Dispatch on the configured experiment kind."""
    if config.kind == "empirical_accuracy":
        return run_empirical_accuracy(config)
    return run_synthetic_intervals(config)


def write_results(rows: list[ResultRow], path: str) -> None:
    """results.csv: header plus one line per row, floats via repr."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(RESULT_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(row.as_csv()) + "\n")


def write_timings(timings: list[tuple[int, float]], path: str, experiment: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("experiment,iterate,wall_time_ms\n")
        for it, ms in timings:
            fh.write(f"{experiment},{it},{ms:.3f}\n")


def write_manifest(config: ExperimentConfig, rows: list[ResultRow], path: str) -> None:
    """Run provenance: versions, seed, row count, results digest, config."""
    import scipy

    from . import __version__

    results_blob = (",".join(RESULT_COLUMNS) + "\n") + "".join(
        ",".join(r.as_csv()) + "\n" for r in rows
    )
    digest = hashlib.sha256(results_blob.encode("utf-8")).hexdigest()
    with open(path, "w") as fh:
        fh.write("imputelab run manifest\n")
        fh.write("======================\n")
        fh.write(f"experiment = {config.kind}\n")
        fh.write(f"master_seed = {config.master_seed}\n")
        fh.write(f"mc_iterates = {config.mc_iterates}\n")
        fh.write(f"rows = {len(rows)}\n")
        fh.write(f"results_sha256 = {digest}\n")
        fh.write(f"imputelab = {__version__}\n")
        fh.write(f"python = {sys.version.split()[0]}\n")
        fh.write(f"numpy = {np.__version__}\n")
        fh.write(f"scipy = {scipy.__version__}\n")
        fh.write("\n[resolved config]\n")
        fh.write(config_echo(config))


def run_to_directory(config: ExperimentConfig, out_dir: str | None = None) -> str:
    """Run the experiment and write results.csv, manifest.txt, timings.csv.

    Returns the output directory used.
    """
    target = out_dir if out_dir is not None else config.output_dir
    os.makedirs(target, exist_ok=True)
    rows, timings = run_experiment(config)
    write_results(rows, os.path.join(target, "results.csv"))
    write_manifest(config, rows, os.path.join(target, "manifest.txt"))
    write_timings(timings, os.path.join(target, "timings.csv"), config.kind)
    return target
