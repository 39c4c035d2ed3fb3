"""Ordinary least squares with a ridged Gram inverse for leverage.

Coefficients come from a plain least-squares solve, so residuals are
orthogonal to the design columns to machine precision. Only the stored
Gram inverse (used for interval leverage) carries a tiny ridge (1e-8
scaled to the trace) so collinear designs stay invertible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tree import LearnerError

_RIDGE = 1e-8


@dataclass
class LinearModel:
    """Intercept-first coefficients plus what the t-interval needs."""

    coef: np.ndarray
    sigma2_hat: float
    gram_inv: np.ndarray = field(repr=False)
    n: int = 0
    df: int = 0


def _design(x: np.ndarray) -> np.ndarray:
    return np.hstack([np.ones((x.shape[0], 1)), x])


def fit_ols(x: np.ndarray, y: np.ndarray) -> LinearModel:
    """Least-squares fit of y on [1, x].

    ``sigma2_hat`` is RSS / (n - p - 1). Requires n > p + 1 so the
    variance estimate has at least one degree of freedom.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2:
        raise LearnerError(f"x must be 2-d, got ndim={x.ndim}")
    n, p = x.shape
    if y.shape != (n,):
        raise LearnerError(f"y must have shape ({n},), got {y.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise LearnerError("inputs contain non-finite values")
    q = p + 1
    if n <= q:
        raise LearnerError(f"need n > p + 1 for a variance estimate, got n={n}, p={p}")
    d = _design(x)
    coef = np.linalg.lstsq(d, y, rcond=None)[0]
    resid = y - d @ coef
    gram = d.T @ d
    gram += _RIDGE * (np.trace(gram) / q + 1.0) * np.eye(q)
    df = n - q
    return LinearModel(
        coef=coef,
        sigma2_hat=float(resid @ resid) / df,
        gram_inv=np.linalg.inv(gram),
        n=n,
        df=df,
    )


def predict_ols(model: LinearModel, x: np.ndarray) -> np.ndarray | float:
    """Fitted mean at one covariate vector or each row of a matrix."""
    xa = np.asarray(x, dtype=np.float64)
    single = xa.ndim == 1
    xm = xa[None, :] if single else xa
    if xm.shape[1] != model.coef.shape[0] - 1:
        raise LearnerError(
            f"x has {xm.shape[1]} columns, model expects {model.coef.shape[0] - 1}"
        )
    vals = model.coef[0] + xm @ model.coef[1:]
    return float(vals[0]) if single else vals
