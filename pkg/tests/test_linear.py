import numpy as np
import pytest

from imputelab.learners.linear import LinearModel, fit_ols, predict_ols
from imputelab.learners.tree import LearnerError


def test_exact_linear_recovery():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(50, 3))
    y = 1.0 + 2.0 * x[:, 0]
    model = fit_ols(x, y)
    assert np.allclose(model.coef, [1.0, 2.0, 0.0, 0.0], atol=1e-6)
    assert model.sigma2_hat < 1e-10


def test_residuals_orthogonal_to_design():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(200, 5))
    y = x @ rng.normal(size=5) + rng.normal(size=200)
    model = fit_ols(x, y)
    resid = y - predict_ols(model, x)
    design = np.column_stack([np.ones(200), x])
    assert np.max(np.abs(design.T @ resid)) < 1e-8


def test_sigma2_estimates_noise_variance():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(2000, 4))
    y = x @ np.array([1.0, -2.0, 0.5, 3.0]) + 1.5 * rng.normal(size=2000)
    model = fit_ols(x, y)
    assert abs(model.sigma2_hat - 2.25) / 2.25 < 0.15
    assert model.df == 2000 - 5


def test_needs_degrees_of_freedom():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(5, 4))
    with pytest.raises(LearnerError):
        fit_ols(x, np.ones(5))  # n == p + 1: no residual df


def test_gram_inverse_consistent():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(100, 3))
    y = rng.normal(size=100)
    model = fit_ols(x, y)
    d = np.column_stack([np.ones(100), x])
    gram = d.T @ d
    # the stored inverse is of the (slightly ridged) gram matrix
    assert np.allclose(model.gram_inv @ gram, np.eye(4), atol=1e-5)


def test_predict_shapes():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(30, 2))
    y = rng.normal(size=30)
    model = fit_ols(x, y)
    vec = predict_ols(model, x[:4])
    assert vec.shape == (4,)
    assert predict_ols(model, x[0]) == pytest.approx(vec[0])
    with pytest.raises(LearnerError):
        predict_ols(model, np.ones((3, 5)))


def test_rejects_non_finite():
    x = np.ones((10, 2))
    x[0, 0] = np.inf
    with pytest.raises(LearnerError):
        fit_ols(x, np.ones(10))
