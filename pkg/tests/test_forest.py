import numpy as np
import pytest

from imputelab.learners.forest import (
    ForestConfig,
    fit_forest,
    oob_predict,
    oob_tree_stats,
    predict_forest,
    qrf_weights,
)
from imputelab.learners.tree import LearnerError


def _linear(n, p=4, noise=0.1, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, p))
    y = 3.0 * x[:, 0] - x[:, 1] + noise * rng.normal(size=n)
    return x, y


def test_inbag_rows_sum_to_n():
    x, y = _linear(37)
    model = fit_forest(x, y, ForestConfig(m_trees=12, seed=1))
    assert model.inbag.shape == (12, 37)
    assert np.all(model.inbag.sum(axis=1) == 37)


def test_predict_is_mean_over_trees():
    x, y = _linear(50, seed=1)
    model = fit_forest(x, y, ForestConfig(m_trees=9, seed=2))
    rng = np.random.default_rng(3)
    xq = rng.normal(size=(20, 4))
    manual = np.mean([t.predict(xq) for t in model.trees], axis=0)
    assert np.allclose(predict_forest(model, xq), manual, atol=1e-12)
    # single-vector form returns a float
    assert predict_forest(model, xq[0]) == pytest.approx(manual[0])


def test_in_sample_mse_beats_variance():
    x, y = _linear(500, noise=0.1, seed=4)
    model = fit_forest(x, y, ForestConfig(m_trees=50, seed=5))
    mse = float(np.mean((predict_forest(model, x) - y) ** 2))
    assert mse < 0.25 * float(np.var(y))


def test_oob_validity_matches_inbag():
    x, y = _linear(25, seed=6)
    model = fit_forest(x, y, ForestConfig(m_trees=3, seed=7))
    values, valid = oob_predict(model, x)
    expect_valid = (model.inbag == 0).any(axis=0)
    assert np.array_equal(valid, expect_valid)
    assert np.all(np.isnan(values[~valid]))
    assert np.all(np.isfinite(values[valid]))


def test_oob_tree_stats_match_direct_recomputation():
    x, y = _linear(40, seed=8)
    model = fit_forest(x, y, ForestConfig(m_trees=6, seed=9))
    counts, psum, psumsq = oob_tree_stats(model, x)
    c2 = np.zeros(40, dtype=int)
    s2 = np.zeros(40)
    q2 = np.zeros(40)
    for t, tree in enumerate(model.trees):
        for i in range(40):
            if model.inbag[t, i] == 0:
                p = tree.predict(x[i])
                c2[i] += 1
                s2[i] += p
                q2[i] += p * p
    assert np.array_equal(counts, c2)
    assert np.allclose(psum, s2, atol=1e-12)
    assert np.allclose(psumsq, q2, atol=1e-12)


def test_oob_error_shrinks_with_sample_size():
    def oob_mse(n, seed):
        x, y = _linear(n, noise=0.0, seed=seed)
        model = fit_forest(x, y, ForestConfig(m_trees=30, seed=seed + 100))
        values, valid = oob_predict(model, x)
        return float(np.mean((values[valid] - y[valid]) ** 2))

    small = np.median([oob_mse(100, s) for s in range(10)])
    large = np.median([oob_mse(600, s) for s in range(10)])
    assert large < small


def test_qrf_weights_single_leaf_equal_inbag_fraction():
    # one tree grown to a single leaf: weight of row i is its bootstrap
    # multiplicity over n
    x, y = _linear(15, seed=10)
    model = fit_forest(x, y, ForestConfig(m_trees=1, min_node_size=15, seed=11))
    assert model.trees[0].n_nodes == 1
    w = qrf_weights(model, x[3])
    assert np.allclose(w, model.inbag[0] / 15.0, atol=1e-15)


def test_qrf_weights_are_a_distribution():
    x, y = _linear(60, seed=12)
    model = fit_forest(x, y, ForestConfig(m_trees=20, seed=13))
    rng = np.random.default_rng(14)
    for _ in range(10):
        w = qrf_weights(model, rng.normal(size=4))
        assert np.all(w >= 0)
        assert abs(w.sum() - 1.0) < 1e-12


def test_qrf_weights_reproduce_forest_prediction():
    x, y = _linear(80, seed=15)
    model = fit_forest(x, y, ForestConfig(m_trees=25, seed=16))
    rng = np.random.default_rng(17)
    for _ in range(20):
        xq = rng.normal(size=4)
        w = qrf_weights(model, xq)
        assert abs(float(w @ y) - predict_forest(model, xq)) < 1e-10


def test_forest_deterministic_in_seed():
    x, y = _linear(45, seed=18)
    xq = np.random.default_rng(19).normal(size=(10, 4))
    a = fit_forest(x, y, ForestConfig(m_trees=8, seed=20))
    b = fit_forest(x, y, ForestConfig(m_trees=8, seed=20))
    c = fit_forest(x, y, ForestConfig(m_trees=8, seed=21))
    assert np.array_equal(predict_forest(a, xq), predict_forest(b, xq))
    assert not np.array_equal(predict_forest(a, xq), predict_forest(c, xq))


def test_forest_input_validation():
    with pytest.raises(LearnerError):
        ForestConfig(m_trees=0)
    x, y = _linear(10)
    with pytest.raises(LearnerError):
        fit_forest(x, y[:5], ForestConfig(m_trees=2))
    model = fit_forest(x, y, ForestConfig(m_trees=2))
    with pytest.raises(LearnerError):
        oob_tree_stats(model, x[:5])
    with pytest.raises(LearnerError):
        qrf_weights(model, x)  # matrix, not a single query vector
