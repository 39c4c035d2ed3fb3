import numpy as np
import pytest

from imputelab import DataMatrix, default_beta0


@pytest.fixture
def linear_data():
    """Small complete linear dataset with the default coefficients."""

    def make(n=80, p=10, noise=1.0, seed=0):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(n, p))
        beta = default_beta0(p) if p == 10 else rng.normal(size=p)
        y = x @ beta + noise * rng.normal(size=n)
        return DataMatrix(x=x, y=y)

    return make
