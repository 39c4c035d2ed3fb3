"""MCAR amputation: plant an exact count of missing cells in a covariate matrix.

The response is never masked. Masking is exact-count (floor(rate * n * p)
cells drawn without replacement) followed by a repair step that keeps at
least one observed cell in every row and column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import DataMatrix, MissMask


class AmputationError(ValueError):
    """Raised when the requested masking cannot satisfy its constraints."""


@dataclass
class AmputeConfig:
    """Missing-cell rate in [0, 1) plus the masking seed."""

    rate: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.rate < 1.0:
            raise AmputationError(f"rate must be in [0, 1), got {self.rate}")


def ampute_mcar(data: DataMatrix, config: AmputeConfig) -> MissMask:
    """Draw an MCAR mask with exactly floor(rate * n * p) missing cells.

    Cells are chosen uniformly without replacement. If a row or column
    ends up fully missing, one uniformly chosen cell in it is unmasked,
    so the realized count can fall below the target by at most n + p.
    """
    n, p = data.x.shape
    target = int(np.floor(config.rate * n * p))
    if target > n * p - max(n, p):
        raise AmputationError(
            f"rate {config.rate} leaves too few observed cells to keep every "
            f"row and column observed ({target} of {n * p} masked)"
        )
    rng = np.random.default_rng(config.seed)
    r = np.ones((n, p), dtype=bool)
    if target > 0:
        flat = rng.choice(n * p, size=target, replace=False)
        r.flat[flat] = False
    for i in np.flatnonzero(~r.any(axis=1)):
        r[i, rng.integers(p)] = True
    for j in np.flatnonzero(~r.any(axis=0)):
        r[rng.integers(n), j] = True
    return MissMask(r=r)


def masked_matrix(data: DataMatrix, mask: MissMask) -> np.ndarray:
    """Copy of the covariates with NaN at every missing cell."""
    mask.check_shape(data)
    x = np.array(data.x, copy=True)
    x[~mask.r] = np.nan
    return x
