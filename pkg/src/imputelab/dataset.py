"""Tabular regression data: containers, CSV ingestion, CV fold assignment.

All matrices are dense float64. Containers freeze their arrays after
validation so downstream stages can share them without defensive copies.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np


class DatasetError(ValueError):
    """Raised for malformed files or invalid container contents."""


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, copy=True)
    out.flags.writeable = False
    return out


@dataclass
class DataMatrix:
    """Covariate matrix, response vector, and column names.

    ``x`` is n x p float64 with finite entries, ``y`` has length n,
    ``col_names`` has length p. Arrays are copied and made read-only.
    """

    x: np.ndarray
    y: np.ndarray
    col_names: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim != 2:
            raise DatasetError(f"x must be 2-d, got ndim={x.ndim}")
        n, p = x.shape
        if n < 1 or p < 1:
            raise DatasetError(f"x must be non-empty, got shape {x.shape}")
        if y.shape != (n,):
            raise DatasetError(f"y must have shape ({n},), got {y.shape}")
        if not np.all(np.isfinite(x)):
            i, j = np.argwhere(~np.isfinite(x))[0]
            raise DatasetError(f"non-finite covariate at row {i}, column {j}")
        if not np.all(np.isfinite(y)):
            i = int(np.flatnonzero(~np.isfinite(y))[0])
            raise DatasetError(f"non-finite response at row {i}")
        if not self.col_names:
            self.col_names = [f"x{j}" for j in range(p)]
        if len(self.col_names) != p:
            raise DatasetError(
                f"col_names has {len(self.col_names)} entries for p={p}"
            )
        self.x = _frozen(x)
        self.y = _frozen(y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


@dataclass
class MissMask:
    """Response-indicator matrix over covariate cells.

    ``r`` is boolean n x p; True marks an observed cell, False a missing
    one. Every row and every column keeps at least one observed cell.
    """

    r: np.ndarray

    def __post_init__(self) -> None:
        r = np.asarray(self.r)
        if r.dtype != np.bool_:
            raise DatasetError(f"mask must be boolean, got dtype {r.dtype}")
        if r.ndim != 2 or r.shape[0] < 1 or r.shape[1] < 1:
            raise DatasetError(f"mask must be non-empty 2-d, got shape {r.shape}")
        row_obs = r.any(axis=1)
        if not row_obs.all():
            raise DatasetError(
                f"row {int(np.flatnonzero(~row_obs)[0])} is fully missing"
            )
        col_obs = r.any(axis=0)
        if not col_obs.all():
            raise DatasetError(
                f"column {int(np.flatnonzero(~col_obs)[0])} is fully missing"
            )
        self.r = _frozen(r)

    @property
    def n_missing(self) -> int:
        return int((~self.r).sum())

    def check_shape(self, data: DataMatrix) -> None:
        if self.r.shape != data.x.shape:
            raise DatasetError(
                f"mask shape {self.r.shape} does not match data {data.x.shape}"
            )


@dataclass
class FoldAssignment:
    """Maps each row to one of k cross-validation folds."""

    fold_of: np.ndarray
    k: int

    def __post_init__(self) -> None:
        fold_of = np.asarray(self.fold_of, dtype=np.int64)
        if fold_of.ndim != 1:
            raise DatasetError("fold_of must be 1-d")
        if self.k < 2:
            raise DatasetError(f"k must be >= 2, got {self.k}")
        present = np.unique(fold_of)
        if present.size != self.k or present[0] != 0 or present[-1] != self.k - 1:
            raise DatasetError(f"fold labels must cover 0..{self.k - 1} exactly")
        self.fold_of = _frozen(fold_of)

    def test_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)


def make_folds(n: int, k: int, seed: int) -> FoldAssignment:
    """Random balanced fold assignment: sizes differ by at most one.

    Deterministic in ``seed``. Errors if ``k > n`` or ``k < 2``.
    """
    if k < 2:
        raise DatasetError(f"k must be >= 2, got {k}")
    if k > n:
        raise DatasetError(f"k={k} exceeds n={n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    fold_of = np.empty(n, dtype=np.int64)
    base, extra = divmod(n, k)
    start = 0
    for f in range(k):
        size = base + (1 if f < extra else 0)
        fold_of[perm[start : start + size]] = f
        start += size
    return FoldAssignment(fold_of=fold_of, k=k)


def load_csv(
    path: str,
    response: str,
    delimiter: str = ",",
    max_rows: int | None = None,
) -> DataMatrix:
    """Load a headed numeric CSV into a :class:`DataMatrix`.

    The ``response`` column becomes ``y``; every other column becomes a
    covariate, in file order. All cells must parse as finite floats;
    failures are reported with their row number and column name.
    ``max_rows`` caps ingestion at the first ``max_rows`` data rows.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if response not in header:
            raise DatasetError(f"{path}: response column {response!r} not found")
        y_col = header.index(response)
        x_cols = [j for j in range(len(header)) if j != y_col]
        if not x_cols:
            raise DatasetError(f"{path}: no covariate columns besides the response")
        xs: list[list[float]] = []
        ys: list[float] = []
        for row_num, row in enumerate(reader, start=1):
            if max_rows is not None and len(ys) >= max_rows:
                break
            if len(row) != len(header):
                raise DatasetError(
                    f"{path}: row {row_num} has {len(row)} cells, expected {len(header)}"
                )
            vals = []
            for j in x_cols + [y_col]:
                cell = row[j].strip()
                try:
                    v = float(cell)
                except ValueError:
                    raise DatasetError(
                        f"{path}: row {row_num}, column {header[j]!r}: "
                        f"cannot parse {cell!r}"
                    ) from None
                if not math.isfinite(v):
                    raise DatasetError(
                        f"{path}: row {row_num}, column {header[j]!r}: "
                        f"non-finite value {cell!r}"
                    )
                vals.append(v)
            xs.append(vals[:-1])
            ys.append(vals[-1])
    if not ys:
        raise DatasetError(f"{path}: no data rows")
    return DataMatrix(
        x=np.array(xs, dtype=np.float64),
        y=np.array(ys, dtype=np.float64),
        col_names=[header[j] for j in x_cols],
    )


def write_csv(data: DataMatrix, path: str, response: str = "y") -> None:
    """Write a DataMatrix to CSV such that :func:`load_csv` round-trips it.

    Floats are written with shortest round-trip repr, so reloaded values
    are bitwise-equal to the originals.
    """
    if response in data.col_names:
        raise DatasetError(f"response name {response!r} collides with a covariate")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(data.col_names) + [response])
        for i in range(data.n):
            writer.writerow(
                [repr(float(v)) for v in data.x[i]] + [repr(float(data.y[i]))]
            )
