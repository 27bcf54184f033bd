"""Time-series containers and second-moment estimators.

Conventions: a series is stored as a T x p matrix (rows = time points),
the covariance uses divisor 1/T and the lag-tau autocovariance uses
divisor 1/(T - tau), both centered with the single global column mean.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import (
    CsvParseError,
    InvalidInputError,
    LagTooLargeError,
    NearSingularCovarianceError,
)

#: Relative eigenvalue floor below which a covariance counts as singular.
EIG_FLOOR_RATIO = 1e-12


@dataclass(frozen=True)
class MultiSeries:
    """A length-T, p-variate real time series; rows are time points."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise InvalidInputError(f"series must be 2-dimensional, got ndim={v.ndim}")
        if v.shape[0] < 2:
            raise InvalidInputError("series needs at least 2 time points")
        if v.shape[1] < 1:
            raise InvalidInputError("series needs at least 1 component")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("series contains non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LagSet:
    """A strictly increasing set of positive integer lags."""

    lags: tuple

    def __post_init__(self):
        lags = tuple(int(t) for t in self.lags)
        if len(lags) == 0:
            raise InvalidInputError("lag set must be nonempty")
        if any(t < 1 for t in lags):
            raise InvalidInputError("all lags must be >= 1")
        if any(b <= a for a, b in zip(lags, lags[1:])):
            raise InvalidInputError("lags must be strictly increasing")
        object.__setattr__(self, "lags", lags)

    def __len__(self):
        return len(self.lags)

    def __iter__(self):
        return iter(self.lags)

    @property
    def max(self) -> int:
        return self.lags[-1]


@dataclass(frozen=True)
class SymmetricMatrixSet:
    """A list of p x p symmetric matrices, one per lag."""

    matrices: tuple
    p: int

    def __post_init__(self):
        mats = []
        for i, m in enumerate(self.matrices):
            m = np.asarray(m, dtype=float)
            if m.shape != (self.p, self.p):
                raise InvalidInputError(
                    f"matrix {i} has shape {m.shape}, expected ({self.p}, {self.p})"
                )
            scale = max(np.abs(m).max(), 1.0)
            if np.abs(m - m.T).max() > 1e-12 * scale:
                raise InvalidInputError(f"matrix {i} is not symmetric")
            mats.append(m)
        object.__setattr__(self, "matrices", tuple(mats))

    def __len__(self):
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)

    def __getitem__(self, i):
        return self.matrices[i]


def center(x: MultiSeries) -> MultiSeries:
    """Remove the column means from the series."""
    return MultiSeries(x.values - x.values.mean(axis=0))


def sample_cov(x: MultiSeries) -> np.ndarray:
    """Sample covariance with divisor 1/T; exactly symmetric."""
    xc = x.values - x.values.mean(axis=0)
    c = (xc.T @ xc) / x.T
    return (c + c.T) / 2.0


def sample_autocov(x: MultiSeries, tau: int) -> np.ndarray:
    """Lag-tau sample autocovariance with divisor 1/(T - tau).

    Both factors are centered with the single global mean. The result is
    generally not symmetric.
    """
    tau = int(tau)
    if tau < 1:
        raise InvalidInputError(f"lag must be >= 1, got {tau}")
    if tau >= x.T:
        raise LagTooLargeError(f"lag {tau} must be smaller than series length {x.T}")
    xc = x.values - x.values.mean(axis=0)
    return (xc[: x.T - tau].T @ xc[tau:]) / (x.T - tau)


def symmetrize(s: np.ndarray) -> np.ndarray:
    """(S + S^T) / 2."""
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {s.shape}")
    return (s + s.T) / 2.0


def sym_inv_sqrt(s: np.ndarray) -> np.ndarray:
    """The unique symmetric inverse square root of an SPD matrix.

    Eigenvalues below EIG_FLOOR_RATIO times the largest eigenvalue raise
    NearSingularCovarianceError rather than being pseudo-inverted; silent
    rank reduction would corrupt degrees of freedom downstream.
    """
    s = symmetrize(s)
    w, v = np.linalg.eigh(s)
    floor = EIG_FLOOR_RATIO * w[-1]
    if w[0] <= floor or w[-1] <= 0.0:
        raise NearSingularCovarianceError(
            f"eigenvalue {w[0]:.6e} at or below floor {floor:.6e}"
        )
    m = (v * (1.0 / np.sqrt(w))) @ v.T
    return (m + m.T) / 2.0


def standardized_autocovs(x: MultiSeries, lags: LagSet) -> SymmetricMatrixSet:
    """Whitened symmetrized autocovariances S0^{-1/2} R_tau S0^{-1/2}."""
    if lags.max >= x.T:
        raise LagTooLargeError(
            f"max lag {lags.max} must be smaller than series length {x.T}"
        )
    m = sym_inv_sqrt(sample_cov(x))
    mats = tuple(symmetrize(m @ symmetrize(sample_autocov(x, t)) @ m) for t in lags)
    return SymmetricMatrixSet(mats, x.p)


def load_csv(path, header: bool = False) -> MultiSeries:
    """Read a series from CSV, one row per time point.

    Parse failures report 1-based row and column numbers. No missing
    values are allowed and every entry must be a finite decimal.
    """
    rows = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for r, record in enumerate(reader, start=1):
            if header and r == 1:
                width = len(record)
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise CsvParseError(
                    r, len(record) + 1, f"expected {width} fields, got {len(record)}"
                )
            parsed = []
            for c, field in enumerate(record, start=1):
                text = field.strip()
                if not text:
                    raise CsvParseError(r, c, "missing value")
                try:
                    val = float(text)
                except ValueError:
                    raise CsvParseError(r, c, f"not a number: {text!r}") from None
                if not np.isfinite(val):
                    raise CsvParseError(r, c, f"non-finite value: {text!r}")
                parsed.append(val)
            rows.append(parsed)
    if not rows:
        raise CsvParseError(1, 1, "empty input")
    return MultiSeries(np.asarray(rows))
