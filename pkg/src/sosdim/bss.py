"""AMUSE and SOBI unmixing estimators.

Both produce an unmixing matrix Gamma = U^T S0^{-1/2} whose rows are
ordered signal-first by the summed squared pseudo-eigenvalues, so the
trailing components are the white-noise candidates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, LagTooLargeError
from .jointdiag import (
    DEFAULT_MAX_SWEEPS,
    DEFAULT_TOL,
    _fix_column_signs,
    joint_diagonalize,
    order_by_pseudo_eigenvalues,
)
from .series import (
    LagSet,
    MultiSeries,
    SymmetricMatrixSet,
    sample_autocov,
    sample_cov,
    sym_inv_sqrt,
    symmetrize,
)

#: Lag sets used throughout the experiments.
LAG_PRESETS = {
    "amuse": (1,),
    "sobi6": tuple(range(1, 7)),
    "sobi12": tuple(range(1, 13)),
}


@dataclass(frozen=True)
class UnmixingResult:
    gamma: np.ndarray  # p x p unmixing matrix U^T S0^{-1/2}
    U: np.ndarray  # orthogonal rotation, columns ordered signal-first
    H: SymmetricMatrixSet  # whitened symmetrized autocovariances
    lags: LagSet
    pseudo_sums: np.ndarray  # non-increasing, length p
    method: str  # "amuse" | "sobi"
    converged: bool
    n_obs: int
    mean: np.ndarray  # column means used for centering

    @property
    def p(self) -> int:
        return self.gamma.shape[0]


def _whitened_autocovs(x: MultiSeries, lags: LagSet):
    if lags.max >= x.T:
        raise LagTooLargeError(
            f"max lag {lags.max} must be smaller than series length {x.T}"
        )
    m = sym_inv_sqrt(sample_cov(x))
    mats = tuple(symmetrize(m @ symmetrize(sample_autocov(x, t)) @ m) for t in lags)
    return m, SymmetricMatrixSet(mats, x.p)


def amuse(x: MultiSeries, tau: int = 1) -> UnmixingResult:
    """Unmixing from the generalized eigendecomposition of (S0, R_tau)."""
    lags = LagSet((tau,))
    m, h = _whitened_autocovs(x, lags)
    w, v = np.linalg.eigh(h[0])
    order = sorted(range(x.p), key=lambda i: (-w[i] ** 2, -w[i]))
    u = _fix_column_signs(v[:, order])
    d = w[order]
    return UnmixingResult(
        gamma=u.T @ m,
        U=u,
        H=h,
        lags=lags,
        pseudo_sums=d**2,
        method="amuse",
        converged=True,
        n_obs=x.T,
        mean=x.values.mean(axis=0),
    )


def sobi(
    x: MultiSeries,
    lags,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> UnmixingResult:
    """Unmixing from orthogonal approximate joint diagonalization."""
    if not isinstance(lags, LagSet):
        lags = LagSet(tuple(lags))
    m, h = _whitened_autocovs(x, lags)
    jd = order_by_pseudo_eigenvalues(joint_diagonalize(h, tol, max_sweeps), lags)
    return UnmixingResult(
        gamma=jd.U.T @ m,
        U=jd.U,
        H=h,
        lags=lags,
        pseudo_sums=(jd.diag_profiles**2).sum(axis=0),
        method="sobi",
        converged=jd.converged,
        n_obs=x.T,
        mean=x.values.mean(axis=0),
    )


def unmix(x: MultiSeries, lags, method: str, **kwargs) -> UnmixingResult:
    """Dispatch to amuse (singleton lag set) or sobi."""
    if not isinstance(lags, LagSet):
        lags = LagSet(tuple(lags))
    if method == "amuse":
        if len(lags) != 1:
            raise InvalidInputError("amuse requires exactly one lag")
        return amuse(x, lags.lags[0])
    if method == "sobi":
        return sobi(x, lags, **kwargs)
    raise InvalidInputError(f"unknown method: {method!r}")


def estimated_sources(x: MultiSeries, r: UnmixingResult) -> MultiSeries:
    """Recovered sources z_t = Gamma (x_t - xbar), signal components first."""
    if x.p != r.p:
        raise InvalidInputError(
            f"series dimension {x.p} does not match unmixing dimension {r.p}"
        )
    xc = x.values - x.values.mean(axis=0)
    return MultiSeries(xc @ r.gamma.T)


def match_components(a: np.ndarray, b: np.ndarray):
    """Greedy signed-permutation match of the columns of two source arrays.

    Pairs columns by maximal absolute correlation and returns
    (permutation, signs, correlations) such that b[:, perm] * signs
    best matches a column-wise. Quotients out the sign/permutation
    unidentifiability of unmixing estimates.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    pa = a.shape[1]
    corr = np.corrcoef(a, b, rowvar=False)[:pa, pa:]
    perm = np.full(pa, -1, dtype=int)
    signs = np.ones(pa)
    best = np.zeros(pa)
    taken = set()
    pairs = sorted(
        ((i, j) for i in range(pa) for j in range(corr.shape[1])),
        key=lambda ij: -abs(corr[ij]),
    )
    for i, j in pairs:
        if perm[i] >= 0 or j in taken:
            continue
        perm[i] = j
        taken.add(j)
        best[i] = abs(corr[i, j])
        signs[i] = 1.0 if corr[i, j] >= 0 else -1.0
    return perm, signs, best
