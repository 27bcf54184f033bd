"""Generalized eigendecomposition and orthogonal approximate joint diagonalization.

The joint diagonalizer is a cyclic-by-rows Jacobi scheme: for every index
pair (i < j) the closed-form Givens angle maximizing the summed squared
diagonals of the 2x2 restrictions of all matrices is applied. Convergence
is declared when the largest rotation angle of a sweep drops below tol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .series import SymmetricMatrixSet, sym_inv_sqrt, symmetrize

DEFAULT_TOL = 1e-10
DEFAULT_MAX_SWEEPS = 100


@dataclass(frozen=True)
class JointDiagResult:
    """Rotation U and the diagonals of U^T H_tau U per lag."""

    U: np.ndarray
    diag_profiles: np.ndarray  # |lags| x p
    sweeps_used: int
    converged: bool
    final_off_criterion: float


def _fix_column_signs(u: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    u = u.copy()
    for j in range(u.shape[1]):
        k = np.argmax(np.abs(u[:, j]))
        if u[k, j] < 0:
            u[:, j] = -u[:, j]
    return u


def _as_stack(h) -> np.ndarray:
    if isinstance(h, SymmetricMatrixSet):
        return np.array(list(h))
    mats = [np.asarray(m, dtype=float) for m in h]
    if not mats:
        raise InvalidInputError("matrix set must be nonempty")
    shape = mats[0].shape
    if len(shape) != 2 or shape[0] != shape[1] or any(m.shape != shape for m in mats):
        raise InvalidInputError("expected a list of square matrices of equal size")
    return np.array(mats)


def joint_diagonalize(h, tol: float = DEFAULT_TOL,
                      max_sweeps: int = DEFAULT_MAX_SWEEPS) -> JointDiagResult:
    """Jointly diagonalize a set of symmetric matrices by an orthogonal U.

    Maximizes the summed squared diagonals of U^T H_tau U over orthogonal
    U. Non-convergence within max_sweeps is reported through the
    converged flag, not raised.
    """
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    if max_sweeps < 1:
        raise InvalidInputError("max_sweeps must be >= 1")
    a = _as_stack(h)
    original = a.copy()
    k, p, _ = a.shape
    u = np.eye(p)
    converged = False
    sweeps = 0
    if p == 1:
        converged = True
        sweeps = 1
    for _ in range(max_sweeps):
        if converged:
            break
        sweeps += 1
        max_angle = 0.0
        for i in range(p - 1):
            for j in range(i + 1, p):
                d = a[:, i, i] - a[:, j, j]
                o = a[:, i, j] + a[:, j, i]
                ton = d @ d - o @ o
                toff = 2.0 * (d @ o)
                theta = 0.5 * math.atan2(toff, ton + math.hypot(ton, toff))
                max_angle = max(max_angle, abs(theta))
                s = math.sin(theta)
                if s == 0.0:
                    continue
                c = math.cos(theta)
                ai = a[:, :, i].copy()
                aj = a[:, :, j].copy()
                a[:, :, i] = c * ai + s * aj
                a[:, :, j] = -s * ai + c * aj
                ri = a[:, i, :].copy()
                rj = a[:, j, :].copy()
                a[:, i, :] = c * ri + s * rj
                a[:, j, :] = -s * ri + c * rj
                ui = u[:, i].copy()
                uj = u[:, j].copy()
                u[:, i] = c * ui + s * uj
                u[:, j] = -s * ui + c * uj
        if max_angle < tol:
            converged = True
    u = _fix_column_signs(u)
    # Recompute from the pristine inputs so the profiles are exact.
    rotated = np.einsum("mi,kmn,nj->kij", u, original, u)
    profiles = np.einsum("kii->ki", rotated).copy()
    off = float(np.sum(rotated**2) - np.sum(profiles**2))
    return JointDiagResult(u, profiles, sweeps, converged, max(off, 0.0))


def generalized_eig(s0: np.ndarray, r: np.ndarray):
    """Generalized eigendecomposition: Gamma S0 Gamma^T = I, Gamma R Gamma^T = diag(D).

    Implemented as the symmetric eigendecomposition of S0^{-1/2} R S0^{-1/2}
    composed with S0^{-1/2}. Rows are ordered by decreasing D^2 (ties:
    larger D first).
    """
    m = sym_inv_sqrt(s0)
    w, v = np.linalg.eigh(symmetrize(m @ symmetrize(np.asarray(r, float)) @ m))
    order = sorted(range(len(w)), key=lambda i: (-w[i] ** 2, -w[i]))
    v = _fix_column_signs(v[:, order])
    d = w[order]
    return v.T @ m, d


def order_by_pseudo_eigenvalues(result: JointDiagResult, lags) -> JointDiagResult:
    """Permute columns so the summed squared pseudo-eigenvalues decrease.

    Ties are broken by the squared diagonal at the first lag, then the
    second, and so on; remaining ties keep the original column order.
    """
    dp = result.diag_profiles
    sums = (dp**2).sum(axis=0)
    perm = sorted(
        range(dp.shape[1]),
        key=lambda j: (-sums[j], *(-dp[t, j] ** 2 for t in range(dp.shape[0])), j),
    )
    return JointDiagResult(
        result.U[:, perm],
        dp[:, perm],
        result.sweeps_used,
        result.converged,
        result.final_off_criterion,
    )
