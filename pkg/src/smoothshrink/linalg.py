"""Dense symmetric linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays; the helpers here add the error
semantics the samplers rely on (explicit :class:`NotPositiveDefinite`,
tolerance-based pseudo-inversion of semidefinite matrices, a single
jitter retry for borderline posterior precisions).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import DomainError, NotPositiveDefinite

DEFAULT_REL_TOL = 1e-10


def validate_symmetric(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"{name} must be square, got shape {m.shape}")
    if m.shape[0] < 1:
        raise DomainError(f"{name} must have dimension >= 1")
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-8 * (1.0 + np.abs(m).max())):
        raise DomainError(f"{name} is not symmetric")
    return m


def cholesky(m: np.ndarray) -> np.ndarray:
    """Lower-triangular factor L with L L' = m.

    Raises :class:`NotPositiveDefinite` when the factorization fails,
    signalling the caller to add jitter or treat the matrix as degenerate.
    """
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise NotPositiveDefinite("matrix contains non-finite entries")
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc


def jitter_cholesky(m: np.ndarray) -> np.ndarray:
    """Cholesky with a single retry adding 1e-8 * trace/dim on the diagonal."""
    try:
        return cholesky(m)
    except NotPositiveDefinite:
        dim = m.shape[0]
        jitter = 1e-8 * np.trace(m) / dim
        if jitter <= 0:
            jitter = 1e-12
        return cholesky(m + jitter * np.eye(dim))


def solve_spd(m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve m x = rhs for symmetric positive definite m."""
    L = cholesky(m)
    y = solve_triangular(L, rhs, lower=True)
    return solve_triangular(L.T, y, lower=False)


def solve_spd_chol(L: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve (L L') x = rhs given a precomputed Cholesky factor."""
    y = solve_triangular(L, rhs, lower=True)
    return solve_triangular(L.T, y, lower=False)


@dataclass(frozen=True)
class EigenDecomposition:
    """Symmetric eigendecomposition with eigenvalues sorted descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v, w = self.eigenvectors, self.eigenvalues
        return (v * w) @ v.T


def eigendecompose(m: np.ndarray) -> EigenDecomposition:
    m = validate_symmetric(m)
    w, v = np.linalg.eigh(m)
    order = np.argsort(w)[::-1]
    return EigenDecomposition(eigenvalues=w[order], eigenvectors=v[:, order])


def generalized_inverse(
    m: np.ndarray, rel_tol: float = DEFAULT_REL_TOL
) -> tuple[np.ndarray, int]:
    """Moore-Penrose inverse of a symmetric PSD matrix and its numerical rank.

    Eigenvalues below ``rel_tol * max_eigenvalue`` are treated as zero.
    Raises :class:`DomainError` when the matrix is indefinite beyond tolerance.
    """
    dec = eigendecompose(m)
    w, v = dec.eigenvalues, dec.eigenvectors
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if scale == 0.0:
        return np.zeros_like(np.asarray(m, dtype=float)), 0
    cutoff = rel_tol * scale
    if np.any(w < -cutoff):
        raise DomainError(
            f"matrix is not positive semidefinite (min eigenvalue {w.min():.3e})"
        )
    keep = w > cutoff
    inv_w = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
    pinv = (v * inv_w) @ v.T
    return 0.5 * (pinv + pinv.T), int(np.count_nonzero(keep))


def kernel_basis(m: np.ndarray, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """Orthonormal basis of the numerical null space of a symmetric PSD matrix.

    Returns a (dim, q) matrix; q may be zero.
    """
    dec = eigendecompose(m)
    w, v = dec.eigenvalues, dec.eigenvectors
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if scale == 0.0:
        return np.eye(m.shape[0])
    null = w <= rel_tol * scale
    return v[:, null]
