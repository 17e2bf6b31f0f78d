"""Cubic B-spline bases with equally spaced knots.

Evaluation is delegated to ``scipy.interpolate.BSpline``; points exactly at
the upper domain boundary are assigned to the last knot interval so no row
of the design matrix is ever all zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline

from .exceptions import DomainError, OutOfDomain

DEGREE = 3  # cubic throughout; the methodology only uses third order


@dataclass(frozen=True)
class SplineBasis:
    """Cubic B-spline basis on [domain_lo, domain_hi] with equally spaced knots."""

    domain_lo: float
    domain_hi: float
    inner_knot_count: int
    full_knots: np.ndarray = field(repr=False)
    degree: int = DEGREE

    @property
    def n_basis(self) -> int:
        return self.inner_knot_count + self.degree + 1

    @property
    def knot_spacing(self) -> float:
        return (self.domain_hi - self.domain_lo) / (self.inner_knot_count + 1)

    @property
    def inner_knots(self) -> np.ndarray:
        d = self.degree
        return self.full_knots[d + 1 : -(d + 1)]


def make_basis(domain_lo: float, domain_hi: float, inner_knots: int) -> SplineBasis:
    """Build a cubic basis with `inner_knots` equally spaced interior knots.

    Boundary knots are repeated degree+1 times, so the number of basis
    functions is inner_knots + 4.
    """
    if not np.isfinite(domain_lo) or not np.isfinite(domain_hi):
        raise DomainError("domain bounds must be finite")
    if domain_lo >= domain_hi:
        raise DomainError(f"empty domain: [{domain_lo}, {domain_hi}]")
    if inner_knots < 2:
        raise DomainError(f"need at least 2 inner knots, got {inner_knots}")
    grid = np.linspace(domain_lo, domain_hi, inner_knots + 2)
    full = np.concatenate(
        [np.repeat(domain_lo, DEGREE + 1), grid[1:-1], np.repeat(domain_hi, DEGREE + 1)]
    )
    return SplineBasis(
        domain_lo=float(domain_lo),
        domain_hi=float(domain_hi),
        inner_knot_count=int(inner_knots),
        full_knots=full,
    )


def _check_domain(b: SplineBasis, x: np.ndarray) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise DomainError("covariate values must be one-dimensional")
    bad = (x < b.domain_lo) | (x > b.domain_hi) | ~np.isfinite(x)
    if np.any(bad):
        raise OutOfDomain(
            f"{int(bad.sum())} point(s) outside [{b.domain_lo}, {b.domain_hi}]"
        )
    return x


def _spline(b: SplineBasis, deriv: int = 0) -> BSpline:
    spl = BSpline(b.full_knots, np.eye(b.n_basis), b.degree, extrapolate=False)
    return spl.derivative(deriv) if deriv else spl


def eval_design(b: SplineBasis, x: np.ndarray) -> np.ndarray:
    """Design matrix of basis function values; rows sum to one."""
    x = _check_domain(b, x)
    return _spline(b)(x)


def eval_design_deriv2(b: SplineBasis, x: np.ndarray) -> np.ndarray:
    """Matrix of second derivatives; a row dotted with coefficients gives f''."""
    x = _check_domain(b, x)
    return _spline(b, deriv=2)(x)


def rw2_penalty(k: int) -> np.ndarray:
    """Second-order random walk penalty K = D'D with D the (k-2) x k
    second-difference matrix. Rank k-2; constants and linear sequences
    span the kernel."""
    if k < 3:
        raise DomainError(f"penalty needs at least 3 coefficients, got {k}")
    d = np.zeros((k - 2, k))
    for i in range(k - 2):
        d[i, i : i + 3] = (1.0, -2.0, 1.0)
    return d.T @ d


def curvature_grid(b: SplineBasis, n_points: int = 201) -> np.ndarray:
    """Evaluation grid for max |f''| checks.

    f'' of a cubic spline is piecewise linear, so any grid containing all
    knots bounds the maximum exactly; 201 equally spaced points cover every
    configuration used here.
    """
    return np.linspace(b.domain_lo, b.domain_hi, n_points)
