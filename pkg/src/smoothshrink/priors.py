"""The smooth subspace shrinkage prior hierarchy.

The prior on one term's coefficients is a degenerate Gaussian with precision

    Q = sigma^-2 lambda^-2 F + tau^-2 K,      F = Z' P1 Z,

combining the squared deviation of the fitted curve from the parametric
subspace (scaled by the local shrinkage parameter lambda) with the squared
second differences of the coefficients (scaled by the smoothing parameter
tau). Scale parameters carry half-Cauchy priors; sigma^2 an inverse gamma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import SplineBasis, curvature_grid, eval_design_deriv2
from .exceptions import DomainError, NoConvergence

LOG_2_OVER_PI = math.log(2.0 / math.pi)


@dataclass(frozen=True)
class TermHyper:
    """Per-term hyperparameters of the shrinkage prior.

    nu is the half-Cauchy scale for tau; when not fixed by the user it is
    calibrated from (c, alpha) so that under full shrinkage-off the maximum
    absolute second derivative stays below c with probability 1 - alpha.
    """

    c: float | None = None
    alpha: float = 0.05
    nu: float | None = None

    def __post_init__(self):
        if self.nu is not None and self.nu <= 0:
            raise DomainError("nu must be positive")
        if self.c is not None and self.c <= 0:
            raise DomainError("curvature cutoff c must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")


def assemble_precision(
    f: np.ndarray, k: np.ndarray, lam: float, tau: float, sigma2: float
) -> np.ndarray:
    """Prior precision Q = sigma^-2 lambda^-2 F + tau^-2 K."""
    for name, value in (("lambda", lam), ("tau", tau), ("sigma2", sigma2)):
        if not value > 0 or math.isnan(value):
            raise DomainError(f"{name} must be positive, got {value}")
    return (1.0 / (sigma2 * lam * lam)) * f + (1.0 / (tau * tau)) * k


def kappa(lam: float) -> float:
    """Shrinkage weight 1 / (1 + lambda^2); 1 means full shrinkage."""
    if lam < 0:
        raise DomainError("lambda must be nonnegative")
    return 1.0 / (1.0 + lam * lam)


def log_half_cauchy(x: float, scale: float) -> float:
    """Log density of the Cauchy distribution truncated to positive reals."""
    if scale <= 0 or math.isnan(scale):
        raise DomainError(f"half-Cauchy scale must be positive, got {scale}")
    if x <= 0:
        return -math.inf
    z = x / scale
    return LOG_2_OVER_PI - math.log(scale) - math.log1p(z * z)


def log_inverse_gamma(x: float, a: float, b: float) -> float:
    """Log density of the inverse gamma distribution with shape a, scale b."""
    if a <= 0 or b <= 0:
        raise DomainError("inverse gamma parameters must be positive")
    if x <= 0:
        return -math.inf
    return a * math.log(b) - math.lgamma(a) - (a + 1.0) * math.log(x) - b / x


def _unit_curvature_maxima(
    basis: SplineBasis, mc_draws: int, rng: np.random.Generator
) -> np.ndarray:
    """Max |f''| over the domain grid for unit-scale random walk paths.

    Each path accumulates independent second-difference increments with the
    first two coefficients pinned to zero; those kernel directions carry no
    curvature, so pinning them is a choice of representative only. The path
    scales linearly in tau, hence one unit-scale sample serves every tau.
    """
    k = basis.n_basis
    grid = curvature_grid(basis)
    d2 = eval_design_deriv2(basis, grid)
    increments = rng.standard_normal((mc_draws, k - 2))
    # beta_j = 2 beta_{j-1} - beta_{j-2} + u_j  <=>  double cumulative sum
    beta = np.cumsum(np.cumsum(increments, axis=1), axis=1)
    paths = np.concatenate([np.zeros((mc_draws, 2)), beta], axis=1)
    return np.abs(paths @ d2.T).max(axis=1)


def calibrate_nu(
    basis: SplineBasis,
    c: float,
    alpha: float,
    mc_draws: int = 4000,
    seed: int | np.random.SeedSequence = 0,
    max_iter: int = 60,
) -> float:
    """Half-Cauchy scale nu for tau from the curvature probability statement.

    Finds nu such that, with tau ~ C+(0, nu) and coefficients following the
    second-order random walk, Pr(max |f''| < c over the domain) is 1 - alpha.
    Monte Carlo with common random numbers across the bisection on log nu:
    tau enters the curvature maxima multiplicatively, so one fixed sample of
    unit-scale maxima and half-Cauchy quantiles is reused at every nu.
    """
    if c <= 0:
        raise DomainError("cutoff c must be positive")
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    if mc_draws < 1000:
        raise DomainError("need at least 1000 Monte Carlo draws")
    rng = np.random.default_rng(seed)
    # tau = nu * tan(pi u / 2) with u uniform: inverse CDF of the half-Cauchy
    tau_unit = np.tan(0.5 * np.pi * rng.uniform(size=mc_draws))
    maxima = _unit_curvature_maxima(basis, mc_draws, rng)
    scaled = tau_unit * maxima  # max |f''| = nu * scaled per draw

    target = 1.0 - alpha

    def prob(log_nu: float) -> float:
        return float(np.mean(math.exp(log_nu) * scaled < c))

    lo, hi = math.log(1e-12), math.log(1e12)
    if prob(lo) < target or prob(hi) > target:
        raise NoConvergence("calibration target not bracketed by the search range")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        p = prob(mid)
        if abs(p - target) <= 0.005:
            return math.exp(mid)
        if p > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    p = prob(0.5 * (lo + hi))
    if abs(p - target) <= 0.01:
        return math.exp(0.5 * (lo + hi))
    raise NoConvergence(
        f"bisection did not reach the target probability within {max_iter} iterations"
    )
