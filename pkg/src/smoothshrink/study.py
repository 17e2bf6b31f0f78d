"""Numerical study of the prior's marginal distance distribution.

The marginal density of the distance d of a functional effect from the
parametric subspace involves integrals of the form

    I_m(d) = int_0^inf exp(-d^2 / (2 l^2)) / (l^m (1 + l^2 / xi^2)) dl

with no closed form. They are evaluated after the substitution l = exp(u),
which makes both tails decay double-exponentially, on the interval
(-30, 30). The density is reported up to its normalizing pseudo-determinant
factor (set to one): plots are shape-true up to a constant, and the factor
cancels entirely in the score.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .exceptions import DomainError, QuadratureFailure

U_LIMIT = 30.0


@dataclass(frozen=True)
class QuadratureConfig:
    max_subdivisions: int = 200
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8


@dataclass(frozen=True)
class StudyConfig:
    """Grids for the density/score tables behind the study figures."""

    ranks: tuple[int, ...] = (10, 20)
    xi_tilde: tuple[float, ...] = (0.1, 1.0, 10.0)
    d_grid: tuple[float, ...] = field(
        default_factory=lambda: tuple(np.linspace(0.1, 25.0, 150))
    )
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)

    def __post_init__(self):
        if any(r < 2 for r in self.ranks):
            raise DomainError("the spike behavior requires rank >= 2")
        if any(x <= 0 for x in self.xi_tilde):
            raise DomainError("xi_tilde values must be positive")
        if any(d <= 0 for d in self.d_grid):
            raise DomainError("d grid must be strictly positive")


def _log_integral(
    m: int, d: float, xi_tilde: float, cfg: QuadratureConfig = QuadratureConfig()
) -> float:
    """log I_m(d), computed stably by factoring out the integrand maximum."""

    def log_integrand(u: np.ndarray) -> np.ndarray:
        return (
            -0.5 * d * d * np.exp(-2.0 * u)
            + (1.0 - m) * u
            - np.log1p(np.exp(2.0 * u) / (xi_tilde * xi_tilde))
        )

    coarse = np.linspace(-U_LIMIT, U_LIMIT, 2001)
    peak = float(np.max(log_integrand(coarse)))

    def integrand(u: float) -> float:
        return math.exp(log_integrand(np.asarray(u)) - peak)

    value, abserr = quad(
        integrand,
        -U_LIMIT,
        U_LIMIT,
        epsabs=cfg.abs_tol,
        epsrel=cfg.rel_tol,
        limit=cfg.max_subdivisions,
    )
    if value <= 0 or abserr > max(cfg.abs_tol, 10.0 * cfg.rel_tol * value):
        raise QuadratureFailure(
            f"integral I_{m}({d}) did not reach tolerance (value {value}, err {abserr})"
        )
    return peak + math.log(value)


def _log_c0(rank_f: int, xi_tilde: float) -> float:
    # pseudo-determinant of F set to one: shape comparisons only
    return (
        math.log(2.0 / (math.pi * xi_tilde))
        - 0.5 * rank_f * math.log(2.0 * math.pi)
    )


def marginal_density_d(
    d: float,
    xi_tilde: float,
    rank_f: int,
    cfg: QuadratureConfig = QuadratureConfig(),
) -> float:
    """Marginal density of the null-space distance, up to the constant
    pseudo-determinant factor; diverges as d -> 0."""
    if d <= 0:
        raise DomainError("the density is evaluated for d > 0 (it diverges at 0)")
    if xi_tilde <= 0:
        raise DomainError("xi_tilde must be positive")
    if rank_f < 2:
        raise DomainError("rank must be >= 2")
    return math.exp(_log_c0(rank_f, xi_tilde) + _log_integral(rank_f, d, xi_tilde, cfg))


def marginal_score_d(
    d: float,
    xi_tilde: float,
    rank_f: int,
    cfg: QuadratureConfig = QuadratureConfig(),
) -> float:
    """Score (d/dd log density) of the distance marginal: -d I_{m+2} / I_m.

    Always nonpositive, and redescending: it tends to zero as d grows.
    """
    if d <= 0:
        raise DomainError("the score is evaluated for d > 0")
    log_num = _log_integral(rank_f + 2, d, xi_tilde, cfg)
    log_den = _log_integral(rank_f, d, xi_tilde, cfg)
    return -d * math.exp(log_num - log_den)


def monte_carlo_density(
    d: float,
    xi_tilde: float,
    rank_f: int,
    draws: int = 1_000_000,
    seed: int = 0,
) -> float:
    """Monte Carlo oracle for the density: draw the scale from its
    half-Cauchy prior and average the Gaussian kernel factor."""
    rng = np.random.default_rng(seed)
    lam = xi_tilde * np.tan(0.5 * np.pi * rng.uniform(size=draws))
    log_w = -0.5 * d * d / (lam * lam) - rank_f * np.log(lam)
    peak = float(np.max(log_w))
    mean_w = float(np.mean(np.exp(log_w - peak)))
    return math.exp(
        -0.5 * rank_f * math.log(2.0 * math.pi) + peak + math.log(mean_w)
    )


def emit_study(cfg: StudyConfig) -> list[dict]:
    """Long-format table (rank, xi_tilde, d, density, score) over the grids."""
    rows = []
    for rank_f in cfg.ranks:
        for xi in cfg.xi_tilde:
            for d in cfg.d_grid:
                rows.append(
                    {
                        "rank_F": rank_f,
                        "xi_tilde": xi,
                        "d": d,
                        "density": marginal_density_d(d, xi, rank_f, cfg.quadrature),
                        "score": marginal_score_d(d, xi, rank_f, cfg.quadrature),
                    }
                )
    return rows
