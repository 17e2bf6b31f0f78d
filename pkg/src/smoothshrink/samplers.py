"""Sampling primitives: precision-parameterized Gaussians, sum-to-zero
conditioning, and univariate slice updates in log-space."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import SliceFailure
from .linalg import jitter_cholesky, solve_spd_chol


@dataclass(frozen=True)
class SliceConfig:
    """Stepping-out and shrinkage budget for one slice update.

    The default width of 1.0 in log-space with a generous step-out budget
    copes with the heavy-tailed half-Cauchy conditionals.
    """

    initial_width: float = 1.0
    max_step_out: int = 50
    max_shrink: int = 100

    def __post_init__(self):
        if self.initial_width <= 0:
            raise ValueError("initial_width must be positive")
        if self.max_step_out < 1 or self.max_shrink < 1:
            raise ValueError("step-out and shrink budgets must be >= 1")


def sample_gaussian_precision(
    qstar: np.ndarray, linear_term: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Draw from N(mean, cov) with precision qstar and mean qstar^-1 linear_term.

    Uses the Cholesky factor once: solve for the mean, then add L'^-1 z with
    z standard normal. A single jitter retry handles borderline precisions.
    """
    L = jitter_cholesky(qstar)
    mean = solve_spd_chol(L, linear_term)
    z = rng.standard_normal(qstar.shape[0])
    return mean + solve_triangular(L.T, z, lower=False)


def constrain_to_zero_sum(draw: np.ndarray, qstar: np.ndarray) -> np.ndarray:
    """Condition an unconstrained Gaussian draw on 1'x = 0.

    x* = x - Q^-1 1 (1' Q^-1 1)^-1 (1' x); correcting the draw this way
    yields exactly the unconstrained distribution conditioned on the
    constraint.
    """
    ones = np.ones(draw.shape[0])
    L = jitter_cholesky(qstar)
    qinv_one = solve_spd_chol(L, ones)
    return draw - qinv_one * (draw.sum() / qinv_one.sum())


def slice_update_log(
    current: float,
    log_target: Callable[[float], float],
    cfg: SliceConfig,
    rng: np.random.Generator,
) -> float:
    """One stepping-out-and-shrinkage slice update on theta = log(current).

    log_target receives theta (log-space); the caller is responsible for
    including the log-space Jacobian in the target. Returns exp(theta_new).
    """
    theta = math.log(current)
    f0 = log_target(theta)
    if not math.isfinite(f0):
        raise SliceFailure(f"log target not finite at the current point ({f0})")
    height = f0 + math.log(rng.uniform())

    w = cfg.initial_width
    left = theta - w * rng.uniform()
    right = left + w
    # Neal's budgeted stepping out: split the budget randomly between sides
    j = int(math.floor(cfg.max_step_out * rng.uniform()))
    k = (cfg.max_step_out - 1) - j
    while j > 0 and log_target(left) > height:
        left -= w
        j -= 1
    while k > 0 and log_target(right) > height:
        right += w
        k -= 1

    for _ in range(cfg.max_shrink):
        proposal = left + (right - left) * rng.uniform()
        if log_target(proposal) > height:
            return math.exp(proposal)
        if proposal < theta:
            left = proposal
        else:
            right = proposal
    raise SliceFailure(
        f"shrinkage exhausted after {cfg.max_shrink} proposals (pathological target)"
    )
