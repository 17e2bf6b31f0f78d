"""Curve metrics on uniform evaluation grids."""
from __future__ import annotations

import numpy as np

from .exceptions import GridMismatch, RankDeficient

RANK_TOL = 1e-8


def rmse_curve(f_hat: np.ndarray, f_true: np.ndarray, lo: float, hi: float) -> float:
    """Root mean square distance between two grid functions on [lo, hi].

    The trapezoid-rule integral of the squared difference is divided by the
    interval length, so values are comparable across domains.
    """
    f_hat = np.asarray(f_hat, dtype=float)
    f_true = np.asarray(f_true, dtype=float)
    if f_hat.shape != f_true.shape or f_hat.ndim != 1 or f_hat.size < 2:
        raise GridMismatch(
            f"grid functions must share one grid, got {f_hat.shape} vs {f_true.shape}"
        )
    grid = np.linspace(lo, hi, f_hat.size)
    sq = (f_hat - f_true) ** 2
    return float(np.sqrt(np.trapezoid(sq, grid) / (hi - lo)))


def distance_to_null(
    f_hat: np.ndarray, s_grid: np.ndarray, lo: float, hi: float
) -> float:
    """RMSE between a curve and its least-squares projection onto span(S).

    S must be evaluated on the same grid as the curve.
    """
    f_hat = np.asarray(f_hat, dtype=float)
    s_grid = np.atleast_2d(np.asarray(s_grid, dtype=float))
    if s_grid.shape[0] != f_hat.shape[0]:
        raise GridMismatch(
            f"S has {s_grid.shape[0]} rows but the curve has {f_hat.size} points"
        )
    sv = np.linalg.svd(s_grid, compute_uv=False)
    if sv[-1] <= RANK_TOL * sv[0]:
        raise RankDeficient("null-space columns are rank deficient on the grid")
    coef, *_ = np.linalg.lstsq(s_grid, f_hat, rcond=None)
    return rmse_curve(f_hat, s_grid @ coef, lo, hi)
