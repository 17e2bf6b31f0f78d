import numpy as np
import pytest

from smoothshrink.exceptions import GridMismatch, RankDeficient
from smoothshrink.metrics import distance_to_null, rmse_curve


class TestRmseCurve:
    def test_identical_curves(self):
        grid = np.linspace(-1, 1, 201)
        f = np.sin(grid)
        assert rmse_curve(f, f, -1.0, 1.0) == 0.0

    def test_constant_offset(self):
        grid = np.linspace(0, 2, 101)
        f = np.cos(grid)
        assert rmse_curve(f + 0.3, f, 0.0, 2.0) == pytest.approx(0.3, rel=1e-10)

    def test_linear_vs_zero(self):
        # sqrt( int x^2 / 2 ) over [-1, 1] = 1/sqrt(3)
        grid = np.linspace(-1, 1, 2001)
        assert rmse_curve(grid, np.zeros_like(grid), -1.0, 1.0) == pytest.approx(
            1.0 / np.sqrt(3.0), rel=1e-5
        )

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatch):
            rmse_curve(np.zeros(10), np.zeros(11), 0.0, 1.0)


class TestDistanceToNull:
    def test_curve_in_span_has_zero_distance(self):
        grid = np.linspace(-1, 1, 201)
        s = np.column_stack([np.ones_like(grid), grid, grid**2])
        f = s @ np.array([0.5, -1.0, 2.0])
        assert distance_to_null(f, s, -1.0, 1.0) < 1e-10

    def test_sine_against_constants(self):
        # rms of sin(pi x) on [-1, 1] is 1/sqrt(2)
        grid = np.linspace(-1, 1, 4001)
        f = np.sin(np.pi * grid)
        s = np.ones((grid.size, 1))
        assert distance_to_null(f, s, -1.0, 1.0) == pytest.approx(
            1.0 / np.sqrt(2.0), rel=1e-4
        )

    def test_residual_orthogonal_to_columns(self):
        rng = np.random.default_rng(0)
        grid = np.linspace(0, 1, 301)
        s = np.column_stack([np.ones_like(grid), grid])
        f = rng.standard_normal(grid.size)
        coef, *_ = np.linalg.lstsq(s, f, rcond=None)
        resid = f - s @ coef
        assert np.abs(s.T @ resid).max() < 1e-8

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatch):
            distance_to_null(np.zeros(10), np.ones((11, 1)), 0.0, 1.0)

    def test_rank_deficient_columns(self):
        grid = np.linspace(0, 1, 50)
        s = np.column_stack([np.ones_like(grid), np.ones_like(grid)])
        with pytest.raises(RankDeficient):
            distance_to_null(np.zeros(50), s, 0.0, 1.0)
