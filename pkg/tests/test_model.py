import numpy as np
import pytest
from sklearn.base import clone

from smoothshrink.exceptions import ConfigError
from smoothshrink.model import (
    SmoothTerm,
    SubspaceShrinkageRegressor,
    fit_pspline_baseline,
    frozen_scale_fitted,
    summarize_kappa,
)
from smoothshrink.subspace import build_columns, custom, polynomial, projections


def _quadratic_data(sigma, seed=0, n=100):
    rng = np.random.default_rng(seed)
    x = np.linspace(-2 * np.pi, 2 * np.pi, n)
    truth = (1 + 1.5 * x**2) / 20.0
    return x[:, None], truth + rng.normal(0, sigma, n), truth


def _fast_estimator(null_space, **kwargs):
    defaults = dict(
        terms=[SmoothTerm(covariate=0, null_space=null_space, inner_knots=20)],
        intercept=False,
        n_iter=1200,
        warmup=400,
        seed=1,
    )
    defaults.update(kwargs)
    return SubspaceShrinkageRegressor(**defaults)


class TestSummarizeKappa:
    def test_all_zero(self):
        assert summarize_kappa(np.zeros(10)) == pytest.approx(1.0)

    def test_two_values(self):
        assert summarize_kappa(np.array([0.0, np.sqrt(3.0)])) == pytest.approx(0.625)

    def test_monotone_under_large_lambda_draws(self):
        base = np.array([0.5, 1.0])
        extended = np.concatenate([base, [50.0]])
        assert summarize_kappa(extended) < summarize_kappa(base)

    def test_empty_raises(self):
        with pytest.raises(Exception):
            summarize_kappa(np.array([]))


class TestFrozenScaleIdentity:
    def test_weighted_average_of_parametric_and_spline_fits(self):
        # fitted = ((1-kappa) P_Z + kappa P_0) y when tau^-2 = 0
        rng = np.random.default_rng(2)
        x = np.linspace(-1, 1, 60)
        y = rng.standard_normal(60)
        est = _fast_estimator(polynomial(2), n_iter=20, warmup=10)
        est.fit(x[:, None], y)
        ft = est.fitted_terms_[0]
        z = ft.z
        p_z = z @ np.linalg.solve(z.T @ z, z.T)
        p_0 = projections(ft.s).p0
        for kap in (0.2, 0.8):
            lam = np.sqrt((1 - kap) / kap)
            fitted = frozen_scale_fitted(z, ft.f, est.model_.terms[0].penalty, y, lam)
            expected = ((1 - kap) * p_z + kap * p_0) @ y
            assert np.abs(fitted - expected).max() < 1e-6


class TestFitBehavior:
    def test_pure_null_data_shrinks(self):
        x, y, truth = _quadratic_data(sigma=2.5, seed=3)
        est = _fast_estimator(polynomial(2))
        est.fit(x, y, truth=truth)
        assert est.result_.kappa_mean["f1"] > 0.5

    def test_strong_off_null_signal_escapes(self):
        x, y, truth = _quadratic_data(sigma=0.75, seed=4)
        est = _fast_estimator(polynomial(1))  # misspecified linear null space
        est.fit(x, y, truth=truth)
        assert est.result_.kappa_mean["f1"] < 0.5

    def test_zero_variance_flat_truth(self):
        x = np.linspace(0, 1, 50)[:, None]
        y = np.full(50, 2.0)
        est = _fast_estimator(polynomial(1), n_iter=600, warmup=200)
        est.fit(x, y)
        curve = est.result_.term_summaries[0].fitted_mean
        assert np.abs(curve - 2.0).max() < 1e-2

    def test_quantile_bands_nested(self):
        x, y, _ = _quadratic_data(sigma=2.5, seed=5)
        est = _fast_estimator(polynomial(1), n_iter=600, warmup=200)
        est.fit(x, y)
        s = est.result_.term_summaries[0]
        assert np.all(s.q05 <= s.q50 + 1e-12)
        assert np.all(s.q50 <= s.q95 + 1e-12)

    def test_kappa_mean_in_unit_interval(self):
        x, y, _ = _quadratic_data(sigma=0.75, seed=6)
        est = _fast_estimator(polynomial(2), n_iter=600, warmup=200)
        est.fit(x, y)
        assert 0.0 < est.result_.kappa_mean["f1"] < 1.0

    def test_predict_round_trip(self):
        x, y, truth = _quadratic_data(sigma=0.75, seed=7)
        est = _fast_estimator(polynomial(2))
        est.fit(x, y)
        pred = est.predict(x)
        assert pred.shape == (100,)
        assert np.sqrt(np.mean((pred - truth) ** 2)) < 1.0

    def test_rmse_fields(self):
        x, y, truth = _quadratic_data(sigma=0.75, seed=8)
        est = _fast_estimator(polynomial(2), n_iter=600, warmup=200)
        est.fit(x, y, truth=truth)
        r = est.result_
        assert r.rmse_to_truth is not None
        assert 0 < r.rmse_to_truth < r.rmse_to_observations

    def test_fixed_nu_skips_calibration(self):
        x, y, _ = _quadratic_data(sigma=0.75, seed=9)
        term = SmoothTerm(covariate=0, null_space=polynomial(2), nu=0.1)
        est = SubspaceShrinkageRegressor(
            terms=[term], intercept=False, n_iter=300, warmup=100, seed=1
        )
        est.fit(x, y)
        assert est.fitted_terms_[0].hyper.nu == 0.1


class TestAdditiveModel:
    def _fit(self, seed=10, n_iter=1000, warmup=400):
        rng = np.random.default_rng(seed)
        x = rng.uniform(-1, 1, (90, 2))
        truth = x[:, 0] + np.sin(np.pi * x[:, 1])
        y = truth + rng.normal(0, 0.4, 90)
        terms = [
            SmoothTerm(covariate=0, null_space=polynomial(1), nu=0.1),
            SmoothTerm(covariate=1, null_space=custom("1", "sin(pi*x)", "cos(pi*x)"), nu=0.1),
        ]
        est = SubspaceShrinkageRegressor(
            terms=terms, n_iter=n_iter, warmup=warmup, seed=seed
        )
        return est.fit(x, y, truth=truth), x, y

    def test_intercept_and_constraint_auto_enabled(self):
        est, _, _ = self._fit(n_iter=300, warmup=100)
        assert est.model_.intercept is True
        assert est.model_.constrain is True

    def test_term_curves_centered_at_training_points(self):
        est, x, _ = self._fit(n_iter=300, warmup=100)
        for idx in range(2):
            curves = est.term_curve_draws(idx, x[:, idx])
            assert np.abs(curves.mean(axis=1)).max() < 1e-6

    def test_correct_null_spaces_shrink(self):
        est, _, _ = self._fit()
        assert est.result_.kappa_mean["f1"] > 0.5
        assert est.result_.kappa_mean["f2"] > 0.5


class TestPsplineBaseline:
    def test_linear_truth_fits_within_noise(self):
        rng = np.random.default_rng(11)
        x = np.linspace(-1, 1, 80)
        truth = 0.5 + 1.2 * x
        y = truth + rng.normal(0, 0.1, 80)
        term = SmoothTerm(covariate=0, prior="pspline_rw2", inner_knots=20)
        est = SubspaceShrinkageRegressor(
            terms=[term], intercept=False, n_iter=1000, warmup=400, seed=12
        )
        est.fit(x[:, None], y)
        pred = est.predict(x[:, None])
        assert np.abs(pred - truth).max() < 0.2

    def test_baseline_shares_layout(self):
        x, y, _ = _quadratic_data(sigma=0.75, seed=13)
        est = _fast_estimator(polynomial(2), n_iter=200, warmup=100)
        base = est.pspline_baseline()
        assert base.terms[0].prior == "pspline_rw2"
        assert base.terms[0].inner_knots == est._resolved_terms()[0].inner_knots
        base.fit(x, y)
        assert base.result_.kappa_mean == {}
        assert base.fitted_terms_[0].basis.n_basis == 24

    def test_fit_pspline_baseline_helper(self):
        x, y, truth = _quadratic_data(sigma=0.75, seed=14)
        est = _fast_estimator(polynomial(2), n_iter=200, warmup=100)
        base = fit_pspline_baseline(est, x, y, truth=truth)
        assert base.result_.rmse_to_truth is not None


class TestValidation:
    def test_mutually_exclusive_xi(self):
        x, y, _ = _quadratic_data(sigma=0.75)
        est = _fast_estimator(polynomial(1), xi0=1.0, fixed_xi=0.5)
        with pytest.raises(ConfigError):
            est.fit(x, y)

    def test_covariate_out_of_range(self):
        x, y, _ = _quadratic_data(sigma=0.75)
        est = SubspaceShrinkageRegressor(
            terms=[SmoothTerm(covariate=3, null_space=polynomial(1))], n_iter=50, warmup=10
        )
        with pytest.raises(ConfigError):
            est.fit(x, y)

    def test_unknown_prior(self):
        x, y, _ = _quadratic_data(sigma=0.75)
        est = SubspaceShrinkageRegressor(
            terms=[SmoothTerm(covariate=0, prior="lasso")], n_iter=50, warmup=10
        )
        with pytest.raises(ConfigError):
            est.fit(x, y)

    def test_missing_null_space(self):
        x, y, _ = _quadratic_data(sigma=0.75)
        est = SubspaceShrinkageRegressor(
            terms=[SmoothTerm(covariate=0)], n_iter=50, warmup=10
        )
        with pytest.raises(ConfigError):
            est.fit(x, y)

    def test_duplicate_term_names(self):
        x, y, _ = _quadratic_data(sigma=0.75)
        terms = [
            SmoothTerm(covariate=0, null_space=polynomial(1), name="same"),
            SmoothTerm(covariate=0, null_space=polynomial(2), name="same"),
        ]
        est = SubspaceShrinkageRegressor(terms=terms, n_iter=50, warmup=10)
        with pytest.raises(ConfigError):
            est.fit(x, y)

    def test_sklearn_clone_compatible(self):
        est = _fast_estimator(polynomial(2))
        cloned = clone(est)
        assert cloned.get_params()["n_iter"] == est.n_iter

    def test_seed_determinism_end_to_end(self):
        x, y, _ = _quadratic_data(sigma=2.5, seed=15)
        r1 = _fast_estimator(polynomial(2), n_iter=200, warmup=100).fit(x, y).result_
        r2 = _fast_estimator(polynomial(2), n_iter=200, warmup=100).fit(x, y).result_
        assert np.array_equal(r1.draws["lambda.f1"], r2.draws["lambda.f1"])
        assert r1.kappa_mean == r2.kappa_mean
