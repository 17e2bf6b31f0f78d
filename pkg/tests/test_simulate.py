import math

import numpy as np
import pytest

from smoothshrink.exceptions import DomainError
from smoothshrink.simulate import (
    ScenarioSpec,
    cutoff_rule,
    generate,
    make_scenario,
    parametric_max_curvature,
    run_scenario,
    scenario2_null_spaces,
    truth_scenario1,
    truth_scenario2,
    truth_scenario3,
)
from smoothshrink.subspace import polynomial, trig


class TestTruthFunctions:
    def test_scenario1_values(self):
        assert truth_scenario1(0.0) == pytest.approx(0.05)
        assert truth_scenario1(2.0) == pytest.approx(0.35)

    def test_scenario1_even(self):
        x = np.linspace(0, 2 * np.pi, 20)
        assert np.allclose(truth_scenario1(x), truth_scenario1(-x))

    def test_scenario2_values(self):
        assert truth_scenario2(0.0) == pytest.approx(0.05)
        v = (1 + 10 + np.pi / 2 + 0.64 * (np.pi / 2) ** 2) / 20
        assert truth_scenario2(np.pi / 2) == pytest.approx(v)

    def test_scenario2_not_even(self):
        assert truth_scenario2(1.0) != truth_scenario2(-1.0)

    def test_scenario3_term_values(self):
        assert truth_scenario3(2, 0.0) == pytest.approx(-1.5)
        assert truth_scenario3(3, 0.5) == pytest.approx(1.0)
        assert truth_scenario3(1, -0.3) == pytest.approx(-0.3)

    def test_scenario3_ranges_have_length_two(self):
        x = np.linspace(-1, 1, 5001)
        for j in range(1, 5):
            values = truth_scenario3(j, x)
            assert values.max() - values.min() == pytest.approx(2.0, abs=1e-4)

    def test_scenario3_centered_terms_integrate_to_zero(self):
        # the quadratic term as printed carries a -5/3 offset; the remaining
        # three integrate to zero exactly
        x = np.linspace(-1, 1, 20001)
        for j in (1, 3, 4):
            assert abs(np.trapezoid(truth_scenario3(j, x), x)) < 1e-6
        assert np.trapezoid(truth_scenario3(2, x), x) == pytest.approx(-5.0 / 3.0, abs=1e-6)

    def test_scenario3_domain_check(self):
        with pytest.raises(DomainError):
            truth_scenario3(1, np.array([1.5]))
        with pytest.raises(DomainError):
            truth_scenario3(5, np.array([0.0]))


class TestGenerate:
    def test_scenario1_layout(self):
        spec = make_scenario("I", replications=1)
        data = generate(spec, seed=1)
        x = data["x"][:, 0]
        assert len(x) == 100
        assert x[0] == pytest.approx(-2 * np.pi)
        assert x[-1] == pytest.approx(2 * np.pi)
        assert np.allclose(np.diff(x), x[1] - x[0])

    def test_scenario3_covariates_in_unit_box(self):
        spec = make_scenario("III", replications=1)
        data = generate(spec, seed=2)
        assert data["x"].shape == (100, 4)
        assert np.all(np.abs(data["x"]) <= 1.0)

    def test_near_zero_noise(self):
        spec = ScenarioSpec(
            scenario_id="I", n=50, sigma=1e-12, replications=1,
            null_space_set={"linear": polynomial(1)},
        )
        data = generate(spec, seed=3)
        assert np.abs(data["y"] - data["truth"]).max() < 1e-9

    def test_determinism(self):
        spec = make_scenario("II", replications=1)
        d1, d2 = generate(spec, seed=4), generate(spec, seed=4)
        assert np.array_equal(d1["y"], d2["y"])


class TestCutoffRule:
    def test_floor_case(self):
        assert cutoff_rule(0.0) == pytest.approx(1.0)

    def test_formula(self):
        assert cutoff_rule(0.5) == pytest.approx(5.0)

    def test_floor_binds(self):
        assert cutoff_rule(0.05) == pytest.approx(1.0)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            cutoff_rule(-0.1)


class TestParametricMaxCurvature:
    def test_quadratic_fit_is_exact(self):
        x = np.linspace(-2, 2, 120)
        y = 0.3 * x**2 - x + 0.1  # second derivative 0.6 everywhere
        value = parametric_max_curvature(polynomial(2), x, y, -2.0, 2.0)
        assert value == pytest.approx(0.6, rel=1e-6)

    def test_linear_fit_has_no_curvature(self):
        x = np.linspace(-1, 1, 60)
        y = 2.0 * x + 0.5
        assert parametric_max_curvature(polynomial(1), x, y, -1.0, 1.0) < 1e-8

    def test_trig_fit(self):
        hours = np.arange(96) / 4.0
        y = np.cos(2 * np.pi * hours / 24.0)
        value = parametric_max_curvature(trig(1, 24.0), hours, y, 0.0, 23.75)
        assert value == pytest.approx((2 * np.pi / 24.0) ** 2, rel=1e-3)


class TestScenarioSpec:
    def test_null_space_menu_scenario2(self):
        menu = scenario2_null_spaces()
        assert set(menu) == {"linear", "quadratic", "sin", "complex"}
        assert menu["complex"].n_columns == 4

    def test_seed_list_respected(self):
        spec = make_scenario("I", replications=2, seeds=(7, 9))
        assert spec.replication_seeds() == [7, 9]

    def test_too_few_seeds(self):
        spec = make_scenario("I", replications=3, seeds=(7, 9))
        with pytest.raises(DomainError):
            spec.replication_seeds()

    def test_invalid_scenario(self):
        with pytest.raises(DomainError):
            make_scenario("IV")


class TestRunScenario:
    def test_row_count_and_determinism_univariate(self):
        spec = ScenarioSpec(
            scenario_id="I", n=40, sigma=0.75, replications=2,
            null_space_set={"linear": polynomial(1), "quadratic": polynomial(2)},
        )
        rows1 = run_scenario(spec, n_iter=200, warmup=100)
        rows2 = run_scenario(spec, n_iter=200, warmup=100)
        assert len(rows1) == 2 * 2
        assert all("error" not in r for r in rows1)
        assert [r["kappa_mean"] for r in rows1] == [r["kappa_mean"] for r in rows2]
        for r in rows1:
            assert 0.0 < r["kappa_mean"] < 1.0
            assert r["distance_to_null"] >= 0.0
            assert math.isfinite(r["rmse_to_truth"])

    def test_scenario3_rows_include_both_priors(self):
        spec = make_scenario("III", replications=1, n=60)
        rows = run_scenario(spec, n_iter=200, warmup=100)
        assert len(rows) == 2
        priors = {r["prior"] for r in rows}
        assert priors == {"subspace_shrinkage", "pspline_rw2"}
        shrink = next(r for r in rows if r["prior"] == "subspace_shrinkage")
        assert all(f"kappa_mean_{j}" in shrink for j in range(1, 5))
        pspline = next(r for r in rows if r["prior"] == "pspline_rw2")
        assert all(pspline[f"kappa_mean_{j}"] is None for j in range(1, 5))

    def test_failed_replication_recorded_not_raised(self):
        # an impossible domain forces a per-replication failure row
        bad = polynomial(2)
        spec = ScenarioSpec(
            scenario_id="I", n=3, sigma=0.75, replications=1,
            null_space_set={"quadratic": bad},  # n=3 < basis size: fit fails
        )
        rows = run_scenario(spec, n_iter=50, warmup=10)
        assert len(rows) == 1
        assert "error" in rows[0]


class TestDirectionalInvariants:
    def test_scenario1_low_noise_quadratic_null_space_shrinks(self):
        spec = ScenarioSpec(
            scenario_id="I", n=100, sigma=0.75, replications=20,
            null_space_set={"quadratic": polynomial(2)},
        )
        rows = run_scenario(spec, n_iter=1200, warmup=500)
        assert not any(r.get("error") for r in rows)
        assert float(np.median([r["kappa_mean"] for r in rows])) > 0.5

    def test_scenario2_complex_shrinks_harder_than_linear(self):
        menu = scenario2_null_spaces()
        spec = ScenarioSpec(
            scenario_id="II", n=100, sigma=2.5, replications=8,
            null_space_set={"linear": menu["linear"], "complex": menu["complex"]},
        )
        rows = run_scenario(spec, n_iter=1200, warmup=500)
        assert not any(r.get("error") for r in rows)
        med = {
            label: float(
                np.median([r["kappa_mean"] for r in rows if r["null_space"] == label])
            )
            for label in ("linear", "complex")
        }
        assert med["complex"] > med["linear"]
