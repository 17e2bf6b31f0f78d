"""Model assembly and the user-facing estimator.

:class:`SubspaceShrinkageRegressor` follows the scikit-learn estimator
conventions (``fit`` / ``predict`` / ``get_params``) so fits compose with the
usual tooling. Each additive term is described by a :class:`SmoothTerm`;
terms carry either the subspace shrinkage prior or the classical P-spline
prior, which doubles as the comparison baseline.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .basis import SplineBasis, eval_design, make_basis, rw2_penalty
from .exceptions import ConfigError, DomainError
from .linalg import solve_spd
from .mcmc import (
    PSPLINE,
    SHRINKAGE,
    ChainDraws,
    GibbsModel,
    TermGibbs,
    effective_sample_size,
    run_chain,
)
from .priors import TermHyper, assemble_precision, calibrate_nu
from .samplers import SliceConfig
from .subspace import SubspaceSpec, build_columns, projections, sigma_ref

EVAL_GRID_POINTS = 201


@dataclass(frozen=True)
class SmoothTerm:
    """One additive smooth term.

    null_space accepts a :class:`SubspaceSpec` or its string form (e.g.
    "polynomial:2"); it is ignored by P-spline terms. When neither nu nor c
    is given, the curvature cutoff follows the data-driven rule
    c = 10 * max(c_p, 0.1) with c_p the maximum curvature of the parametric
    least squares fit.
    """

    covariate: int = 0
    null_space: SubspaceSpec | str | None = None
    prior: str = SHRINKAGE
    inner_knots: int = 20
    c: float | None = None
    alpha: float = 0.05
    nu: float | None = None
    domain: tuple[float, float] | None = None
    name: str | None = None

    def resolved_null_space(self) -> SubspaceSpec | None:
        if isinstance(self.null_space, str):
            return SubspaceSpec.from_string(self.null_space)
        return self.null_space

    def resolved_name(self) -> str:
        return self.name if self.name else f"f{self.covariate + 1}"


@dataclass
class TermSummary:
    """Posterior summary of one term's curve on its evaluation grid."""

    name: str
    label: str
    grid: np.ndarray
    fitted_mean: np.ndarray
    q05: np.ndarray
    q50: np.ndarray
    q95: np.ndarray
    kappa_mean: float | None
    kappa_ess: float | None


@dataclass
class PosteriorResult:
    """Retained draws plus the summaries reported to users."""

    draws: dict[str, np.ndarray]
    term_summaries: list[TermSummary]
    kappa_mean: dict[str, float]
    rmse_to_observations: float
    rmse_to_truth: float | None
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_draws(self) -> int:
        if not self.draws:
            return 0
        first = next(iter(self.draws.values()))
        return int(np.asarray(first).shape[0])

    def to_json_dict(self) -> dict:
        """Scalar and grid summaries as a plain JSON-serializable mapping."""
        return {
            "n_draws": self.n_draws,
            "kappa_mean": self.kappa_mean,
            "rmse_to_observations": self.rmse_to_observations,
            "rmse_to_truth": self.rmse_to_truth,
            "sigma2_mean": (
                float(np.mean(self.draws["sigma2"])) if "sigma2" in self.draws else None
            ),
            "diagnostics": self.diagnostics,
            "terms": [
                {
                    "name": t.name,
                    "label": t.label,
                    "kappa_mean": t.kappa_mean,
                    "kappa_ess": t.kappa_ess,
                    "grid": t.grid.tolist(),
                    "fitted_mean": t.fitted_mean.tolist(),
                    "q05": t.q05.tolist(),
                    "q50": t.q50.tolist(),
                    "q95": t.q95.tolist(),
                }
                for t in self.term_summaries
            ],
        }


def summarize_kappa(lam_draws: np.ndarray) -> float:
    """Posterior mean of the shrinkage weight 1 / (1 + lambda^2)."""
    lam = np.asarray(lam_draws, dtype=float)
    if lam.size == 0:
        raise DomainError("no draws to summarize")
    return float(np.mean(1.0 / (1.0 + lam**2)))


def frozen_scale_fitted(
    z: np.ndarray,
    f: np.ndarray,
    penalty: np.ndarray,
    y: np.ndarray,
    lam: float,
    tau: float = np.inf,
    sigma2: float = 1.0,
) -> np.ndarray:
    """Conditional posterior mean of the fitted values at fixed scales.

    With tau = inf (no curvature penalty) this realizes the weighted average
    of the parametric least squares solution and the unpenalized spline fit,
    with weight kappa = 1 / (1 + lambda^2) on the parametric side.
    """
    q = assemble_precision(f, penalty, lam, tau, sigma2)
    qstar = (1.0 / sigma2) * (z.T @ z) + q
    return z @ solve_spd(qstar, (1.0 / sigma2) * (z.T @ y))


@dataclass
class FittedTerm:
    """Per-term design objects retained on the fitted estimator."""

    spec: SmoothTerm
    basis: SplineBasis
    z: np.ndarray
    s: np.ndarray | None
    f: np.ndarray | None
    sigma_ref: float | None
    hyper: TermHyper | None
    c_used: float | None


def _centered_curves(
    ft: FittedTerm, beta_draws: np.ndarray, x: np.ndarray, constrain: bool
) -> np.ndarray:
    """Per-draw term curves at the given covariate values.

    In constrained (additive) models each draw's curve is centered at the
    training covariates; the removed level is absorbed by the intercept.
    """
    curves = beta_draws @ eval_design(ft.basis, x).T
    if constrain:
        shift = (beta_draws @ ft.z.T).mean(axis=1)
        curves = curves - shift[:, None]
    return curves


class SubspaceShrinkageRegressor(BaseEstimator, RegressorMixin):
    """Additive Gaussian regression with smooth subspace shrinkage terms.

    Parameters
    ----------
    terms : list of SmoothTerm, optional
        One per smooth effect. Defaults to a single shrinkage term on the
        first column with a linear null space.
    intercept : bool or "auto"
        "auto" adds an intercept only for models with several terms.
    center_terms : bool or "auto"
        Sum-to-zero constraint on each term's coefficients. "auto" enables
        it whenever the model has several terms or an intercept.
    xi0 : float, optional
        Scale of the half-Cauchy prior on the global shrinkage parameter;
        mutually exclusive with fixed_xi. Defaults to 1.0.
    fixed_xi : float, optional
        Fix the global shrinkage parameter instead of sampling it.
    a0, b0 : float
        Inverse gamma prior on the error variance.
    n_iter, warmup, thin, n_chains, seed
        Chain settings; retained draws are pooled over chains.
    """

    def __init__(
        self,
        terms=None,
        intercept="auto",
        center_terms="auto",
        xi0=None,
        fixed_xi=None,
        a0=0.001,
        b0=0.001,
        n_iter=10000,
        warmup=5000,
        thin=1,
        n_chains=1,
        slice_width=1.0,
        calibration_draws=4000,
        seed=0,
        n_jobs=1,
    ):
        self.terms = terms
        self.intercept = intercept
        self.center_terms = center_terms
        self.xi0 = xi0
        self.fixed_xi = fixed_xi
        self.a0 = a0
        self.b0 = b0
        self.n_iter = n_iter
        self.warmup = warmup
        self.thin = thin
        self.n_chains = n_chains
        self.slice_width = slice_width
        self.calibration_draws = calibration_draws
        self.seed = seed
        self.n_jobs = n_jobs

    # ------------------------------------------------------------------ setup

    def _resolved_terms(self) -> list[SmoothTerm]:
        if self.terms is None:
            return [SmoothTerm(covariate=0, null_space=SubspaceSpec("polynomial", degree=1))]
        if not self.terms:
            raise ConfigError("the model needs at least one term")
        return list(self.terms)

    def _resolve_xi(self) -> tuple[float | None, float | None]:
        if self.fixed_xi is not None:
            if self.xi0 is not None:
                raise ConfigError("xi0 and fixed_xi are mutually exclusive")
            if self.fixed_xi <= 0:
                raise ConfigError("fixed_xi must be positive")
            return None, float(self.fixed_xi)
        xi0 = 1.0 if self.xi0 is None else float(self.xi0)
        if xi0 <= 0:
            raise ConfigError("xi0 must be positive")
        return xi0, None

    def _build_term(
        self, spec: SmoothTerm, x_col: np.ndarray, calibration_seed
    ) -> tuple[FittedTerm, TermGibbs]:
        lo, hi = spec.domain if spec.domain else (float(x_col.min()), float(x_col.max()))
        basis = make_basis(lo, hi, spec.inner_knots)
        z = eval_design(basis, x_col)
        from .basis import rw2_penalty

        penalty = rw2_penalty(basis.n_basis)
        name = spec.resolved_name()
        if spec.prior == PSPLINE:
            fitted = FittedTerm(
                spec=spec, basis=basis, z=z, s=None, f=None,
                sigma_ref=None, hyper=None, c_used=None,
            )
            gibbs = TermGibbs(
                name=name, z=z, penalty=penalty, prior_kind=PSPLINE,
                tau2_a=0.001, tau2_b=0.001,
            )
            return fitted, gibbs
        if spec.prior != SHRINKAGE:
            raise ConfigError(f"unknown term prior {spec.prior!r}")
        null_space = spec.resolved_null_space()
        if null_space is None:
            raise ConfigError(f"term {name}: shrinkage prior needs a null space")
        s = build_columns(null_space, x_col)
        proj = projections(s)
        f = z.T @ (proj.p1 @ z)
        f = 0.5 * (f + f.T)
        sref = sigma_ref(f)
        c_used = spec.c
        if spec.nu is not None:
            nu = float(spec.nu)
        else:
            if c_used is None:
                from .simulate import cutoff_rule, parametric_max_curvature

                c_used = cutoff_rule(
                    parametric_max_curvature(null_space, x_col, self._y_fit_, lo, hi)
                )
            nu = calibrate_nu(
                basis, c_used, spec.alpha,
                mc_draws=self.calibration_draws, seed=calibration_seed,
            )
        hyper = TermHyper(c=c_used, alpha=spec.alpha, nu=nu)
        fitted = FittedTerm(
            spec=spec, basis=basis, z=z, s=s, f=f,
            sigma_ref=sref, hyper=hyper, c_used=c_used,
        )
        gibbs = TermGibbs(
            name=name, z=z, penalty=penalty, prior_kind=SHRINKAGE,
            f=f, sigma_ref=sref, nu=nu,
        )
        return fitted, gibbs

    # -------------------------------------------------------------------- fit

    def fit(self, X, y, truth=None):
        X, y = check_X_y(X, y, ensure_2d=True, y_numeric=True)
        self._y_fit_ = y
        specs = self._resolved_terms()
        names = [t.resolved_name() for t in specs]
        if len(set(names)) != len(names):
            raise ConfigError("term names must be distinct")
        for t in specs:
            if not 0 <= t.covariate < X.shape[1]:
                raise ConfigError(f"term {t.resolved_name()}: covariate index out of range")
        xi0, fixed_xi = self._resolve_xi()
        n_terms = len(specs)
        use_intercept = (n_terms > 1) if self.intercept == "auto" else bool(self.intercept)
        constrain = (
            (n_terms > 1 or use_intercept)
            if self.center_terms == "auto"
            else bool(self.center_terms)
        )

        seed_root = np.random.SeedSequence(self.seed)
        calib_seeds = seed_root.spawn(n_terms)
        built = [
            self._build_term(spec, X[:, spec.covariate], calib_seeds[i])
            for i, spec in enumerate(specs)
        ]
        self.fitted_terms_ = [b[0] for b in built]
        gibbs_terms = [b[1] for b in built]

        model = GibbsModel(
            y=y,
            terms=gibbs_terms,
            intercept=use_intercept,
            constrain=constrain,
            xi0=xi0,
            fixed_xi=fixed_xi,
            a0=self.a0,
            b0=self.b0,
            slice_cfg=SliceConfig(initial_width=self.slice_width),
        )
        self.model_ = model
        chain_seeds = seed_root.spawn(self.n_chains)
        if self.n_chains > 1 and self.n_jobs != 1:
            chains = Parallel(n_jobs=self.n_jobs)(
                delayed(run_chain)(model, self.n_iter, self.warmup, self.thin, s)
                for s in chain_seeds
            )
        else:
            chains = [
                run_chain(model, self.n_iter, self.warmup, self.thin, s)
                for s in chain_seeds
            ]
        self.result_ = self._summarize(chains, X, y, truth)
        self.n_features_in_ = X.shape[1]
        return self

    # ---------------------------------------------------------------- summaries

    def _summarize(
        self, chains: list[ChainDraws], X, y, truth
    ) -> PosteriorResult:
        model = self.model_
        names = [t.name for t in model.terms]
        beta0 = np.concatenate([c.beta0 for c in chains])
        sigma2 = np.concatenate([c.sigma2 for c in chains])
        xi = np.concatenate([c.xi for c in chains])
        lam = np.vstack([c.lam for c in chains])
        tau = np.vstack([c.tau for c in chains])
        betas = [
            np.vstack([c.beta[l] for c in chains]) for l in range(len(model.terms))
        ]
        draws: dict[str, np.ndarray] = {"beta0": beta0, "sigma2": sigma2, "xi": xi}
        for l, name in enumerate(names):
            draws[f"beta.{name}"] = betas[l]
            draws[f"tau.{name}"] = tau[:, l]
            if model.terms[l].prior_kind == SHRINKAGE:
                draws[f"lambda.{name}"] = lam[:, l]
                draws[f"kappa.{name}"] = 1.0 / (1.0 + lam[:, l] ** 2)

        kappa_mean: dict[str, float] = {}
        summaries: list[TermSummary] = []
        for l, ft in enumerate(self.fitted_terms_):
            name = names[l]
            grid = np.linspace(ft.basis.domain_lo, ft.basis.domain_hi, EVAL_GRID_POINTS)
            curves = _centered_curves(ft, betas[l], grid, model.constrain)
            km = None
            ess = None
            if model.terms[l].prior_kind == SHRINKAGE:
                km = summarize_kappa(lam[:, l])
                kappa_mean[name] = km
                ess = effective_sample_size(draws[f"kappa.{name}"])
            label = (
                ft.spec.resolved_null_space().label()
                if model.terms[l].prior_kind == SHRINKAGE
                else "pspline"
            )
            q05, q50, q95 = np.quantile(curves, [0.05, 0.50, 0.95], axis=0)
            summaries.append(
                TermSummary(
                    name=name,
                    label=label,
                    grid=grid,
                    fitted_mean=curves.mean(axis=0),
                    q05=q05,
                    q50=q50,
                    q95=q95,
                    kappa_mean=km,
                    kappa_ess=ess,
                )
            )

        y_hat = self._mean_prediction_from(draws, X)
        rmse_obs = float(np.sqrt(np.mean((y_hat - y) ** 2)))
        rmse_truth = None
        if truth is not None:
            truth = np.asarray(truth, dtype=float)
            rmse_truth = float(np.sqrt(np.mean((y_hat - truth) ** 2)))
        diagnostics = {
            "slice_evals": {
                key: int(sum(c.slice_evals.get(key, 0) for c in chains))
                for key in ("sigma2", "lambda", "tau", "xi")
            },
            "n_chains": len(chains),
        }
        return PosteriorResult(
            draws=draws,
            term_summaries=summaries,
            kappa_mean=kappa_mean,
            rmse_to_observations=rmse_obs,
            rmse_to_truth=rmse_truth,
            diagnostics=diagnostics,
        )

    def _mean_prediction_from(self, draws: dict[str, np.ndarray], X) -> np.ndarray:
        pred = np.full(X.shape[0], float(np.mean(draws["beta0"])))
        for ft in self.fitted_terms_:
            name = ft.spec.resolved_name()
            beta_bar = draws[f"beta.{name}"].mean(axis=0)
            z_new = eval_design(ft.basis, X[:, ft.spec.covariate])
            pred = pred + z_new @ beta_bar
        return pred

    def predict(self, X) -> np.ndarray:
        """Posterior-mean prediction; covariates must lie within the fitted
        spline domains (no extrapolation)."""
        check_is_fitted(self, "result_")
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != self.n_features_in_:
            raise ConfigError(
                f"X has {X.shape[1]} features, the model was fit with {self.n_features_in_}"
            )
        return self._mean_prediction_from(self.result_.draws, X)

    def term_curve_draws(self, index: int, x=None) -> np.ndarray:
        """Per-draw curves of one term, evaluated at ``x`` (default: the
        term's evaluation grid). Curves follow the reporting convention:
        centered at the training covariates in constrained models."""
        check_is_fitted(self, "result_")
        ft = self.fitted_terms_[index]
        if x is None:
            x = np.linspace(ft.basis.domain_lo, ft.basis.domain_hi, EVAL_GRID_POINTS)
        beta = self.result_.draws[f"beta.{ft.spec.resolved_name()}"]
        return _centered_curves(ft, beta, np.asarray(x, dtype=float), self.model_.constrain)

    def pspline_baseline(self) -> "SubspaceShrinkageRegressor":
        """Unfitted copy with every term switched to the P-spline prior
        (same knot counts, domains and chain settings)."""
        params = self.get_params()
        specs = self._resolved_terms()
        params["terms"] = [
            replace(t, prior=PSPLINE, null_space=None, c=None, nu=None) for t in specs
        ]
        params["xi0"] = None
        params["fixed_xi"] = None
        return SubspaceShrinkageRegressor(**params)


def fit_pspline_baseline(
    estimator: SubspaceShrinkageRegressor, X, y, truth=None
) -> SubspaceShrinkageRegressor:
    """Fit the Bayesian P-spline comparison model matching an estimator's
    layout (same covariates, knot counts and chain settings)."""
    return estimator.pspline_baseline().fit(X, y, truth=truth)
