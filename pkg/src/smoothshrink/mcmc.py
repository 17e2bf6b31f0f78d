"""Gibbs-within-slice sampler for the shrinkage and P-spline models.

Each sweep updates the intercept, then every term's coefficients from their
Gaussian full conditionals (under the sum-to-zero constraint where the model
requires it), then the scale parameters by univariate slice updates in
log-space: sigma^2 first, per term lambda and tau, and finally the global
shrinkage scale xi. P-spline terms replace the (lambda, tau) pair by a
conjugate inverse-gamma update of tau^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, SliceFailure
from .linalg import jitter_cholesky, kernel_basis, solve_spd, solve_spd_chol
from .priors import (
    assemble_precision,
    log_half_cauchy,
    log_inverse_gamma,
)
from .samplers import (
    SliceConfig,
    constrain_to_zero_sum,
    sample_gaussian_precision,
    slice_update_log,
)

SHRINKAGE = "subspace_shrinkage"
PSPLINE = "pspline_rw2"

# Numerical guard rails for the log-space slice updates. The bounds truncate
# the half-Cauchy tails far beyond any statistically visible region; without
# them, lambda -> 0 excursions make the posterior precision too ill
# conditioned to factor reliably.
LAMBDA_BOUNDS = (math.log(1e-6), math.log(1e6))
TAU_BOUNDS = (math.log(1e-6), math.log(1e6))
SIGMA2_BOUNDS = (math.log(1e-10), math.log(1e10))
XI_BOUNDS = (math.log(1e-10), math.log(1e10))

TAU2_FLOOR = 1e-10  # P-spline conjugate draws; keeps tau^-2 K factorable


@dataclass
class TermGibbs:
    """Precomputed per-term quantities the sampler needs."""

    name: str
    z: np.ndarray
    penalty: np.ndarray
    prior_kind: str = SHRINKAGE
    f: np.ndarray | None = None
    sigma_ref: float = 1.0
    nu: float = 1.0
    tau2_a: float = 0.001
    tau2_b: float = 0.001
    ztz: np.ndarray = field(init=False)
    null_basis: np.ndarray | None = field(init=False, default=None)
    rank: int = field(init=False, default=0)
    penalty_rank: int = field(init=False, default=0)

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        self.ztz = self.z.T @ self.z
        k = self.z.shape[1]
        self.penalty_rank = int(np.linalg.matrix_rank(self.penalty, tol=1e-9))
        if self.prior_kind == SHRINKAGE:
            if self.f is None:
                raise DomainError("shrinkage terms need the projected Gram matrix F")
            null = kernel_basis(self.f + self.penalty)
            self.null_basis = null if null.shape[1] > 0 else None
            self.rank = k - (0 if self.null_basis is None else null.shape[1])
        else:
            null = kernel_basis(self.penalty)
            self.null_basis = null if null.shape[1] > 0 else None
            self.rank = self.penalty_rank

    @property
    def n_coef(self) -> int:
        return self.z.shape[1]

    def prior_precision(self, lam: float, tau: float, sigma2: float) -> np.ndarray:
        if self.prior_kind == SHRINKAGE:
            return assemble_precision(self.f, self.penalty, lam, tau, sigma2)
        return (1.0 / (tau * tau)) * self.penalty


@dataclass
class GibbsModel:
    """Everything a chain needs: data, terms, and global hyperparameters."""

    y: np.ndarray
    terms: list[TermGibbs]
    intercept: bool = False
    constrain: bool = False
    xi0: float | None = 1.0
    fixed_xi: float | None = None
    a0: float = 0.001
    b0: float = 0.001
    slice_cfg: SliceConfig = field(default_factory=SliceConfig)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        if self.fixed_xi is not None and self.fixed_xi <= 0:
            raise DomainError("fixed_xi must be positive")
        if self.fixed_xi is None and (self.xi0 is None or self.xi0 <= 0):
            raise DomainError("xi0 must be positive when xi is sampled")

    @property
    def n_obs(self) -> int:
        return self.y.shape[0]

    @property
    def shrinkage_indices(self) -> list[int]:
        return [i for i, t in enumerate(self.terms) if t.prior_kind == SHRINKAGE]


@dataclass
class ChainState:
    """Current parameter values during MCMC."""

    beta0: float
    beta: list[np.ndarray]
    lam: list[float]
    tau: list[float]
    xi: float
    sigma2: float
    iteration: int = 0


@dataclass
class ChainDraws:
    """Retained draws of one chain, stored column-major per parameter."""

    beta0: np.ndarray
    beta: list[np.ndarray]
    lam: np.ndarray
    tau: np.ndarray
    xi: np.ndarray
    sigma2: np.ndarray
    kappa: np.ndarray
    slice_evals: dict[str, int]
    final_state: ChainState


def half_log_pdet(q: np.ndarray, null_basis: np.ndarray | None) -> float:
    """0.5 * log of the generalized determinant of a PSD matrix.

    The (fixed) null space is pinned with a projector scaled to the matrix
    magnitude so the Cholesky factor stays well defined; the pin's exactly
    known contribution is subtracted again.
    """
    if null_basis is None:
        L = jitter_cholesky(q)
        return float(np.sum(np.log(np.diag(L))))
    dim = q.shape[0]
    q_null = null_basis.shape[1]
    scale = max(1.0, float(np.trace(q)) / dim)
    L = jitter_cholesky(q + scale * (null_basis @ null_basis.T))
    return float(np.sum(np.log(np.diag(L))) - 0.5 * q_null * math.log(scale))


def update_intercept(
    y_tilde: np.ndarray, sigma2: float, rng: np.random.Generator
) -> float:
    """Gibbs draw for the intercept under its flat prior:
    Normal(mean of the working observations, sigma^2 / n)."""
    n = y_tilde.shape[0]
    if n < 1:
        raise DomainError("intercept update needs at least one observation")
    return float(rng.normal(np.mean(y_tilde), math.sqrt(sigma2 / n)))


def _bounded(target, bounds):
    lo, hi = bounds

    def wrapped(theta: float) -> float:
        if theta < lo or theta > hi:
            return -math.inf
        return target(theta)

    return wrapped


class GibbsSampler:
    """Runs one chain; see :func:`run_chain` for the usual entry point."""

    def __init__(
        self,
        model: GibbsModel,
        rng: np.random.Generator,
        start: ChainState | None = None,
    ):
        self.model = model
        self.rng = rng
        self.slice_evals: dict[str, int] = {"sigma2": 0, "lambda": 0, "tau": 0, "xi": 0}
        self.state = start if start is not None else self._initial_state()
        self._fitted = [t.z @ b for t, b in zip(model.terms, self.state.beta)]
        self._resid = model.y - self.state.beta0 - sum(
            self._fitted, np.zeros(model.n_obs)
        )

    # ------------------------------------------------------------------ setup

    def _initial_state(self) -> ChainState:
        """Penalized least squares start with all scales at one."""
        m = self.model
        beta0 = float(np.mean(m.y)) if (m.intercept and m.n_obs) else 0.0
        resid = m.y - beta0
        betas = []
        for t in m.terms:
            qstar = t.ztz + t.prior_precision(1.0, 1.0, 1.0)
            b = solve_spd(qstar, t.z.T @ resid)
            if m.constrain:
                correction = solve_spd(qstar, np.ones(t.n_coef))
                b = b - correction * (b.sum() / correction.sum())
            betas.append(b)
            resid = resid - t.z @ b
        if m.n_obs > 1:
            sigma2 = max(float(np.var(resid)), 1e-8)
        else:
            sigma2 = 1.0
        return ChainState(
            beta0=beta0,
            beta=betas,
            lam=[1.0] * len(m.terms),
            tau=[1.0] * len(m.terms),
            xi=m.fixed_xi if m.fixed_xi is not None else 1.0,
            sigma2=sigma2,
        )

    # --------------------------------------------------------------- coefficients

    def term_conditional(self, idx: int) -> tuple[np.ndarray, np.ndarray]:
        """Posterior precision and linear term of one term's full conditional."""
        m, s = self.model, self.state
        t = m.terms[idx]
        y_tilde = self._resid + self._fitted[idx]
        inv_s2 = 1.0 / s.sigma2
        qstar = inv_s2 * t.ztz + t.prior_precision(s.lam[idx], s.tau[idx], s.sigma2)
        return qstar, inv_s2 * (t.z.T @ y_tilde)

    def update_term(self, idx: int) -> np.ndarray:
        m = self.model
        qstar, linear = self.term_conditional(idx)
        draw = sample_gaussian_precision(qstar, linear, self.rng)
        if m.constrain:
            draw = constrain_to_zero_sum(draw, qstar)
        new_fit = m.terms[idx].z @ draw
        self._resid = self._resid - (new_fit - self._fitted[idx])
        self._fitted[idx] = new_fit
        self.state.beta[idx] = draw
        return draw

    def _update_intercept(self) -> None:
        s = self.state
        y_tilde = self._resid + s.beta0
        new_beta0 = update_intercept(y_tilde, s.sigma2, self.rng)
        self._resid = self._resid - (new_beta0 - s.beta0)
        s.beta0 = new_beta0

    # --------------------------------------------------------------------- scales

    def _slice(self, name: str, current: float, target, bounds) -> float:
        evals = 0

        def counting(theta: float) -> float:
            nonlocal evals
            evals += 1
            return target(theta)

        try:
            value = slice_update_log(
                current, _bounded(counting, bounds), self.model.slice_cfg, self.rng
            )
        except SliceFailure as exc:
            raise SliceFailure(f"{name}: {exc}") from exc
        finally:
            self.slice_evals[name.split(".")[0]] = (
                self.slice_evals.get(name.split(".")[0], 0) + evals
            )
        return value

    def _term_quadratics(self, idx: int) -> tuple[float, float]:
        t, b = self.model.terms[idx], self.state.beta[idx]
        bkb = float(b @ (t.penalty @ b))
        bfb = float(b @ (t.f @ b)) if t.f is not None else 0.0
        return bfb, bkb

    def update_scales(self) -> None:
        m, s = self.model, self.state
        quads = [self._term_quadratics(i) for i in range(len(m.terms))]
        rss = float(self._resid @ self._resid)
        n = m.n_obs

        def sigma2_target(theta: float) -> float:
            sigma2 = math.exp(theta)
            val = -0.5 * n * theta - 0.5 * rss / sigma2
            val += log_inverse_gamma(sigma2, m.a0, m.b0) + theta
            for i in m.shrinkage_indices:
                t = m.terms[i]
                bfb, bkb = quads[i]
                q = t.prior_precision(s.lam[i], s.tau[i], sigma2)
                val += half_log_pdet(q, t.null_basis)
                val -= 0.5 * (
                    bfb / (sigma2 * s.lam[i] ** 2) + bkb / s.tau[i] ** 2
                )
            return val

        s.sigma2 = self._slice("sigma2", s.sigma2, sigma2_target, SIGMA2_BOUNDS)

        for i, t in enumerate(m.terms):
            bfb, bkb = quads[i]
            if t.prior_kind == SHRINKAGE:
                xi_tilde = s.xi / t.sigma_ref

                def lam_target(theta: float, i=i, t=t, bfb=bfb, bkb=bkb, xt=xi_tilde):
                    lam = math.exp(theta)
                    q = t.prior_precision(lam, s.tau[i], s.sigma2)
                    val = half_log_pdet(q, t.null_basis)
                    val -= 0.5 * (bfb / (s.sigma2 * lam * lam) + bkb / s.tau[i] ** 2)
                    return val + log_half_cauchy(lam, xt) + theta

                s.lam[i] = self._slice(f"lambda.{t.name}", s.lam[i], lam_target, LAMBDA_BOUNDS)

                def tau_target(theta: float, i=i, t=t, bfb=bfb, bkb=bkb):
                    tau = math.exp(theta)
                    q = t.prior_precision(s.lam[i], tau, s.sigma2)
                    val = half_log_pdet(q, t.null_basis)
                    val -= 0.5 * (
                        bfb / (s.sigma2 * s.lam[i] ** 2) + bkb / (tau * tau)
                    )
                    return val + log_half_cauchy(tau, t.nu) + theta

                s.tau[i] = self._slice(f"tau.{t.name}", s.tau[i], tau_target, TAU_BOUNDS)
            else:
                # conjugate inverse-gamma update of the P-spline variance
                shape = t.tau2_a + 0.5 * t.penalty_rank
                scale = t.tau2_b + 0.5 * bkb
                tau2 = max(scale / self.rng.gamma(shape), TAU2_FLOOR)
                s.tau[i] = math.sqrt(tau2)

        if m.fixed_xi is None and m.shrinkage_indices:

            def xi_target(theta: float) -> float:
                xi = math.exp(theta)
                val = log_half_cauchy(xi, m.xi0) + theta
                for i in m.shrinkage_indices:
                    val += log_half_cauchy(s.lam[i], xi / m.terms[i].sigma_ref)
                return val

            s.xi = self._slice("xi", s.xi, xi_target, XI_BOUNDS)

    # ----------------------------------------------------------------------- run

    def sweep(self, update_scale_params: bool = True) -> None:
        """One full Gibbs sweep: intercept, every term's coefficients, scales."""
        if self.model.intercept and self.model.n_obs:
            self._update_intercept()
        for idx in range(len(self.model.terms)):
            self.update_term(idx)
        if update_scale_params:
            self.update_scales()
        self.state.iteration += 1

    def run(
        self, n_iter: int, warmup: int, thin: int = 1, freeze_scales: bool = False
    ) -> ChainDraws:
        if not n_iter > warmup >= 0:
            raise DomainError("need n_iter > warmup >= 0")
        if thin < 1:
            raise DomainError("thin must be >= 1")
        m = self.model
        n_keep = (n_iter - warmup) // thin
        L = len(m.terms)
        out_beta0 = np.empty(n_keep)
        out_beta = [np.empty((n_keep, t.n_coef)) for t in m.terms]
        out_lam = np.full((n_keep, L), np.nan)
        out_tau = np.empty((n_keep, L))
        out_xi = np.empty(n_keep)
        out_sigma2 = np.empty(n_keep)
        kept = 0
        try:
            for it in range(1, n_iter + 1):
                self.sweep(update_scale_params=not freeze_scales)
                if it > warmup and (it - warmup) % thin == 0:
                    s = self.state
                    out_beta0[kept] = s.beta0
                    for l in range(L):
                        out_beta[l][kept] = s.beta[l]
                        out_tau[kept, l] = s.tau[l]
                        if m.terms[l].prior_kind == SHRINKAGE:
                            out_lam[kept, l] = s.lam[l]
                    out_xi[kept] = s.xi
                    out_sigma2[kept] = s.sigma2
                    kept += 1
        except Exception as exc:
            exc.chain_state = self.state  # debugging aid for failed chains
            raise
        return ChainDraws(
            beta0=out_beta0,
            beta=out_beta,
            lam=out_lam,
            tau=out_tau,
            xi=out_xi,
            sigma2=out_sigma2,
            kappa=1.0 / (1.0 + out_lam**2),
            slice_evals=dict(self.slice_evals),
            final_state=self.state,
        )


def run_chain(
    model: GibbsModel,
    n_iter: int,
    warmup: int,
    thin: int = 1,
    seed: int | np.random.SeedSequence = 0,
    start: ChainState | None = None,
    freeze_scales: bool = False,
) -> ChainDraws:
    """Run a single chain: full sweeps of intercept, coefficients, scales."""
    rng = np.random.default_rng(seed)
    sampler = GibbsSampler(model, rng, start=start)
    return sampler.run(n_iter, warmup, thin, freeze_scales=freeze_scales)


def log_posterior(model: GibbsModel, state: ChainState) -> float:
    """Joint log density (up to an additive constant) at one state."""
    m, s = model, state
    eta = s.beta0 + sum(
        (t.z @ b for t, b in zip(m.terms, s.beta)), np.zeros(m.n_obs)
    )
    resid = m.y - eta
    val = -0.5 * m.n_obs * math.log(s.sigma2) - 0.5 * float(resid @ resid) / s.sigma2
    val += log_inverse_gamma(s.sigma2, m.a0, m.b0)
    for i, t in enumerate(m.terms):
        b = s.beta[i]
        if t.prior_kind == SHRINKAGE:
            q = t.prior_precision(s.lam[i], s.tau[i], s.sigma2)
            val += half_log_pdet(q, t.null_basis) - 0.5 * float(b @ (q @ b))
            val += log_half_cauchy(s.lam[i], s.xi / t.sigma_ref)
            val += log_half_cauchy(s.tau[i], t.nu)
        else:
            tau2 = s.tau[i] ** 2
            val += -0.5 * t.penalty_rank * math.log(tau2)
            val += -0.5 * float(b @ (t.penalty @ b)) / tau2
            val += log_inverse_gamma(tau2, t.tau2_a, t.tau2_b)
    if m.fixed_xi is None and m.shrinkage_indices:
        val += log_half_cauchy(s.xi, m.xi0)
    return val


def effective_sample_size(chain: np.ndarray) -> float:
    """ESS from the initial positive sequence of autocorrelations."""
    x = np.asarray(chain, dtype=float)
    n = x.size
    if n < 3:
        return float(n)
    x = x - x.mean()
    var = float(x @ x) / n
    if var <= 0:
        return 1.0
    acf_sum = 0.0
    for lag in range(1, min(n // 2, 1000)):
        rho = float(x[:-lag] @ x[lag:]) / ((n - lag) * var)
        if rho <= 0:
            break
        acf_sum += rho
    return float(n / (1.0 + 2.0 * acf_sum))
