"""Bayesian penalized splines with adaptive shrinkage toward parametric
subspaces, estimated by Gibbs-within-slice MCMC."""

from .basis import SplineBasis, eval_design, eval_design_deriv2, make_basis, rw2_penalty
from .exceptions import (
    ConfigError,
    DomainError,
    GridMismatch,
    IncompleteDay,
    MalformedRow,
    NoConvergence,
    NotPositiveDefinite,
    OutOfDomain,
    QuadratureFailure,
    RankDeficient,
    SliceFailure,
    SmoothShrinkError,
)
from .metrics import distance_to_null, rmse_curve
from .model import (
    PosteriorResult,
    SmoothTerm,
    SubspaceShrinkageRegressor,
    fit_pspline_baseline,
    summarize_kappa,
)
from .priors import calibrate_nu, kappa
from .samplers import SliceConfig
from .subspace import SubspaceSpec, custom, polynomial, projections, sigma_ref, trig

__all__ = [
    "ConfigError",
    "DomainError",
    "GridMismatch",
    "IncompleteDay",
    "MalformedRow",
    "NoConvergence",
    "NotPositiveDefinite",
    "OutOfDomain",
    "PosteriorResult",
    "QuadratureFailure",
    "RankDeficient",
    "SliceConfig",
    "SliceFailure",
    "SmoothShrinkError",
    "SmoothTerm",
    "SplineBasis",
    "SubspaceShrinkageRegressor",
    "SubspaceSpec",
    "calibrate_nu",
    "custom",
    "distance_to_null",
    "eval_design",
    "eval_design_deriv2",
    "fit_pspline_baseline",
    "kappa",
    "make_basis",
    "polynomial",
    "projections",
    "rmse_curve",
    "rw2_penalty",
    "sigma_ref",
    "summarize_kappa",
    "trig",
]

__version__ = "0.1.0"
