"""Parametric target subspaces and the projections built from them.

A subspace is described by a :class:`SubspaceSpec` (polynomial, trigonometric
or custom column expressions); evaluated on the training covariate it yields
a column matrix S whose span is the space the functional effect is shrunk
toward. P0 projects onto span(S), P1 onto its orthogonal complement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, RankDeficient
from .linalg import generalized_inverse

RANK_TOL = 1e-8  # singular values below RANK_TOL * max are declared dependent

# names usable inside custom column expressions
_EXPR_NAMES = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "pi": math.pi,
    "e": math.e,
}


@dataclass(frozen=True)
class SubspaceSpec:
    """Description of the parametric null space for one smooth term.

    kind is one of "polynomial" (degree p, includes intercept),
    "trig" (order and period, includes intercept) or "custom"
    (a tuple of expressions in ``x`` evaluated element-wise).
    """

    kind: str
    degree: int = 1
    order: int = 1
    period: float = 1.0
    columns: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("polynomial", "trig", "custom"):
            raise DomainError(f"unknown subspace kind: {self.kind!r}")
        if self.kind == "polynomial" and self.degree < 0:
            raise DomainError("polynomial degree must be >= 0")
        if self.kind == "trig":
            if self.order < 1:
                raise DomainError("trig order must be >= 1")
            if self.period <= 0:
                raise DomainError("trig period must be positive")
        if self.kind == "custom" and not self.columns:
            raise DomainError("custom subspace needs at least one column expression")

    @property
    def n_columns(self) -> int:
        if self.kind == "polynomial":
            return self.degree + 1
        if self.kind == "trig":
            return 2 * self.order + 1
        return len(self.columns)

    def label(self) -> str:
        if self.kind == "polynomial":
            return f"polynomial:{self.degree}"
        if self.kind == "trig":
            return f"trig:{self.order}:{self.period:g}"
        return "custom:" + ";".join(self.columns)

    @staticmethod
    def from_string(text: str) -> "SubspaceSpec":
        """Parse "polynomial:p", "trig:order:period" or "custom:e1;e2;..."."""
        parts = text.strip().split(":", 1)
        kind = parts[0]
        rest = parts[1] if len(parts) > 1 else ""
        if kind == "polynomial":
            return SubspaceSpec(kind="polynomial", degree=int(rest))
        if kind == "trig":
            fields = rest.split(":")
            if len(fields) != 2:
                raise DomainError(f"trig spec needs order and period: {text!r}")
            return SubspaceSpec(kind="trig", order=int(fields[0]), period=float(fields[1]))
        if kind == "custom":
            cols = tuple(c.strip() for c in rest.split(";") if c.strip())
            return SubspaceSpec(kind="custom", columns=cols)
        raise DomainError(f"unknown subspace kind: {kind!r}")


def polynomial(degree: int) -> SubspaceSpec:
    return SubspaceSpec(kind="polynomial", degree=degree)


def trig(order: int, period: float) -> SubspaceSpec:
    return SubspaceSpec(kind="trig", order=order, period=period)


def custom(*columns: str) -> SubspaceSpec:
    return SubspaceSpec(kind="custom", columns=tuple(columns))


def _eval_expression(expr: str, x: np.ndarray) -> np.ndarray:
    # config files are trusted input; expressions only see x and math names
    namespace = dict(_EXPR_NAMES)
    namespace["x"] = x
    try:
        value = eval(expr, {"__builtins__": {}}, namespace)  # noqa: S307
    except Exception as exc:
        raise DomainError(f"cannot evaluate column expression {expr!r}: {exc}") from exc
    return np.broadcast_to(np.asarray(value, dtype=float), x.shape).copy()


def build_columns(spec: SubspaceSpec, x: np.ndarray) -> np.ndarray:
    """Evaluate the subspace columns element-wise on the covariate."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size == 0:
        raise DomainError("covariate vector is empty")
    if spec.kind == "polynomial":
        cols = [x**p for p in range(spec.degree + 1)]
    elif spec.kind == "trig":
        base = 2.0 * np.pi * x / spec.period
        cols = [np.ones_like(x)]
        for omega in range(1, spec.order + 1):
            cols.append(np.cos(omega * base))
            cols.append(np.sin(omega * base))
    else:
        cols = [_eval_expression(expr, x) for expr in spec.columns]
    s = np.column_stack(cols)
    sv = np.linalg.svd(s, compute_uv=False)
    if sv[-1] <= RANK_TOL * sv[0]:
        raise RankDeficient(
            f"subspace {spec.label()!r} is rank deficient on this covariate"
        )
    return s


@dataclass(frozen=True)
class ProjectionPair:
    """Orthogonal projections onto span(S) and its complement."""

    p0: np.ndarray
    p1: np.ndarray


def projections(s: np.ndarray) -> ProjectionPair:
    """P0 = S (S'S)^-1 S' and P1 = I - P0, via a thin orthonormal factor.

    Using the Q-factor instead of the normal equations keeps near-collinear
    trigonometric columns numerically stable.
    """
    s = np.atleast_2d(np.asarray(s, dtype=float))
    sv = np.linalg.svd(s, compute_uv=False)
    if sv[-1] <= RANK_TOL * sv[0]:
        raise RankDeficient("projection requires S with full column rank")
    q, _ = np.linalg.qr(s)
    p0 = q @ q.T
    p0 = 0.5 * (p0 + p0.T)
    p1 = np.eye(s.shape[0]) - p0
    return ProjectionPair(p0=p0, p1=0.5 * (p1 + p1.T))


def sigma_ref(f: np.ndarray) -> float:
    """Geometric-mean marginal standard deviation implied by a PSD precision.

    Takes the generalized inverse of F and averages 0.5*log of its diagonal,
    skipping entries that are exact null-space zeros (below 1e-12): including
    them would force the geometric mean to zero.
    """
    pinv, _ = generalized_inverse(f)
    diag = np.diag(pinv)
    keep = diag > 1e-12
    if not np.any(keep):
        raise DomainError("all marginal variances vanish under the pseudo-inverse")
    return float(np.exp(np.mean(0.5 * np.log(diag[keep]))))
