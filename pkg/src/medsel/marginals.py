"""Exact marginal likelihoods and the limiting projection under near-duplicates.

All marginal values are carried in log space.  Two modes exist and are never
comparable: a Gaussian log-density under a known error variance, and a log
Bayes factor against the null model when sigma^2 gets the 1/sigma^2 prior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .core import (
    CoefPrior,
    DesignStats,
    GPrior,
    IndependentNormal,
    JeffreysSigma,
    Model,
    RescaledG,
    SpikeSlab,
)
from .errors import CollinearityError, DomainError, NumericError

DENSITY = "density"
BAYES_FACTOR = "bayes_factor"

#: x is declared collinear with the conditioning block when the residual
#: fraction x'(I-P_B)x / ||x||^2 falls below this.
COLLINEARITY_TOL = 1e-10

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class MarginalValue:
    log_value: float
    mode: str

    def __post_init__(self):
        if self.mode not in (DENSITY, BAYES_FACTOR):
            raise DomainError(f"unknown marginal mode {self.mode!r}")
        if not math.isfinite(self.log_value):
            raise NumericError("marginal likelihood is not finite")


def _orthonormal_basis(b: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the column space; requires full column rank."""
    if b.shape[1] == 0:
        return b
    q, r = np.linalg.qr(b)
    d = np.abs(np.diag(r))
    if d.min() <= 1e-12 * max(d.max(), 1.0):
        raise DomainError("conditioning block B is rank deficient")
    return q


def limiting_projection(b: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Limit of the fitted-value projection when x is replicated with
    vanishing perturbations: P_B + rr'/(r'r) with r = (I - P_B)x."""
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    if b.ndim != 2 or x.ndim != 1 or b.shape[0] != x.shape[0]:
        raise DomainError("B must be n x p and x an n-vector")
    qb = _orthonormal_basis(b)
    r = x - qb @ (qb.T @ x) if qb.shape[1] else x.copy()
    rtr = float(r @ r)
    xtx = float(x @ x)
    if xtx == 0.0 or rtr / xtx < COLLINEARITY_TOL:
        raise CollinearityError("x lies in span(B)")
    p = np.outer(r, r) / rtr
    if qb.shape[1]:
        p += qb @ qb.T
    return p


def limiting_marginal(
    b: np.ndarray, x: np.ndarray, y: np.ndarray, g: float, sigma2: float
) -> float:
    """Log of the limiting g-prior marginal N(y; 0, sigma^2(I + g P)) where
    P = limiting_projection(B, x).  This is the common marginal of every
    model in the collective built on (B, x)."""
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    proj = limiting_projection(b, x)
    rank = (b.shape[1] if b.size else 0) + 1
    ypy = float(y @ proj @ y)
    yty = float(y @ y)
    return (
        -0.5 * n * (_LOG_2PI + math.log(sigma2))
        - 0.5 * rank * math.log1p(g)
        - (yty - g / (1.0 + g) * ypy) / (2.0 * sigma2)
    )


def _duplicate_groups(stats: DesignStats, idx: list[int]) -> list[list[int]]:
    """Group included indices whose full gram column and xty entry agree exactly.

    Exact equality is deliberate: only duplicates by construction qualify for
    the pseudo-inverse path."""
    groups: dict[bytes, list[int]] = {}
    for i in idx:
        key = stats.gram[:, i].tobytes() + np.float64(stats.xty[i]).tobytes()
        groups.setdefault(key, []).append(i)
    return list(groups.values())


def _fit_quad_and_rank(stats: DesignStats, model: Model) -> tuple[float, int]:
    """Return (z' (X_g'X_g)^+ z, rank) for the model's design block.

    The non-singular path is a Cholesky solve.  Exactly duplicated columns
    are collapsed to unique representatives (the span is unchanged); any
    other singularity is an error rather than a silent pseudo-inverse.
    """
    if model.size == 0:
        return 0.0, 0
    idx = list(model.indices)
    gram = stats.gram[np.ix_(idx, idx)]
    z = stats.xty[idx]
    try:
        c, low = sla.cho_factor(gram, lower=True, check_finite=False)
        w = sla.cho_solve((c, low), z, check_finite=False)
        return float(z @ w), len(idx)
    except sla.LinAlgError:
        pass
    groups = _duplicate_groups(stats, idx)
    if len(groups) == len(idx):
        raise NumericError(
            f"gram submatrix for model {model} is singular without duplicate columns"
        )
    uniq = [grp[0] for grp in groups]
    gram_u = stats.gram[np.ix_(uniq, uniq)]
    z_u = stats.xty[uniq]
    try:
        c, low = sla.cho_factor(gram_u, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise NumericError(
            f"gram submatrix for model {model} is singular beyond duplicate columns"
        ) from exc
    w = sla.cho_solve((c, low), z_u, check_finite=False)
    return float(z_u @ w), len(uniq)


def _logdet_i_plus(scaled: np.ndarray) -> float:
    """log det(I + S) for symmetric PSD S, via Cholesky."""
    m = scaled.shape[0]
    if m == 0:
        return 0.0
    try:
        c = np.linalg.cholesky(np.eye(m) + 0.5 * (scaled + scaled.T))
    except np.linalg.LinAlgError as exc:
        raise NumericError("marginal covariance is not positive definite") from exc
    return 2.0 * float(np.log(np.diag(c)).sum())


def _gaussian_shell(n: int, sigma2: float, logdet: float, quad: float) -> float:
    return -0.5 * n * (_LOG_2PI + math.log(sigma2)) - 0.5 * logdet - quad / (2.0 * sigma2)


def marginal_likelihood(stats: DesignStats, model: Model, prior: CoefPrior) -> MarginalValue:
    """Exact log marginal m(y | gamma) under the given coefficient prior."""
    if model.q != stats.q:
        raise DomainError(f"model is over {model.q} covariates, stats have {stats.q}")
    n, yty = stats.n, stats.yty
    if isinstance(prior, GPrior):
        ssr, rank = _fit_quad_and_rank(stats, model)
        g = prior.g
        if isinstance(prior.sigma, JeffreysSigma):
            if yty <= 0:
                raise NumericError("yty must be positive in Bayes-factor mode")
            r2 = ssr / yty
            log_bf = 0.5 * (n - rank) * math.log1p(g) - 0.5 * n * math.log1p(g * (1.0 - r2))
            return MarginalValue(log_bf, BAYES_FACTOR)
        s2 = prior.sigma.sigma2
        quad = yty - g / (1.0 + g) * ssr
        return MarginalValue(
            _gaussian_shell(n, s2, rank * math.log1p(g), quad), DENSITY
        )
    if isinstance(prior, IndependentNormal):
        s2, v = prior.sigma.sigma2, prior.variance
        if model.size == 0:
            return MarginalValue(_gaussian_shell(n, s2, 0.0, yty), DENSITY)
        gram = stats.gram_sub(model)
        z = stats.xty_sub(model)
        logdet = _logdet_i_plus((v / s2) * gram)
        shrunk = sla.solve(
            gram + (s2 / v) * np.eye(model.size), z, assume_a="pos", check_finite=False
        )
        return MarginalValue(
            _gaussian_shell(n, s2, logdet, yty - float(z @ shrunk)), DENSITY
        )
    if isinstance(prior, SpikeSlab):
        s2 = prior.sigma.sigma2
        v = np.where(np.array(model.bits, dtype=bool), prior.v1, prior.v0)
        root = np.sqrt(v)
        logdet = _logdet_i_plus((root[:, None] * stats.gram * root[None, :]) / s2)
        shrunk = sla.solve(
            stats.gram + s2 * np.diag(1.0 / v),
            np.asarray(stats.xty),
            assume_a="pos",
            check_finite=False,
        )
        return MarginalValue(
            _gaussian_shell(n, s2, logdet, yty - float(stats.xty @ shrunk)), DENSITY
        )
    if isinstance(prior, RescaledG):
        return MarginalValue(_rescaled_g_log_marginal(stats, model, prior), DENSITY)
    raise DomainError(f"unsupported coefficient prior {prior!r}")


def transformed_scores(stats: DesignStats) -> np.ndarray:
    """z* = T^{-T} X'Y, the scores of the orthonormalized design X T^{-1}
    where T is the upper Cholesky factor of the gram (T'T = gram)."""
    try:
        t = sla.cholesky(np.asarray(stats.gram), lower=False)
    except sla.LinAlgError as exc:
        raise NumericError("gram must be positive definite for the nested transform") from exc
    return sla.solve_triangular(t, np.asarray(stats.xty), trans="T", lower=False)


def _rescaled_g_log_marginal(stats: DesignStats, model: Model, prior: RescaledG) -> float:
    if len(prior.d) != stats.q:
        raise DomainError("RescaledG needs one variance per covariate")
    s2 = prior.sigma.sigma2
    zstar = transformed_scores(stats)
    idx = list(model.indices)
    d = np.array(prior.d)[idx]
    zs = zstar[idx]
    logdet = float(np.log1p(d / s2).sum())
    quad = stats.yty - float((zs * zs * d / (d + s2)).sum())
    return _gaussian_shell(stats.n, s2, logdet, quad)


def marginal_factor_x(
    stats: DesignStats, gamma1: Model, x_index: int, g: float, sigma2: float
) -> float:
    """Multiplicative factor m(y|x) with m(y|gamma1, x) = m(y|gamma1) m(y|x):

        (1+g)^{-1/2} exp{ g/(2 sigma^2 (1+g)) [y'(I-P_B)x]^2 / x'(I-P_B)x }

    computed from sufficient statistics alone."""
    if gamma1.q != stats.q:
        raise DomainError("gamma1 must be over the same covariates as stats")
    if gamma1.includes(x_index):
        raise DomainError("x_index must not belong to gamma1")
    if not g > 0:
        raise DomainError("g must be positive")
    gram, xty = np.asarray(stats.gram), np.asarray(stats.xty)
    xtx = gram[x_index, x_index]
    if gamma1.size:
        idx = list(gamma1.indices)
        gb = gram[np.ix_(idx, idx)]
        cross = gram[idx, x_index]
        try:
            solved = sla.solve(gb, np.column_stack([cross, xty[idx]]),
                               assume_a="pos", check_finite=False)
        except sla.LinAlgError as exc:
            raise NumericError("gamma1 gram block is singular") from exc
        resid_xx = xtx - float(cross @ solved[:, 0])
        resid_yx = xty[x_index] - float(cross @ solved[:, 1])
    else:
        resid_xx = float(xtx)
        resid_yx = float(xty[x_index])
    if xtx <= 0 or resid_xx / xtx < COLLINEARITY_TOL:
        raise CollinearityError("x lies in span(B_gamma1)")
    log_val = -0.5 * math.log1p(g) + g / (2.0 * sigma2 * (1.0 + g)) * resid_yx**2 / resid_xx
    return math.exp(log_val)
