"""Posterior means, predictive risk, model selection, and risk decompositions.

The risk of selecting a single model is the posterior expected squared
prediction loss R(gamma) = (H_g bhat_g - bbar)' Q (H_g bhat_g - bbar) with
Q = X'X.  The optimal model minimizes it; the MPM keeps the covariates with
marginal inclusion above 1/2; the HPM maximizes the posterior probability.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .core import (
    CoefPrior,
    DesignStats,
    GPrior,
    IndependentNormal,
    Model,
    RescaledG,
    SpikeSlab,
    embed_coefficients,
)
from .errors import ConvergenceError, DomainError, NumericError
from .marginals import transformed_scores
from .posterior import PosteriorSummary


class BoundaryWarning(UserWarning):
    """A marginal inclusion probability sits exactly on 1/2."""


@dataclass(frozen=True)
class PosteriorMeans:
    """Conditional posterior mean vectors (embedded in R^q) and their average."""

    models: tuple[Model, ...]
    conditional: np.ndarray  # shape (n_models, q)
    overall: np.ndarray      # shape (q,)

    def __post_init__(self):
        for name in ("conditional", "overall"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def conditional_for(self, model: Model) -> np.ndarray:
        for m, row in zip(self.models, self.conditional):
            if m == model:
                return row
        raise DomainError(f"model {model} not present")


def _gprior_mean(stats: DesignStats, model: Model, g: float) -> np.ndarray:
    """g/(1+g) times the (pseudo-inverse) least-squares fit, embedded in R^q."""
    if model.size == 0:
        return np.zeros(stats.q)
    idx = list(model.indices)
    gram = stats.gram[np.ix_(idx, idx)]
    z = stats.xty[idx]
    shrink = g / (1.0 + g)
    try:
        coef = sla.solve(gram, z, assume_a="pos", check_finite=False)
        return embed_coefficients(model, shrink * coef)
    except sla.LinAlgError:
        pass
    # exact duplicates: the minimum-norm solution splits a group's weight evenly
    groups: dict[bytes, list[int]] = {}
    for i in idx:
        key = stats.gram[:, i].tobytes() + np.float64(stats.xty[i]).tobytes()
        groups.setdefault(key, []).append(i)
    if len(groups) == len(idx):
        raise NumericError(f"gram submatrix for model {model} is singular")
    uniq = [grp[0] for grp in groups.values()]
    try:
        w = sla.solve(
            stats.gram[np.ix_(uniq, uniq)], stats.xty[uniq],
            assume_a="pos", check_finite=False,
        )
    except sla.LinAlgError as exc:
        raise NumericError(f"model {model} is singular beyond duplicates") from exc
    out = np.zeros(stats.q)
    for wval, grp in zip(w, groups.values()):
        for i in grp:
            out[i] = shrink * wval / len(grp)
    return out


def posterior_means(
    stats: DesignStats, post: PosteriorSummary, prior: CoefPrior
) -> PosteriorMeans:
    """Conditional posterior means per model and the model-averaged mean.

    Under JeffreysSigma the g-prior means are the same scale-free shrinkage
    estimates, so no sigma^2 enters.
    """
    if post.q != stats.q:
        raise DomainError("posterior and stats disagree on q")
    rows = np.zeros((len(post.models), stats.q))
    if isinstance(prior, GPrior):
        for i, m in enumerate(post.models):
            rows[i] = _gprior_mean(stats, m, prior.g)
    elif isinstance(prior, IndependentNormal):
        ridge = prior.sigma.sigma2 / prior.variance
        for i, m in enumerate(post.models):
            if m.size == 0:
                continue
            gram = stats.gram_sub(m)
            coef = sla.solve(
                gram + ridge * np.eye(m.size), stats.xty_sub(m),
                assume_a="pos", check_finite=False,
            )
            rows[i] = embed_coefficients(m, coef)
    elif isinstance(prior, SpikeSlab):
        s2 = prior.sigma.sigma2
        gram = np.asarray(stats.gram)
        z = np.asarray(stats.xty)
        for i, m in enumerate(post.models):
            v = np.where(np.array(m.bits, dtype=bool), prior.v1, prior.v0)
            rows[i] = sla.solve(
                gram + s2 * np.diag(1.0 / v), z, assume_a="pos", check_finite=False
            )
    elif isinstance(prior, RescaledG):
        if len(prior.d) != stats.q:
            raise DomainError("RescaledG needs one variance per covariate")
        s2 = prior.sigma.sigma2
        zstar = transformed_scores(stats)
        t = sla.cholesky(np.asarray(stats.gram), lower=False)
        d = np.array(prior.d)
        for i, m in enumerate(post.models):
            bstar = np.zeros(stats.q)
            idx = list(m.indices)
            if idx:
                bstar[idx] = zstar[idx] * d[idx] / (d[idx] + s2)
            rows[i] = sla.solve_triangular(t, bstar, lower=False)
    else:
        raise DomainError(f"unsupported coefficient prior {prior!r}")
    overall = np.asarray(post.probs) @ rows
    return PosteriorMeans(models=post.models, conditional=rows, overall=overall)


@dataclass(frozen=True)
class RiskReport:
    models: tuple[Model, ...]
    risk: np.ndarray
    optimal: Model
    mpm: Model
    hpm: Model
    relative: np.ndarray
    boundary_indices: tuple[int, ...] = ()

    def __post_init__(self):
        for name in ("risk", "relative"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def risk_for(self, model: Model) -> float:
        for m, r in zip(self.models, self.risk):
            if m == model:
                return float(r)
        raise DomainError(f"model {model} not present")

    def relative_for(self, model: Model) -> float:
        for m, r in zip(self.models, self.relative):
            if m == model:
                return float(r)
        raise DomainError(f"model {model} not present")


def _argbest(models, key_values, rel_tol: float = 1e-12) -> Model:
    """Minimizer with ties broken by parsimony (smaller |gamma|), then
    lexicographic bits.  Values within rel_tol of the minimum count as tied,
    so mathematically equal candidates (exact duplicates) are not separated
    by last-ulp rounding noise."""
    values = np.asarray(key_values, dtype=float)
    vmin = values.min()
    cut = vmin + rel_tol * max(abs(vmin), 1e-300)
    tied = [m for m, v in zip(models, values) if v <= cut]
    return min(tied, key=lambda m: (m.size, m.mask))


def risk_report(
    stats: DesignStats, post: PosteriorSummary, means: PosteriorMeans
) -> RiskReport:
    """Per-model risks plus the optimal, median probability, and highest
    posterior models."""
    if means.models != post.models:
        raise DomainError("posterior and means cover different model lists")
    gram = np.asarray(stats.gram)
    diffs = means.conditional - means.overall[None, :]
    risk = np.einsum("ij,jk,ik->i", diffs, gram, diffs)
    risk = np.maximum(risk, 0.0)
    optimal = _argbest(post.models, risk)
    hpm = _argbest(post.models, -np.asarray(post.probs))
    incl = np.asarray(post.incl)
    boundary = tuple(int(i) for i in np.nonzero(incl == 0.5)[0])
    if boundary:
        warnings.warn(
            f"inclusion probability exactly 1/2 for covariates {boundary}; "
            "they are excluded from the MPM",
            BoundaryWarning,
        )
    mpm = Model.from_bits([1 if v > 0.5 else 0 for v in incl])
    r_opt = float(risk[post.models.index(optimal)])
    with np.errstate(divide="ignore", invalid="ignore"):
        relative = np.where(risk == r_opt, 1.0, risk / r_opt if r_opt > 0 else np.inf)
    return RiskReport(
        models=post.models,
        risk=risk,
        optimal=optimal,
        mpm=mpm,
        hpm=hpm,
        relative=relative,
        boundary_indices=boundary,
    )


def orthogonal_duplicate_risk(
    z_head: np.ndarray,
    z_dup: float,
    g: float,
    post: PosteriorSummary,
    prior_kind: str,
) -> dict[Model, tuple[float, float]]:
    """Closed-form risk split R(gamma) = R1(gamma1) + R2(gamma2) on an
    orthonormal design augmented with k exact copies of one predictor.

    ``prior_kind="gprior"`` uses the pseudo-inverse g-prior forms; the copies
    act as one variable through pi(gamma2 != 0 | Y).  ``"independent"`` uses
    the N(0, sigma^2 I) prior forms, where the copy block contributes through
    the |gamma2|/(1+|gamma2|) functional.
    """
    z_head = np.asarray(z_head, dtype=float)
    p = z_head.shape[0]
    if post.block != p:
        raise DomainError(
            "posterior must carry the duplicate-block boundary equal to len(z_head)"
        )
    k = post.q - p
    if k < 1:
        raise DomainError("the design must contain at least one duplicate copy")
    if prior_kind not in ("gprior", "independent"):
        raise DomainError("prior_kind must be 'gprior' or 'independent'")
    incl_head = np.asarray(post.incl)[:p]
    out: dict[Model, tuple[float, float]] = {}
    if prior_kind == "gprior":
        shrink2 = (g / (1.0 + g)) ** 2
        pi_coll = float(post.collective)
        for m in post.models:
            g1, g2 = m.split(p)
            bits1 = np.array(g1.bits, dtype=float)
            r1 = shrink2 * float((z_head**2 * (bits1 - incl_head) ** 2).sum())
            r2 = shrink2 * z_dup**2 * (
                (1.0 - pi_coll) ** 2 if g2.size >= 1 else pi_coll**2
            )
            out[m] = (r1, r2)
        return out
    # independent N(0, sigma^2 I): head coordinates shrink by 1/2, the copy
    # block enters through f(j) = j/(1+j)
    sizes2 = np.array([m.split(p)[1].size for m in post.models], dtype=float)
    f = sizes2 / (1.0 + sizes2)
    mu = float(np.asarray(post.probs) @ f)
    for m, fj in zip(post.models, f):
        g1, _ = m.split(p)
        bits1 = np.array(g1.bits, dtype=float)
        r1 = 0.25 * float((z_head**2 * (bits1 - incl_head) ** 2).sum())
        r2 = z_dup**2 * (fj - mu) ** 2
        out[m] = (r1, r2)
    return out


def equicorrelated_risk(
    z: np.ndarray, r: float, post: PosteriorSummary, g: float
) -> dict[Model, float]:
    """Risk under the g-prior on an equicorrelated gram (1-r)I + r 11'.

    Uses first and second posterior moments of gamma: pi = E[gamma|Y] and
    Pi = E[gamma gamma' / (1 - r + r|gamma|) | Y].
    """
    z = np.asarray(z, dtype=float)
    p = z.shape[0]
    if post.q != p:
        raise DomainError("posterior and z disagree on the covariate count")
    if p > 1 and not (-1.0 / (p - 1) < r < 1.0):
        raise DomainError(f"r={r} leaves the positive-definite range for p={p}")
    if p == 1 and not -1.0 < r < 1.0:
        raise DomainError("need |r| < 1")
    probs = np.asarray(post.probs)
    bit_rows = np.array([m.bits for m in post.models], dtype=float)
    sizes = bit_rows.sum(axis=1)
    denoms = 1.0 - r + r * sizes
    pi = np.asarray(post.incl)
    big_pi = np.einsum("m,mi,mj->ij", probs / denoms, bit_rows, bit_rows)
    shrink2 = (g / (1.0 + g)) ** 2
    out: dict[Model, float] = {}
    for m, bits, denom in zip(post.models, bit_rows, denoms):
        bz = (bits - pi) * z - r * (bits * float(bits @ z) / denom - big_pi @ z)
        val = (1.0 - r) * float(bz @ bz) + r * float(bz.sum()) ** 2
        out[m] = shrink2 / (1.0 - r) ** 2 * val
    return out


@dataclass(frozen=True)
class NestedTransform:
    """Upper Cholesky factor T with T'T = gram, plus the back-transformed
    prior covariance T^{-1} diag(d) T^{-T} when d is supplied."""

    t: np.ndarray
    prior_covariance: np.ndarray | None
    note: str

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        t.setflags(write=False)
        object.__setattr__(self, "t", t)
        if self.prior_covariance is not None:
            c = np.array(self.prior_covariance, dtype=float)
            c.setflags(write=False)
            object.__setattr__(self, "prior_covariance", c)


def nested_transform(gram: np.ndarray, d: np.ndarray | None = None) -> NestedTransform:
    """Orthonormalizing transform for nested model sequences.

    With T upper triangular and T'T = gram, the design X* = X T^{-1} has
    identity gram and span(X*_1..X*_j) = span(X_1..X_j) for every j, so the
    forward-nested sequence of models is unchanged.  A diagonal prior diag(d)
    on the transformed coefficients corresponds to the covariance
    T^{-1} diag(d) T^{-T} on the original ones.
    """
    gram = np.asarray(gram, dtype=float)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise DomainError("gram must be square")
    try:
        t = sla.cholesky(gram, lower=False)
    except sla.LinAlgError as exc:
        raise NumericError("gram must be positive definite") from exc
    cov = None
    if d is not None:
        d = np.asarray(d, dtype=float)
        if d.shape != (gram.shape[0],):
            raise DomainError("d must supply one variance per covariate")
        if np.any(d <= 0):
            raise DomainError("prior variances must be positive")
        half = sla.solve_triangular(t, np.diag(np.sqrt(d)), lower=False)
        cov = half @ half.T
    note = (
        "X* = X T^{-1} has identity gram; forward-nested model sequences "
        "(first j covariates) are preserved"
    )
    return NestedTransform(t=t, prior_covariance=cov, note=note)


def kkt_residual(gram: np.ndarray, beta_bar: np.ndarray, lam: float, b: np.ndarray) -> float:
    """Largest violation of the subgradient conditions at b: zero for an
    exact minimizer of 0.5 (b - beta_bar)' gram (b - beta_bar) + lam ||b||_1."""
    grad = np.asarray(gram) @ (np.asarray(b) - np.asarray(beta_bar))
    active = np.asarray(b) != 0.0
    worst = 0.0
    if active.any():
        worst = float(np.abs(grad[active] + lam * np.sign(np.asarray(b)[active])).max())
    if (~active).any():
        worst = max(worst, float(np.maximum(np.abs(grad[~active]) - lam, 0.0).max()))
    return worst


def lasso_solution(
    gram: np.ndarray,
    beta_bar: np.ndarray,
    lam: float,
    *,
    tol: float = 1e-8,
    max_sweeps: int = 100_000,
) -> np.ndarray:
    """Cyclic coordinate descent for
    argmin_b 0.5 (b - beta_bar)' gram (b - beta_bar) + lam ||b||_1.

    Sweeps continue until both the largest coordinate change and the KKT
    subgradient residual fall below ``tol``; the residual check matters on
    ill-conditioned grams where coordinate stalling precedes optimality.
    """
    gram = np.asarray(gram, dtype=float)
    beta_bar = np.asarray(beta_bar, dtype=float)
    q = beta_bar.shape[0]
    if gram.shape != (q, q):
        raise DomainError("gram and beta_bar dimensions disagree")
    if lam < 0:
        raise DomainError("the penalty must be nonnegative")
    target = gram @ beta_bar
    b = np.zeros(q)
    gb = np.zeros(q)  # gram @ b, maintained incrementally
    for sweep in range(max_sweeps):
        delta_max = 0.0
        for i in range(q):
            gii = gram[i, i]
            if gii <= 0.0:
                continue  # PSD gram with zero diagonal: whole row is zero
            rho = target[i] - (gb[i] - gii * b[i])
            new = math.copysign(max(abs(rho) - lam, 0.0), rho) / gii
            step = new - b[i]
            if step != 0.0:
                gb += gram[:, i] * step
                b[i] = new
                delta_max = max(delta_max, abs(step))
        if delta_max < tol and kkt_residual(gram, beta_bar, lam, b) <= tol:
            return b
    raise ConvergenceError(
        f"coordinate descent did not converge in {max_sweeps} sweeps",
        residual=kkt_residual(gram, beta_bar, lam, b),
    )


def lasso_summarize(gram: np.ndarray, beta_bar: np.ndarray, lam: float) -> Model:
    """Support of the L1-penalized summary of the model-averaged coefficients.

    Coefficients below the solver tolerance count as zero; positive penalties
    produce exact zeros, the cutoff only matters for the unpenalized case.
    """
    b = lasso_solution(gram, beta_bar, lam)
    return Model.from_bits([1 if abs(bi) > 1e-8 else 0 for bi in b])
