"""Model-space priors and closed-form prior masses of model collectives.

A *model collective* M_{gamma1,x} is the set of models containing a fixed
head subset gamma1 (over p covariates) plus at least one of k duplicated
copies of an extra covariate x.  M_{gamma1,0} is the single model with the
head subset and none of the copies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .core import Model
from .errors import DomainError


@dataclass(frozen=True)
class UniformOverModels:
    """Every model has mass 2^-q."""


@dataclass(frozen=True)
class UniformOverSizes:
    """Mass 1/(q+1) per size class, split equally inside each class."""


@dataclass(frozen=True)
class Bernoulli:
    """Separable prior: each covariate enters independently with probability theta."""

    theta: float

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise DomainError("theta must be in (0, 1)")


@dataclass(frozen=True)
class BetaBinomial:
    """Separable prior with theta ~ Beta(a, b) integrated out."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError("a and b must be positive")


@dataclass(frozen=True)
class Dilution:
    """Two-block prior: base covariates enter with theta1, each of the k
    duplicates with theta2 = 1 - (1-theta1)^(1/k), so the duplicate block
    carries the prior mass of a single covariate."""

    theta1: float
    k: int

    def __post_init__(self):
        if not 0 < self.theta1 < 1:
            raise DomainError("theta1 must be in (0, 1)")
        if self.k < 1:
            raise DomainError("k must be >= 1")


ModelPrior = Union[UniformOverModels, UniformOverSizes, Bernoulli, BetaBinomial, Dilution]


def _log_beta(a: float, b: float) -> float:
    # log-gamma form keeps p ~ 1e3 hyperparameters from overflowing
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def dilution_theta2(theta1: float, k: int) -> float:
    """Per-copy inclusion probability that dilutes theta1 across k duplicates."""
    if not 0 < theta1 < 1:
        raise DomainError("theta1 must be in (0, 1)")
    if k < 1:
        raise DomainError("k must be >= 1")
    return 1.0 - (1.0 - theta1) ** (1.0 / k)


def model_prior_mass(prior: ModelPrior, model: Model, q: int) -> float:
    """Prior mass pi(gamma) of a single model over q covariates."""
    if model.q != q:
        raise DomainError(f"model is over {model.q} covariates, expected {q}")
    s = model.size
    if isinstance(prior, UniformOverModels):
        return 0.5**q
    if isinstance(prior, UniformOverSizes):
        return 1.0 / ((q + 1) * math.comb(q, s))
    if isinstance(prior, Bernoulli):
        return prior.theta**s * (1.0 - prior.theta) ** (q - s)
    if isinstance(prior, BetaBinomial):
        return math.exp(_log_beta(s + prior.a, q - s + prior.b) - _log_beta(prior.a, prior.b))
    if isinstance(prior, Dilution):
        p = q - prior.k
        if p < 0:
            raise DomainError(f"Dilution block k={prior.k} exceeds q={q}")
        gamma1, gamma2 = model.split(p)
        t1, t2 = prior.theta1, dilution_theta2(prior.theta1, prior.k)
        return (
            t1**gamma1.size
            * (1.0 - t1) ** (p - gamma1.size)
            * t2**gamma2.size
            * (1.0 - t2) ** (prior.k - gamma2.size)
        )
    raise DomainError(f"unsupported model prior {prior!r}")


def collective_prior_mass(
    prior: ModelPrior, gamma1: Model, k: int, include_x: bool
) -> float:
    """pi(M_{gamma1,x}) when include_x, else pi(M_{gamma1,0}).

    UniformOverModels is accepted as the separable theta = 1/2 case.
    """
    if k < 1:
        raise DomainError("k must be >= 1 (a collective needs duplicates)")
    p, s = gamma1.q, gamma1.size
    if isinstance(prior, UniformOverModels):
        prior = Bernoulli(0.5)
    if isinstance(prior, Bernoulli):
        head = prior.theta**s * (1.0 - prior.theta) ** (p - s)
        tail = 1.0 - (1.0 - prior.theta) ** k if include_x else (1.0 - prior.theta) ** k
        return head * tail
    if isinstance(prior, UniformOverSizes):
        q = p + k
        if include_x:
            return sum(
                math.comb(k, j - s) / ((q + 1) * math.comb(q, j))
                for j in range(s + 1, s + k + 1)
            )
        return 1.0 / ((q + 1) * math.comb(q, s))
    if isinstance(prior, BetaBinomial):
        a, b = prior.a, prior.b
        log_norm = _log_beta(a, b)
        without = math.exp(_log_beta(s + a, p + k - s + b) - log_norm)
        if not include_x:
            return without
        return math.exp(_log_beta(s + a, p - s + b) - log_norm) - without
    if isinstance(prior, Dilution):
        if prior.k != k:
            raise DomainError("Dilution prior was parameterized for a different k")
        t1 = prior.theta1
        head = t1**s * (1.0 - t1) ** (p - s)
        return head * (t1 if include_x else (1.0 - t1))
    raise DomainError(f"unsupported model prior {prior!r}")


def collective_prior_odds(prior: ModelPrior, gamma1_size: int, p: int, k: int) -> float:
    """Prior odds pi(M_{gamma1,x}) / pi(M_{gamma1,0}) of a collective.

    Closed forms: Bernoulli gives (1/(1-theta))^k - 1; BetaBinomial gives
    prod_{j=1..k} (1 + (|gamma1|+a)/(p+b-|gamma1|+j-1)) - 1.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    if not 0 <= gamma1_size <= p:
        raise DomainError("gamma1_size must lie in [0, p]")
    if isinstance(prior, UniformOverModels):
        prior = Bernoulli(0.5)
    if isinstance(prior, Bernoulli):
        return (1.0 / (1.0 - prior.theta)) ** k - 1.0
    if isinstance(prior, BetaBinomial):
        i, a, b = gamma1_size, prior.a, prior.b
        prod = 1.0
        for j in range(1, k + 1):
            prod *= 1.0 + (i + a) / (p + b - i + j - 1)
        return prod - 1.0
    gamma1 = Model((1 << gamma1_size) - 1, p)
    num = collective_prior_mass(prior, gamma1, k, include_x=True)
    den = collective_prior_mass(prior, gamma1, k, include_x=False)
    return num / den


@dataclass(frozen=True)
class OddsApprox:
    """Large-p approximation of the beta-binomial collective odds product.

    ``error`` is the absolute gap on the product scale; ``relative_error``
    divides by the odds (exact - 1), the quantity the product encodes, and is
    the measure whose decay is second order in 1/p.
    """

    value: float
    exact: float
    order: str

    @property
    def error(self) -> float:
        return abs(self.exact - self.value)

    @property
    def relative_error(self) -> float:
        odds = self.exact - 1.0
        return self.error / odds if odds else self.error


def collective_odds_approx(
    i: int, a: float, b: float, p: int, k: int, order: str = "second"
) -> OddsApprox:
    """Approximate prod_{j=1..k}(1 + (i+a)/(p+b-i+j-1)) for large p.

    First order: (1+k/p)^(i+a).  Second order multiplies by
    1 + C k/(p(p+k)) with C = -(i+a)[b-1-i+(i+a+1)/2].
    """
    if order not in ("first", "second"):
        raise DomainError("order must be 'first' or 'second'")
    if p < 1:
        raise DomainError("p must be >= 1")
    exact = 1.0
    for j in range(1, k + 1):
        exact *= 1.0 + (i + a) / (p + b - i + j - 1)
    approx = (1.0 + k / p) ** (i + a)
    if order == "second":
        c = -(i + a) * (b - 1 - i + (i + a + 1) / 2.0)
        approx *= 1.0 + c * k / (p * (p + k))
    return OddsApprox(value=approx, exact=exact, order=order)
