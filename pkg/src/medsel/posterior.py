"""Exact posterior summaries over the full model space.

Normalization uses log-sum-exp with the max trick so that 2^q terms never
underflow.  The duplicate block used for collective inclusion probabilities
is always declared by the caller; it is never inferred from the data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core import CoefPrior, DesignStats, Model, enumerate_models
from .errors import DegenerateDataError, DomainError
from .marginals import marginal_likelihood
from .priors import ModelPrior, model_prior_mass


@dataclass(frozen=True)
class PosteriorSummary:
    """Posterior model probabilities with marginal and joint inclusion."""

    models: tuple[Model, ...]
    probs: np.ndarray
    incl: np.ndarray
    pairwise: np.ndarray
    collective: float | None = None
    block: int | None = None

    def __post_init__(self):
        for name in ("probs", "incl", "pairwise"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def q(self) -> int:
        return self.models[0].q if self.models else 0

    def prob(self, model: Model) -> float:
        for m, p in zip(self.models, self.probs):
            if m == model:
                return float(p)
        raise DomainError(f"model {model} not in the posterior support")

    def as_dict(self) -> dict[Model, float]:
        return {m: float(p) for m, p in zip(self.models, self.probs)}

    @classmethod
    def from_probs(
        cls,
        models: Sequence[Model],
        probs: Sequence[float],
        *,
        block: int | None = None,
    ) -> "PosteriorSummary":
        """Assemble a summary from externally supplied model probabilities."""
        models = tuple(models)
        probs = np.asarray(probs, dtype=float)
        if len(models) != probs.shape[0]:
            raise DomainError("one probability per model required")
        if np.any(probs < -1e-15) or abs(probs.sum() - 1.0) > 1e-9:
            raise DomainError("probabilities must be nonnegative and sum to 1")
        probs = np.clip(probs, 0.0, None)
        probs = probs / probs.sum()
        q = models[0].q if models else 0
        bits = np.array([m.bits for m in models], dtype=float)
        incl = probs @ bits
        pairwise = (bits * probs[:, None]).T @ bits
        collective = None
        if block is not None:
            if not 0 <= block <= q:
                raise DomainError(f"block boundary {block} outside [0, {q}]")
            tail_mask = np.array([m.split(block)[1].size > 0 for m in models])
            collective = float(probs[tail_mask].sum())
        return cls(
            models=models,
            probs=probs,
            incl=incl,
            pairwise=pairwise,
            collective=collective,
            block=block,
        )


def posterior_summary(
    stats: DesignStats,
    coef_prior: CoefPrior,
    model_prior: ModelPrior,
    block: int | None = None,
) -> PosteriorSummary:
    """Exact posterior over all 2^q models: pi(gamma|Y) proportional to
    pi(gamma) m(y|gamma)."""
    models = enumerate_models(stats.q)
    log_w = np.empty(len(models))
    for i, m in enumerate(models):
        mass = model_prior_mass(model_prior, m, stats.q)
        if mass <= 0.0:
            log_w[i] = -np.inf
            continue
        log_w[i] = math.log(mass) + marginal_likelihood(stats, m, coef_prior).log_value
    top = log_w.max()
    if not np.isfinite(top):
        raise DegenerateDataError("all model marginals vanished")
    w = np.exp(log_w - top)
    probs = w / w.sum()
    return PosteriorSummary.from_probs(models, probs, block=block)


# --- closed-form inclusion thresholds ---------------------------------------


@dataclass(frozen=True)
class UniformModels:
    """Equal prior probability on all models (threshold scheme tag)."""


@dataclass(frozen=True)
class BetaBinomialFirstOrder:
    """First-order beta-binomial scheme; i is the dominating head size."""

    i: int
    a: float
    p: int

    def __post_init__(self):
        if self.p < 1:
            raise DomainError("p must be >= 1")
        if not 0 <= self.i <= self.p:
            raise DomainError("i must lie in [0, p]")
        if not self.a > 0:
            raise DomainError("a must be positive")


ThresholdScheme = Union[UniformModels, BetaBinomialFirstOrder]


def inclusion_threshold_z2(
    n: int, k: int, sigma2: float, scheme: ThresholdScheme = UniformModels()
) -> float:
    """z^2 value at which the duplicate block's collective posterior inclusion
    crosses 1/2 on a unit-norm orthonormal design with g = n.

    A nonpositive return value means the block is included for every z
    ("always included"); that is legal output, not an error.
    """
    if n < 1 or k < 1:
        raise DomainError("need n >= 1 and k >= 1")
    if not sigma2 > 0:
        raise DomainError("sigma2 must be positive")
    if isinstance(scheme, UniformModels):
        odds = float(2**k - 1)
    elif isinstance(scheme, BetaBinomialFirstOrder):
        odds = (1.0 + k / scheme.p) ** (scheme.i + scheme.a) - 1.0
    else:
        raise DomainError(f"unknown threshold scheme {scheme!r}")
    return 2.0 * sigma2 * (1.0 + 1.0 / n) * math.log(math.sqrt(1.0 + n) / odds)
