"""Model indicators, design sufficient statistics, and coefficient priors.

Everything here is an immutable value type; operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import CapacityError, DimensionError, DomainError, NumericError

#: Exhaustive enumeration is refused above this covariate count (2^24 ~ 17M models).
ENUMERATION_CAP = 24

#: Relative tolerance used when validating symmetry / positive semidefiniteness.
_PSD_TOL = 1e-8


@dataclass(frozen=True, order=True)
class Model:
    """A covariate subset encoded as a bit mask.

    Bit ``i`` of ``mask`` is the inclusion indicator of covariate ``i + 1``,
    so lexicographic bit order coincides with ascending mask order.
    """

    mask: int
    q: int

    def __post_init__(self):
        if self.q < 0:
            raise DomainError(f"covariate count must be >= 0, got {self.q}")
        if not 0 <= self.mask < (1 << self.q):
            raise DomainError(f"mask {self.mask} out of range for q={self.q}")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "Model":
        bits = tuple(int(b) for b in bits)
        if any(b not in (0, 1) for b in bits):
            raise DomainError("indicators must be 0 or 1")
        mask = 0
        for i, b in enumerate(bits):
            mask |= b << i
        return cls(mask=mask, q=len(bits))

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.mask >> i) & 1 for i in range(self.q))

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    @property
    def indices(self) -> tuple[int, ...]:
        """0-based positions of the included covariates."""
        return tuple(i for i in range(self.q) if (self.mask >> i) & 1)

    def includes(self, i: int) -> bool:
        return bool((self.mask >> i) & 1)

    def split(self, boundary: int) -> tuple["Model", "Model"]:
        """View gamma as (gamma1, gamma2) with gamma1 the first `boundary` covariates."""
        if not 0 <= boundary <= self.q:
            raise DimensionError(f"block boundary {boundary} outside [0, {self.q}]")
        lo = self.mask & ((1 << boundary) - 1)
        hi = self.mask >> boundary
        return Model(lo, boundary), Model(hi, self.q - boundary)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


def enumerate_models(q: int, *, allow_large: bool = False) -> list[Model]:
    """All 2^q models in lexicographic bit order (null first, full last)."""
    if q < 0:
        raise DomainError(f"q must be >= 0, got {q}")
    if q > ENUMERATION_CAP and not allow_large:
        raise CapacityError(
            f"q={q} exceeds the enumeration cap of {ENUMERATION_CAP}; "
            "pass allow_large=True to override"
        )
    return [Model(mask, q) for mask in range(1 << q)]


def embed_coefficients(model: Model, sub: Sequence[float]) -> np.ndarray:
    """Place a |gamma|-vector at the included positions of a q-vector (H_gamma action)."""
    sub = np.asarray(sub, dtype=float)
    if sub.shape != (model.size,):
        raise DimensionError(
            f"coefficient vector has length {sub.shape}, model includes {model.size}"
        )
    out = np.zeros(model.q)
    if model.size:
        out[list(model.indices)] = sub
    return out


def extract_coefficients(model: Model, full: Sequence[float]) -> np.ndarray:
    """Inverse of :func:`embed_coefficients` on the included coordinates."""
    full = np.asarray(full, dtype=float)
    if full.shape != (model.q,):
        raise DimensionError(f"expected a q={model.q} vector, got shape {full.shape}")
    return full[list(model.indices)] if model.size else np.zeros(0)


def _frozen_array(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DesignStats:
    """Sufficient statistics (X'X, X'Y, Y'Y) of a regression problem.

    ``normalization`` records column scaling: ``"unit"`` if covariates were
    standardized to unit norm (gram diagonal 1), ``"sample"`` if scaled so the
    diagonal equals n, ``None`` for raw columns.  Correlation-driven
    operations require ``"unit"``.
    """

    q: int
    n: int
    gram: np.ndarray
    xty: np.ndarray
    yty: float
    corr: tuple[float, float, float] | None = None
    normalization: str | None = None

    def __post_init__(self):
        gram = _frozen_array(self.gram)
        xty = _frozen_array(self.xty)
        if gram.shape != (self.q, self.q):
            raise DimensionError(f"gram must be {self.q}x{self.q}, got {gram.shape}")
        if xty.shape != (self.q,):
            raise DimensionError(f"xty must have length {self.q}, got {xty.shape}")
        scale = float(np.abs(gram).max()) if self.q else 1.0
        if self.q and not np.allclose(gram, gram.T, atol=_PSD_TOL * max(scale, 1.0)):
            raise DomainError("gram matrix must be symmetric")
        if self.q:
            w = np.linalg.eigvalsh(0.5 * (gram + gram.T))
            if w.min() < -_PSD_TOL * max(scale, 1.0):
                raise DomainError("gram matrix must be positive semidefinite")
        if self.yty < 0:
            raise DomainError("yty must be nonnegative")
        if self.corr is not None and len(self.corr) == 3:
            r12, r1y, r2y = self.corr
            c = np.array([[1, r12, r1y], [r12, 1, r2y], [r1y, r2y, 1]])
            if np.linalg.eigvalsh(c).min() < -_PSD_TOL:
                raise DomainError("implied correlation matrix is not PSD")
        object.__setattr__(self, "gram", gram)
        object.__setattr__(self, "xty", xty)

    @classmethod
    def from_data(
        cls,
        x: np.ndarray,
        y: np.ndarray,
        *,
        standardize: str | None = "unit",
        center_response: bool = True,
    ) -> "DesignStats":
        """Build statistics from a raw design matrix and response.

        ``standardize="unit"`` rescales every column to unit Euclidean norm;
        ``"sample"`` rescales to norm sqrt(n); ``None`` leaves columns as-is.
        The response is centered by default (the model carries no intercept).
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim != 2:
            raise DimensionError("design matrix must be 2-D")
        n, q = x.shape
        if y.shape != (n,):
            raise DimensionError("response length must match the design rows")
        if center_response:
            y = y - y.mean()
        if standardize in ("unit", "sample"):
            norms = np.linalg.norm(x, axis=0)
            if np.any(norms == 0):
                raise NumericError("cannot standardize a zero column")
            target = 1.0 if standardize == "unit" else float(np.sqrt(n))
            x = x * (target / norms)
        elif standardize is not None:
            raise DomainError(f"unknown standardization {standardize!r}")
        return cls(
            q=q,
            n=n,
            gram=x.T @ x,
            xty=x.T @ y,
            yty=float(y @ y),
            normalization=standardize,
        )

    @classmethod
    def from_correlations(
        cls, r12: float, r1y: float, r2y: float, n: int, *, yty: float = 1.0
    ) -> "DesignStats":
        """Two-covariate statistics implied by a correlation triple.

        Columns and response are taken as unit-norm, so gram is the 2x2
        correlation matrix and xty carries the response correlations.
        """
        return cls(
            q=2,
            n=n,
            gram=np.array([[1.0, r12], [r12, 1.0]]),
            xty=np.array([r1y, r2y]) * np.sqrt(yty),
            yty=yty,
            corr=(float(r12), float(r1y), float(r2y)),
            normalization="unit",
        )

    def gram_sub(self, model: Model) -> np.ndarray:
        idx = list(model.indices)
        return self.gram[np.ix_(idx, idx)]

    def xty_sub(self, model: Model) -> np.ndarray:
        return self.xty[list(model.indices)]


# --- coefficient priors ----------------------------------------------------


@dataclass(frozen=True)
class KnownSigma:
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise DomainError("sigma2 must be positive")


@dataclass(frozen=True)
class JeffreysSigma:
    """Improper 1/sigma^2 prior; marginals become Bayes factors vs the null."""


SigmaMode = Union[KnownSigma, JeffreysSigma]


@dataclass(frozen=True)
class GPrior:
    """Zellner prior N(0, g sigma^2 (X_g' X_g)^+) on the included coefficients."""

    g: float
    sigma: SigmaMode = field(default_factory=JeffreysSigma)

    def __post_init__(self):
        if not self.g > 0:
            raise DomainError("g must be positive")


@dataclass(frozen=True)
class IndependentNormal:
    """N(0, variance * I) on included coefficients; excluded ones are zero."""

    variance: float
    sigma: KnownSigma = field(default_factory=lambda: KnownSigma(1.0))

    def __post_init__(self):
        if not self.variance > 0:
            raise DomainError("variance must be positive")
        if not isinstance(self.sigma, KnownSigma):
            raise DomainError("JeffreysSigma is only valid with GPrior")


@dataclass(frozen=True)
class SpikeSlab:
    """Continuous Gaussian mixture: every coefficient gets v1 (in) or v0 (out)."""

    v0: float
    v1: float
    sigma: KnownSigma = field(default_factory=lambda: KnownSigma(1.0))

    def __post_init__(self):
        if not 0 < self.v0 < self.v1:
            raise DomainError("need v1 > v0 > 0")
        if not isinstance(self.sigma, KnownSigma):
            raise DomainError("JeffreysSigma is only valid with GPrior")


@dataclass(frozen=True)
class RescaledG:
    """Diagonal prior diag(d) on the upper-Cholesky-transformed coordinates."""

    d: tuple[float, ...]
    sigma: KnownSigma = field(default_factory=lambda: KnownSigma(1.0))

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(float(v) for v in self.d))
        if any(not v > 0 for v in self.d):
            raise DomainError("all prior variances must be positive")
        if not isinstance(self.sigma, KnownSigma):
            raise DomainError("JeffreysSigma is only valid with GPrior")


CoefPrior = Union[GPrior, IndependentNormal, SpikeSlab, RescaledG]
