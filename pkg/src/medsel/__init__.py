"""Exact Bayesian variable selection for Gaussian linear models.

Computes posterior model probabilities by full enumeration under g-type,
independent-normal, continuous spike-and-slab, and rescaled diagonal priors;
identifies the median probability, highest posterior, and risk-optimal
models; and provides closed-form collinearity diagnostics, the complete
two-covariate selection geometry, and a deterministic numerical study.
"""

from .core import (
    DesignStats,
    GPrior,
    IndependentNormal,
    JeffreysSigma,
    KnownSigma,
    Model,
    RescaledG,
    SpikeSlab,
    embed_coefficients,
    enumerate_models,
    extract_coefficients,
)
from .geometry2d import (
    AlphaPoints,
    Case,
    GeomCase,
    alpha_points,
    classify_case,
    mini_theorem_scan,
    optimal_from_conditions,
    region_weights,
    risk_differences,
)
from .marginals import (
    MarginalValue,
    limiting_marginal,
    limiting_projection,
    marginal_factor_x,
    marginal_likelihood,
)
from .posterior import (
    BetaBinomialFirstOrder,
    PosteriorSummary,
    UniformModels,
    inclusion_threshold_z2,
    posterior_summary,
)
from .priors import (
    Bernoulli,
    BetaBinomial,
    Dilution,
    UniformOverModels,
    UniformOverSizes,
    collective_odds_approx,
    collective_prior_mass,
    collective_prior_odds,
    dilution_theta2,
    model_prior_mass,
)
from .risk import (
    PosteriorMeans,
    RiskReport,
    equicorrelated_risk,
    lasso_summarize,
    nested_transform,
    orthogonal_duplicate_risk,
    posterior_means,
    risk_report,
)
from .study import Scenario, StudyConfig, StudyTable, correlation_grid, run_study

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
