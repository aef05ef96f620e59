"""Gamma frailty and resilience mixtures, ageing classes and shifted stochastic orders."""

__version__ = "0.1.0"

from .ageing import AgeingClass, classify, classify_all
from .distributions import (
    ContinuousDistribution,
    DegenerateMixing,
    ExpQuadratic,
    GammaLifetime,
    GammaMixing,
    GammaParams,
    MixingDistribution,
    TruncatedGammaMixing,
    UniformLifetime,
    UniformMixing,
    Weibull,
    WeibullParams,
    distribution_from_pdf,
    exponential,
    gamma_frailty_mixing,
    parse_distribution,
    parse_mixing,
)
from .inference import (
    Sample,
    anderson_darling_weibull,
    fit_frailty_a,
    fit_resilience_a,
    load_sample,
    qq_data,
    weibull_mle,
)
from .mixture import (
    FrailtyModel,
    ResilienceModel,
    gamma_frailty_closed_form,
    gamma_resilience_closed_form,
    generic_gamma_model,
    parse_model,
)
from .monotonicity import GridSpec, InsufficientGridError, MonotonicityReport, Verdict
from .numerics import ConvergenceError, DomainError
from .orders import OrderRelation, check_consequence, check_dispersive, check_order
from .theorems import THEOREMS, get_theorem, reproduce_examples, verify_theorem

__all__ = [
    "AgeingClass",
    "ContinuousDistribution",
    "ConvergenceError",
    "DegenerateMixing",
    "DomainError",
    "ExpQuadratic",
    "FrailtyModel",
    "GammaLifetime",
    "GammaMixing",
    "GammaParams",
    "GridSpec",
    "InsufficientGridError",
    "MixingDistribution",
    "MonotonicityReport",
    "OrderRelation",
    "ResilienceModel",
    "Sample",
    "THEOREMS",
    "TruncatedGammaMixing",
    "UniformLifetime",
    "UniformMixing",
    "Verdict",
    "Weibull",
    "WeibullParams",
    "anderson_darling_weibull",
    "check_consequence",
    "check_dispersive",
    "check_order",
    "classify",
    "classify_all",
    "distribution_from_pdf",
    "exponential",
    "fit_frailty_a",
    "fit_resilience_a",
    "gamma_frailty_closed_form",
    "gamma_frailty_mixing",
    "gamma_resilience_closed_form",
    "generic_gamma_model",
    "get_theorem",
    "load_sample",
    "parse_distribution",
    "parse_mixing",
    "parse_model",
    "qq_data",
    "reproduce_examples",
    "verify_theorem",
    "weibull_mle",
]
