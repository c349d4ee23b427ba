"""Entropy, Fisher information, and mutual-information functionals of
Gaussian mixtures along the heat flow, with convexity certificates and
concentration-bound checks."""

from .numerics import (
    ADAPTIVE_INTERVAL,
    DEFAULT_SPEC,
    GAUSS_HERMITE,
    ErrorEstimate,
    QuadratureSpec,
    expect_gaussian_1d,
    finite_difference,
    gauss_hermite_rule,
    integrate_density_functional,
)
from .mixtures import (
    MixtureModel,
    MixtureStats,
    conditional_cov,
    density,
    heat_evolve,
    load_model,
    log_density,
    log_density_grad,
    log_density_hessian,
    parse_model_text,
    posterior_weights,
    stats,
)
from .functionals import (
    BackwardInfo,
    InfoFunctionals,
    backward_info,
    conditional_fisher,
    conditional_variance,
    entropy,
    fisher,
    fisher2,
    info_functionals,
    mutual_fisher,
    mutual_fisher2,
    mutual_info,
    mutual_triple,
    reverse_mutual_fisher,
    two_gaussian_closed_form,
    two_point_closed_form,
)
from .convexity import (
    ConvexityScan,
    ConvexityThresholds,
    LogConcavityReport,
    convexity_scan,
    convexity_thresholds,
    hessian_via_cov,
    kj_mutual_lower_bound,
    log_concavity_report,
    time_to_log_concavity,
)
from .bounds import (
    GenMixtReport,
    TailEstimateCheck,
    derivative_vanishing_check,
    genmixt_bound,
    log2_lemma_check,
    tail_estimate_lattice,
    verify_genmixt,
)

__all__ = [
    "ADAPTIVE_INTERVAL",
    "BackwardInfo",
    "ConvexityScan",
    "ConvexityThresholds",
    "DEFAULT_SPEC",
    "ErrorEstimate",
    "GAUSS_HERMITE",
    "GenMixtReport",
    "InfoFunctionals",
    "LogConcavityReport",
    "MixtureModel",
    "MixtureStats",
    "QuadratureSpec",
    "TailEstimateCheck",
    "backward_info",
    "conditional_cov",
    "conditional_fisher",
    "conditional_variance",
    "convexity_scan",
    "convexity_thresholds",
    "density",
    "derivative_vanishing_check",
    "entropy",
    "expect_gaussian_1d",
    "finite_difference",
    "fisher",
    "fisher2",
    "gauss_hermite_rule",
    "genmixt_bound",
    "heat_evolve",
    "hessian_via_cov",
    "info_functionals",
    "integrate_density_functional",
    "kj_mutual_lower_bound",
    "load_model",
    "log2_lemma_check",
    "log_concavity_report",
    "log_density",
    "log_density_grad",
    "log_density_hessian",
    "mutual_fisher",
    "mutual_fisher2",
    "mutual_info",
    "mutual_triple",
    "parse_model_text",
    "posterior_weights",
    "reverse_mutual_fisher",
    "stats",
    "tail_estimate_lattice",
    "time_to_log_concavity",
    "two_gaussian_closed_form",
    "two_point_closed_form",
    "verify_genmixt",
]
