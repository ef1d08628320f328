"""Multilayer neutron detector simulation and wavelength estimation.

The package simulates per-layer absorption counts of a Poisson beam passing
through a stack of identical absorbing layers, recovers the absorption
probability and beam intensity by maximum likelihood, and converts the
absorption probability into a neutron wavelength estimate with delta-method
confidence intervals.  ``ThinnedPoissonMLE`` and ``WavelengthEstimator``
expose the fits through a scikit-learn style API.
"""

from .asymptotics import (
    AsymCov,
    FisherInfo,
    SingularInformationError,
    covariance_closed_form,
    covariance_numeric,
    fisher_layer,
    fisher_matrix,
    h_factor,
    q_factor,
)
from .estimators import ThinnedPoissonMLE, WavelengthEstimator
from .harness import (
    CoverageReport,
    SweepRow,
    SweepSpec,
    coverage_experiment,
    crossover_layer,
    run_sweep,
)
from .mle import (
    BoundaryEstimateWarning,
    EstimationError,
    GateResult,
    MleResult,
    NoDetectionsError,
    NoInteriorRootError,
    NotIdentifiableError,
    NumericFailureError,
    PolyCoeffs,
    SufficientStats,
    fit_mle,
    gate_limit,
    log_likelihood,
    poly_coeffs,
    root_gate,
    score_equations,
    solve_y,
    sufficient_stats,
)
from .sim import (
    BeamParams,
    DetectorConfig,
    SimTrace,
    derive_seed,
    layer_means,
    simulate_counts,
    simulate_event_level,
    trace_to_counts,
)
from .wavelength import (
    DEFAULT_CROSS_SECTION,
    M_PER_ANGSTROM,
    CrossSectionModel,
    WavelengthEstimate,
    confidence_interval,
    delta_terms,
    estimate_wavelength,
    mu_from_p,
    normal_quantile,
    p_from_mu,
)

__version__ = "0.1.0"

__all__ = [
    "AsymCov",
    "BeamParams",
    "BoundaryEstimateWarning",
    "CoverageReport",
    "CrossSectionModel",
    "DEFAULT_CROSS_SECTION",
    "DetectorConfig",
    "EstimationError",
    "FisherInfo",
    "GateResult",
    "M_PER_ANGSTROM",
    "MleResult",
    "NoDetectionsError",
    "NoInteriorRootError",
    "NotIdentifiableError",
    "NumericFailureError",
    "PolyCoeffs",
    "SimTrace",
    "SingularInformationError",
    "SufficientStats",
    "SweepRow",
    "SweepSpec",
    "ThinnedPoissonMLE",
    "WavelengthEstimate",
    "WavelengthEstimator",
    "confidence_interval",
    "coverage_experiment",
    "covariance_closed_form",
    "covariance_numeric",
    "crossover_layer",
    "delta_terms",
    "derive_seed",
    "estimate_wavelength",
    "fisher_layer",
    "fisher_matrix",
    "fit_mle",
    "gate_limit",
    "h_factor",
    "layer_means",
    "log_likelihood",
    "mu_from_p",
    "normal_quantile",
    "p_from_mu",
    "poly_coeffs",
    "q_factor",
    "root_gate",
    "run_sweep",
    "score_equations",
    "simulate_counts",
    "simulate_event_level",
    "solve_y",
    "sufficient_stats",
    "trace_to_counts",
]
