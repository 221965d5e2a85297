"""Quantum non-Gaussianity witnesses for multiplexed click-counting.

The package computes click statistics of squeezed coherent states and
single-photon-emitter ensembles on multi-channel on/off detectors,
maximizes linear click functionals over pure Gaussian states to obtain
non-Gaussianity thresholds, and evaluates the weak-signal closed forms
for noise, loss, and emitter-escape tolerances.
"""

__version__ = "0.1.0"

from .gaussian import (
    FockVector,
    SqueezedCoherentParams,
    TruncationError,
    fock_coefficients,
    no_click_expectation,
    no_click_oracle,
    photon_number_distribution,
)
from .detector import (
    ClickProbabilities,
    DetectorConfig,
    NoClickProfile,
    click_stats,
    click_success,
    effective_attenuation,
    gaussian_no_click_profile,
    load_detector_config,
)
from .criteria import (
    CurvePoint,
    GaussianMax,
    ThresholdCurve,
    WitnessResult,
    approx_threshold_coefficient,
    asymptotic_success_bound,
    functional_value,
    hermite,
    hermite_roots,
    maximize_functional,
    selected_hermite_root,
    threshold_curve,
    witness,
)
from .source import (
    ApproxClickRates,
    DurationBound,
    EnsembleParams,
    approx_success_error,
    escape_averaged_no_click,
    ideal_no_click,
    load_ensemble_params,
    loss_tolerance_analytic,
    max_duration_analytic,
    max_measurement_duration,
    max_tolerated_loss,
    min_detectable_efficiency,
    min_efficiency_analytic,
    noisy_no_click,
    source_click_stats,
)

__all__ = [
    "__version__",
    "ApproxClickRates",
    "ClickProbabilities",
    "CurvePoint",
    "DetectorConfig",
    "DurationBound",
    "EnsembleParams",
    "FockVector",
    "GaussianMax",
    "NoClickProfile",
    "SqueezedCoherentParams",
    "ThresholdCurve",
    "TruncationError",
    "WitnessResult",
    "approx_success_error",
    "approx_threshold_coefficient",
    "asymptotic_success_bound",
    "click_stats",
    "click_success",
    "effective_attenuation",
    "escape_averaged_no_click",
    "fock_coefficients",
    "functional_value",
    "gaussian_no_click_profile",
    "hermite",
    "hermite_roots",
    "ideal_no_click",
    "load_detector_config",
    "load_ensemble_params",
    "loss_tolerance_analytic",
    "max_duration_analytic",
    "max_measurement_duration",
    "max_tolerated_loss",
    "maximize_functional",
    "min_detectable_efficiency",
    "min_efficiency_analytic",
    "no_click_expectation",
    "no_click_oracle",
    "noisy_no_click",
    "photon_number_distribution",
    "selected_hermite_root",
    "source_click_stats",
    "threshold_curve",
    "witness",
]
