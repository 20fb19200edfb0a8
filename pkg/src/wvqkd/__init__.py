"""Weak-value-assisted six-state QKD: first-order vs. all-orders security."""

from .discrimination import GaussianPair, ThresholdScheme, conclusive_probability, helstrom_error, threshold_error
from .keyrate import Regime, SecurityReport, ToleranceResult
from .montecarlo import SimConfig, density_oracle, sample_rounds, validation_report
from .protocol import ChannelModel, ProtocolParams, bell_states, rho_ab, weak_value_sigma
from .qmath import DensityMatrix, hermitian_eigh, partial_trace, von_neumann_entropy
from .security_exact import (
    eve_state_exact,
    holevo_exact,
    joint_prob_exact,
    secret_fraction_exact,
    sixstate_limit_check,
    tolerance_exact,
    wma_vs_exact_report,
)
from .security_wma import (
    WMAArtifactWarning,
    eve_state_wma,
    holevo_wma,
    joint_prob_wma,
    secret_fraction_wma,
    tolerance_wma,
)
from .weakvalues import postselected_purification_weak_value, weak_value_mixed, weak_value_pure

__version__ = "0.1.0"

__all__ = [
    "ChannelModel",
    "DensityMatrix",
    "GaussianPair",
    "ProtocolParams",
    "Regime",
    "SecurityReport",
    "SimConfig",
    "ThresholdScheme",
    "ToleranceResult",
    "WMAArtifactWarning",
    "bell_states",
    "conclusive_probability",
    "density_oracle",
    "eve_state_exact",
    "eve_state_wma",
    "helstrom_error",
    "hermitian_eigh",
    "holevo_exact",
    "holevo_wma",
    "joint_prob_exact",
    "joint_prob_wma",
    "partial_trace",
    "postselected_purification_weak_value",
    "rho_ab",
    "sample_rounds",
    "secret_fraction_exact",
    "secret_fraction_wma",
    "sixstate_limit_check",
    "threshold_error",
    "tolerance_exact",
    "tolerance_wma",
    "validation_report",
    "von_neumann_entropy",
    "weak_value_mixed",
    "weak_value_pure",
    "weak_value_sigma",
    "wma_vs_exact_report",
]
