"""Convergence diagnostics."""

from .bounds import (
    HClassReport,
    PerturbedBoundReport,
    ZelenyakReport,
    fit_tail_energy_exponential,
    h_class_check,
    omega_limit_single,
    perturbed_bound_check,
    sqrt_h_tail,
    zelenyak_bound_check,
    zelenyak_constant,
)
from .energy import (
    LojasiewiczEstimate,
    energy_identity_residual,
    lojasiewicz_estimate,
    lojasiewicz_from_pairs,
    lyapunov_gaps,
    lyapunov_limit,
    tail_extrapolation,
)
from .rates import MODELS, DecayRateFitter, RateFit, fit_rate
from .slow import StepFailure, scalar_slow_flow

__all__ = [
    "DecayRateFitter", "HClassReport", "LojasiewiczEstimate", "MODELS", "PerturbedBoundReport",
    "RateFit", "StepFailure", "ZelenyakReport", "energy_identity_residual", "fit_rate",
    "fit_tail_energy_exponential", "h_class_check", "lojasiewicz_estimate",
    "lojasiewicz_from_pairs", "lyapunov_gaps", "lyapunov_limit", "omega_limit_single",
    "perturbed_bound_check", "scalar_slow_flow", "sqrt_h_tail", "tail_extrapolation",
    "zelenyak_bound_check", "zelenyak_constant",
]
