"""Delay-violation bounds, pilot and power optimisation, and Monte Carlo checks
for short-packet uplink massive MU-MIMO."""

from .channel import GammaSinrModel, SystemConfig, derive_large_scale, fit_all, fit_gamma_sinr
from .errors import ConfigError, ConvergenceError, DomainError, NumericError
from .fbc import achievable_rate, decoding_ep, expected_ep, gamma_zero
from .optim import EnergyEfficiencyProblem, ifgss, odisc, pilot_objective
from .snc import QosSpec, ServiceModel, service_inv_mgf, ub_sdvp_at_theta, ub_sdvp_inf

__all__ = [
    "ConfigError", "ConvergenceError", "DomainError", "EnergyEfficiencyProblem",
    "GammaSinrModel", "NumericError", "QosSpec", "ServiceModel", "SystemConfig",
    "achievable_rate", "decoding_ep", "derive_large_scale", "expected_ep", "fit_all",
    "fit_gamma_sinr", "gamma_zero", "ifgss", "odisc", "pilot_objective", "service_inv_mgf",
    "ub_sdvp_at_theta", "ub_sdvp_inf",
]
