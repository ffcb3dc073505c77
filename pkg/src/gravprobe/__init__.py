"""Simulation toolkit for a two-axis optomechanical probe of a gravitating superposed mass."""

from .coefficients import GravityCoefficients, coefficients, exact_coefficients, farfield_coefficients
from .config import resolve_config
from .core import Geometry, MechanicalAxis, CavityAxis, Scenario, SystemParameters, validate
from .correlations import covariance_report, sweep_c1
from .dynamics import build_dynamics, stability
from .gaussian import gaussian_discord
from .spectra import FrequencyGrid, dns_closed_form, dns_matrix_oracle, find_peaks, scan

__version__ = "0.1.0"

__all__ = [
    "CavityAxis",
    "FrequencyGrid",
    "Geometry",
    "GravityCoefficients",
    "MechanicalAxis",
    "Scenario",
    "SystemParameters",
    "build_dynamics",
    "coefficients",
    "covariance_report",
    "dns_closed_form",
    "dns_matrix_oracle",
    "exact_coefficients",
    "farfield_coefficients",
    "find_peaks",
    "gaussian_discord",
    "resolve_config",
    "scan",
    "stability",
    "sweep_c1",
    "validate",
]
