"""Channel-coding view of physical-layer authentication: tag codes, link
simulation, correlation detection, attacks and information-theoretic limits."""

from .errors import (
    CalibrationError,
    CapabilityError,
    ConfigError,
    DomainError,
    NumericalError,
    ParameterError,
    PhyAuthError,
)
from .params import SystemParams, gamma_from_eb_n0
from .rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "CalibrationError",
    "CapabilityError",
    "ConfigError",
    "DomainError",
    "NumericalError",
    "ParameterError",
    "PhyAuthError",
    "RngStream",
    "SystemParams",
    "gamma_from_eb_n0",
]
