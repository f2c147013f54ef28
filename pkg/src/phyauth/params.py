"""System parameters of the tagged-signal link."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ParameterError

ENERGY_TOL = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """Lengths, power split and tag SNR of one authentication link.

    ``l_s``, ``l_k`` and ``l_t`` are the message, key and tag lengths in bits,
    ``q`` the spreading factor (``l_s == q * l_t``), ``rho_s``/``rho_t`` the
    message and tag amplitudes and ``gamma_t`` the linear post-despreading
    tag SNR.
    """

    l_s: int
    l_k: int
    l_t: int
    q: int
    rho_s: float
    rho_t: float
    gamma_t: float

    def __post_init__(self):
        for name in ("l_s", "l_k", "l_t", "q"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ParameterError(f"{name} must be an integer >= 1, got {v!r}")
        if self.l_s != self.q * self.l_t:
            raise ParameterError(f"l_s ({self.l_s}) must equal q*l_t ({self.q}*{self.l_t})")
        for name in ("rho_s", "rho_t"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ParameterError(f"{name} must lie in (0, 1), got {v!r}")
        if abs(self.rho_s**2 + self.rho_t**2 - 1.0) > ENERGY_TOL:
            raise ParameterError(
                f"rho_s^2 + rho_t^2 must equal 1, got {self.rho_s**2 + self.rho_t**2!r}"
            )
        if not (self.gamma_t > 0.0):
            raise ParameterError(f"gamma_t must be > 0, got {self.gamma_t!r}")

    @classmethod
    def make(cls, l_k: int, l_t: int, q: int = 1, rho_t: float = math.sqrt(0.5),
             gamma_t: float = 1.0) -> "SystemParams":
        """Build params from the free quantities; ``l_s`` and ``rho_s`` follow."""
        if not (0.0 < rho_t < 1.0):
            raise ParameterError(f"rho_t must lie in (0, 1), got {rho_t!r}")
        return cls(l_s=q * l_t, l_k=l_k, l_t=l_t, q=q,
                   rho_s=math.sqrt(1.0 - rho_t**2), rho_t=rho_t, gamma_t=gamma_t)

    @property
    def code_rate(self) -> float:
        return self.l_k / self.l_t

    @property
    def noise_var(self) -> float:
        """Per-chip channel noise variance that yields ``gamma_t`` after despreading."""
        return self.q * self.rho_t**2 / self.gamma_t

    def with_gamma(self, gamma_t: float) -> "SystemParams":
        return replace(self, gamma_t=gamma_t)


def gamma_from_eb_n0(eb_n0_db: float, code_rate: float) -> float:
    """Tag SNR for an Eb/N0 (dB), using Eb/N0 = gamma_t / R_c."""
    return code_rate * 10.0 ** (eb_n0_db / 10.0)
