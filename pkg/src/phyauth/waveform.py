"""Physical-layer chain: BPSK, repetition spreading, superposition, AWGN, despreading.

Bits map to symbols as 0 -> +1 and 1 -> -1 everywhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .params import SystemParams
from .rng import RngStream
from .tag_codec import as_bits


@dataclass(frozen=True)
class TaggedSignal:
    samples: np.ndarray


@dataclass(frozen=True)
class ReceivedSignal:
    samples: np.ndarray
    noise_var: float


@dataclass(frozen=True)
class ObservedTag:
    """Message-free tag observation ``y = bpsk(t) + w`` with Var(w_i) = 1/gamma_t."""

    samples: np.ndarray
    gamma_t: float

    def __post_init__(self):
        if not (self.gamma_t > 0):
            raise ParameterError(f"gamma_t must be > 0, got {self.gamma_t!r}")

    def __len__(self):
        return len(self.samples)


def bpsk(bits) -> np.ndarray:
    return 1.0 - 2.0 * np.asarray(bits, dtype=float)


def hard_slice(symbols) -> np.ndarray:
    return (np.asarray(symbols) < 0).astype(np.uint8)


def spread(t, q: int) -> np.ndarray:
    """Repeat every BPSK tag symbol q times."""
    if q < 1:
        raise ParameterError(f"spreading factor must be >= 1, got {q}")
    return np.repeat(bpsk(as_bits(t, name="tag")), q)


def despread(chips, q: int) -> np.ndarray:
    """Block average of q-chip groups (matched filter of :func:`spread`)."""
    if q < 1:
        raise ParameterError(f"spreading factor must be >= 1, got {q}")
    chips = np.asarray(chips, dtype=float)
    if chips.size % q:
        raise ParameterError(f"chip count {chips.size} is not a multiple of q={q}")
    return chips.reshape(-1, q).mean(axis=1)


def superpose(s, t, params: SystemParams) -> TaggedSignal:
    s = as_bits(s, params.l_s, "message")
    t = as_bits(t, params.l_t, "tag")
    u = params.rho_s * bpsk(s) + params.rho_t * spread(t, params.q)
    return TaggedSignal(u)


def awgn(u: TaggedSignal, noise_var: float, rng: RngStream) -> ReceivedSignal:
    if noise_var < 0:
        raise ParameterError(f"noise variance must be >= 0, got {noise_var}")
    samples = np.asarray(u.samples, dtype=float)
    if noise_var == 0:
        return ReceivedSignal(samples.copy(), 0.0)
    z = rng.normal(samples.shape, math.sqrt(noise_var))
    return ReceivedSignal(samples + z, float(noise_var))


def cancel_and_despread(r: ReceivedSignal, s, params: SystemParams) -> ObservedTag:
    """Subtract the known message, despread, and rescale to unit tag amplitude."""
    s = as_bits(s, params.l_s, "message")
    samples = np.asarray(r.samples, dtype=float)
    if samples.size != params.l_s:
        raise ParameterError(f"received signal has {samples.size} samples, expected {params.l_s}")
    y = despread(samples - params.rho_s * bpsk(s), params.q) / params.rho_t
    gamma = math.inf if r.noise_var == 0 else params.q * params.rho_t**2 / r.noise_var
    return ObservedTag(y, gamma)


def transmit_tag(s, t, params: SystemParams, rng: RngStream, noise_var: float | None = None) -> ObservedTag:
    """Full chain for one frame: superpose, channel, cancel and despread."""
    nv = params.noise_var if noise_var is None else noise_var
    return cancel_and_despread(awgn(superpose(s, t, params), nv, rng), s, params)


def snr_conversions(params: SystemParams) -> tuple[float, float]:
    """(gamma_t in dB, Eb/N0 in dB) with Eb/N0 = gamma_t / R_c."""
    g = params.gamma_t
    return 10.0 * math.log10(g), 10.0 * math.log10(g / params.code_rate)
