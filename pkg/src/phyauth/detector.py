"""Bob's correlation detector, threshold calibration and the Maurer bound.

Under H0 the statistic ``eta = <bpsk(c_B), y>`` is N(L_t, L_t/gamma_t).
Under an impersonation with key k_E it is N(L_t - 2 d, L_t/gamma_t) where d
is the Hamming distance between Bob's codeword and the impostor's.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import CalibrationError, CapabilityError, DomainError, ParameterError
from .params import SystemParams
from .rng import RngStream
from .special import log_binomial_half_pmf, q_function
from .tag_codec import TagFunction, as_bits, key_index
from .waveform import ObservedTag, bpsk

MI_MAX_LK = 12


@dataclass(frozen=True)
class HypothesisStats:
    l_t: int
    gamma_t: float

    def __post_init__(self):
        if not (self.gamma_t > 0):
            raise ParameterError(f"gamma_t must be > 0, got {self.gamma_t}")

    @property
    def mean_h0(self) -> float:
        return float(self.l_t)

    @property
    def var(self) -> float:
        return self.l_t / self.gamma_t

    @property
    def sigma(self) -> float:
        return math.sqrt(self.var)

    def mean_h1_given(self, d: int) -> float:
        return float(self.l_t - 2 * d)

    @classmethod
    def of(cls, params: SystemParams) -> "HypothesisStats":
        return cls(params.l_t, params.gamma_t)


@dataclass(frozen=True)
class BinomialExact:
    """Impostor distance d ~ Binomial(L_t, 1/2): the ideal random-codebook law."""


@dataclass(frozen=True)
class MonteCarlo:
    """Impostor distances sampled from the actual ensemble over (s, k_E) pairs."""

    n_samples: int = 10_000

    def __post_init__(self):
        if self.n_samples < 1:
            raise ParameterError(f"n_samples must be >= 1, got {self.n_samples}")


@dataclass(frozen=True)
class DetectorConfig:
    target_pfa: float
    calibration: BinomialExact | MonteCarlo = field(default_factory=BinomialExact)
    threshold: float | None = None

    def __post_init__(self):
        if not (0.0 < self.target_pfa < 1.0):
            raise ParameterError(f"target_pfa must lie in (0, 1), got {self.target_pfa}")

    def with_threshold(self, threshold: float) -> "DetectorConfig":
        return DetectorConfig(self.target_pfa, self.calibration, float(threshold))


class Decision(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"


class Verdict(NamedTuple):
    decision: Decision
    statistic: float

    @property
    def accepted(self) -> bool:
        return self.decision is Decision.ACCEPT


class MIEstimate(NamedTuple):
    bits: float
    std_err: float


def _samples(y) -> np.ndarray:
    return np.asarray(y.samples if isinstance(y, ObservedTag) else y, dtype=float)


def statistic(y, c_b):
    """Correlation of the observation with Bob's expected codeword.

    ``y`` may also be a stack of observations with shape (n, L_t); the result
    is then an array of n statistics.
    """
    ys = _samples(y)
    c = as_bits(c_b, name="codeword")
    if ys.ndim not in (1, 2) or ys.shape[-1] != c.size:
        raise ParameterError(f"observation shape {ys.shape} does not match codeword length {c.size}")
    eta = ys @ bpsk(c)
    return float(eta) if ys.ndim == 1 else eta


def expected_false_alarm(threshold: float, means, weights, sigma: float) -> float:
    means = np.asarray(means, dtype=float)
    weights = np.asarray(weights, dtype=float)
    return float(np.sum(weights * q_function((threshold - means) / sigma)))


def solve_threshold(means, weights, sigma: float, target_pfa: float, tol: float | None = None) -> float:
    """Smallest threshold whose mixture false-alarm rate does not exceed target_pfa.

    The false-alarm rate is strictly decreasing in the threshold, so plain
    bisection on a bracket [min(means) - 40 sigma, max(means) + 40 sigma]
    works. Converges to an absolute width of ``tol`` (default 1e-9 sigma).
    """
    means = np.asarray(means, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if weights.size == 0 or means.shape != weights.shape:
        raise ParameterError("means and weights must be non-empty and of equal shape")
    tol = 1e-9 * sigma if tol is None else tol
    lo = float(means.min()) - 40.0 * sigma
    hi = float(means.max()) + 40.0 * sigma
    fa_lo = expected_false_alarm(lo, means, weights, sigma)
    fa_hi = expected_false_alarm(hi, means, weights, sigma)
    if not fa_lo > target_pfa:
        raise CalibrationError(
            f"target false-alarm {target_pfa} is at or above the largest achievable "
            f"rate {fa_lo:.6g}"
        )
    if fa_hi > target_pfa:
        raise CalibrationError(
            f"target false-alarm {target_pfa} is below the rate {fa_hi:.3g} reachable "
            f"at threshold {hi:.6g}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if expected_false_alarm(mid, means, weights, sigma) > target_pfa:
            lo = mid
        else:
            hi = mid
    return hi


def impostor_distance_law(tf: TagFunction, params: SystemParams, cfg: DetectorConfig,
                          k_b, messages: Sequence | None, rng: RngStream | None):
    """(distances, weights) of d_H(tau(s,k_B), tau(s,k_E)) under H1."""
    if isinstance(cfg.calibration, BinomialExact):
        d = np.arange(params.l_t + 1)
        return d, np.exp(log_binomial_half_pmf(params.l_t, d))
    if rng is None:
        raise ParameterError("Monte Carlo calibration needs an RngStream")
    k_b = as_bits(k_b, params.l_k, "key")
    counts = np.zeros(params.l_t + 1, dtype=np.int64)
    for _ in range(cfg.calibration.n_samples):
        if messages:
            s = messages[rng.choice_index(len(messages))]
        else:
            s = rng.bits(params.l_s)
        k_e = rng.bits(params.l_k)
        d = int(np.count_nonzero(tf.encode(s, k_b) != tf.encode(s, k_e)))
        counts[d] += 1
    d = np.nonzero(counts)[0]
    return d, counts[d] / counts.sum()


def calibrate_threshold(tf: TagFunction, params: SystemParams, cfg: DetectorConfig, k_b,
                        messages: Sequence | None = None, rng: RngStream | None = None) -> float:
    """Threshold meeting cfg.target_pfa in expectation over impostor (s, k_E)."""
    stats = HypothesisStats.of(params)
    d, w = impostor_distance_law(tf, params, cfg, k_b, messages, rng)
    return solve_threshold(stats.l_t - 2.0 * d, w, stats.sigma, cfg.target_pfa)


def worst_case_false_alarm(threshold: float, tf: TagFunction, params: SystemParams, k_b,
                           messages: Sequence) -> float:
    """Largest per-(s, k_E) false-alarm rate over enumerated messages and keys k_E != k_B."""
    tf.require_enumerable("worst_case_false_alarm")
    k_b = as_bits(k_b, params.l_k, "key")
    kb = key_index(k_b)
    best = params.l_t
    for s in messages:
        cb = tf.codebook(s)
        d = np.count_nonzero(cb != cb[kb], axis=1)
        d[kb] = params.l_t + 1
        best = min(best, int(d.min()))
    stats = HypothesisStats.of(params)
    return gaussian_accept(threshold, stats.mean_h1_given(best), stats.sigma)


def gaussian_accept(threshold: float, mean: float, sigma: float) -> float:
    """P(N(mean, sigma^2) >= threshold); a step function when sigma == 0."""
    if sigma == 0:
        return float(mean >= threshold)
    return float(q_function((threshold - mean) / sigma))


def detection_probability(threshold: float, params: SystemParams) -> float:
    stats = HypothesisStats.of(params)
    return gaussian_accept(threshold, stats.mean_h0, stats.sigma)


def verify(y, s, k_b, tf: TagFunction, cfg: DetectorConfig) -> Verdict:
    if cfg.threshold is None:
        raise ParameterError("detector config has no calibrated threshold")
    eta = statistic(y, tf.encode(s, k_b))
    return Verdict(Decision.ACCEPT if eta >= cfg.threshold else Decision.REJECT, eta)


def d_alpha_beta(alpha: float, beta: float) -> float:
    """Binary divergence (bits) between the H0 and H1 decision distributions.

    ``alpha`` is the miss probability, ``beta`` the false-alarm probability.
    """
    if not (0.0 < alpha < 1.0) or not (0.0 < beta < 1.0):
        raise DomainError(f"alpha and beta must lie in (0, 1), got alpha={alpha}, beta={beta}")
    return alpha * math.log2(alpha / (1.0 - beta)) + (1.0 - alpha) * math.log2((1.0 - alpha) / beta)


def mutual_information_exact(tf: TagFunction, s, params: SystemParams, n_mc: int,
                             rng: RngStream, chunk: int = 4096) -> MIEstimate:
    """Monte Carlo estimate of I(Y; K) in bits for a fixed message.

    The outer expectation over (k, w) is sampled; the mixture density in the
    denominator is summed exactly over all 2^L_k keys.
    """
    if params.l_k > MI_MAX_LK:
        raise CapabilityError(f"exact mutual information needs l_k <= {MI_MAX_LK}, got {params.l_k}")
    if n_mc < 2:
        raise ParameterError(f"n_mc must be >= 2, got {n_mc}")
    x = bpsk(tf.codebook(s))
    n_keys = x.shape[0]
    g = params.gamma_t
    sigma = 1.0 / math.sqrt(g)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_mc:
        m = min(chunk, n_mc - done)
        k = rng.integers(0, n_keys, size=m)
        y = x[k] + rng.normal((m, params.l_t), sigma)
        corr = g * (y @ x.T)
        # ||y - x_k||^2 differs from -2<y, x_k> by terms common to every key
        vals = (corr[np.arange(m), k] - logsumexp(corr, axis=1) + math.log(n_keys)) / math.log(2.0)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += m
    mean = total / n_mc
    var = max(total_sq / n_mc - mean * mean, 0.0) * n_mc / (n_mc - 1)
    return MIEstimate(mean, math.sqrt(var / n_mc))
