"""Eve: passive key recovery by decoding, and optimized impersonation.

All searches scan the key space in lexicographic order and keep the first
best key, so any parallel split that reduces with "smaller key wins on equal
score" reproduces the sequential answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .detector import HypothesisStats, gaussian_accept
from .errors import ParameterError
from .params import SystemParams
from .tag_codec import TagFunction, as_bits, key_from_index, key_index
from .waveform import ObservedTag, bpsk


@dataclass
class ObservationLog:
    """Eve's recorded (message, observed tag) history."""

    pairs: list = field(default_factory=list)

    def append(self, s, y: ObservedTag):
        if self.pairs and len(y) != len(self.pairs[0][1]):
            raise ParameterError("all observed tags in a log must share one length")
        self.pairs.append((as_bits(s, name="message"), y))

    def __len__(self):
        return len(self.pairs)


@dataclass(frozen=True)
class AttackResult:
    guessed_key: np.ndarray | None
    success: bool
    keys_tested: int
    log_likelihood: float = math.nan


def recover_key_noiseless(tf: TagFunction, s, t) -> AttackResult:
    """Table lookup: first key (lexicographic) whose tag equals t exactly."""
    tf.require_enumerable("recover_key_noiseless")
    t = as_bits(t, tf.params.l_t, "tag")
    cb = tf.codebook(s)
    hits = np.nonzero((cb == t).all(axis=1))[0]
    if hits.size == 0:
        return AttackResult(None, False, cb.shape[0], -math.inf)
    i = int(hits[0])
    return AttackResult(key_from_index(i, tf.params.l_k), True, i + 1, 0.0)


def _log_lik(y: ObservedTag, x: np.ndarray) -> np.ndarray:
    """Gaussian log-likelihood of y under each row of the +/-1 matrix x."""
    ys = np.asarray(y.samples, dtype=float)
    g = y.gamma_t
    if math.isinf(g):
        # noiseless: exact match only; rank by correlation but report 0 / -inf
        return np.where(np.all(x == ys, axis=1), 0.0, -math.inf)
    sq = np.sum((ys - x) ** 2, axis=1)
    return -0.5 * g * sq - 0.5 * ys.size * math.log(2.0 * math.pi / g)


def ml_decode(tf: TagFunction, s, y: ObservedTag) -> AttackResult:
    """Maximum-likelihood key estimate from one observed tag.

    Maximizes the correlation <y, bpsk(tau(s,k))>, which is equivalent to
    minimum Euclidean distance because every codeword has the same energy.
    Equal scores resolve to the smallest key.
    """
    tf.require_enumerable("ml_decode")
    ys = np.asarray(y.samples, dtype=float)
    if ys.size != tf.params.l_t:
        raise ParameterError(f"observation length {ys.size} != l_t={tf.params.l_t}")
    x = bpsk(tf.codebook(s))
    i = int(np.argmax(x @ ys))
    ll = float(_log_lik(y, x[i:i + 1])[0])
    return AttackResult(key_from_index(i, tf.params.l_k), True, x.shape[0], ll)


def ml_decode_log(tf: TagFunction, log: ObservationLog) -> AttackResult:
    """Joint ML over several observations: argmax_k sum_i log p(y_i | k, s_i)."""
    tf.require_enumerable("ml_decode_log")
    if not len(log):
        raise ParameterError("observation log is empty")
    total = np.zeros(2**tf.params.l_k)
    for s, y in log.pairs:
        total += _log_lik(y, bpsk(tf.codebook(s)))
    i = int(np.argmax(total))
    return AttackResult(key_from_index(i, tf.params.l_k), True, total.size, float(total[i]))


def key_error(result: AttackResult, k_true) -> bool:
    return result.guessed_key is None or key_index(result.guessed_key) != key_index(k_true)


def impersonation_search(tf: TagFunction, k_b, messages: Sequence):
    """Attacker's best (message, key) pair: the closest foreign codeword to Bob's.

    Returns ``(s*, k_E*, d*)`` minimizing d_H(tau(s, k_B), tau(s, k_E)) over the
    given messages and all k_E != k_B, first in (message, key) order on ties.
    """
    tf.require_enumerable("impersonation_search")
    if len(messages) == 0:
        raise ParameterError("impersonation_search needs at least one message")
    if tf.params.l_k < 1:
        raise ParameterError("impersonation needs at least two keys")
    kb = key_index(as_bits(k_b, tf.params.l_k, "key"))
    best = None
    for s in messages:
        cb = tf.codebook(s)
        d = np.count_nonzero(cb != cb[kb], axis=1)
        d[kb] = tf.params.l_t + 1
        i = int(np.argmin(d))
        if best is None or d[i] < best[2]:
            best = (as_bits(s), i, int(d[i]))
    s, i, d = best
    return s, key_from_index(i, tf.params.l_k), d


def impersonation_far(d_star: int, threshold: float, params: SystemParams) -> float:
    """False-acceptance probability of an impostor at codeword distance d_star."""
    if not (0 <= d_star <= params.l_t):
        raise ParameterError(f"d_star must lie in [0, {params.l_t}], got {d_star}")
    stats = HypothesisStats.of(params)
    return gaussian_accept(threshold, stats.mean_h1_given(d_star), stats.sigma)
