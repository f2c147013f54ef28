"""Gaussian tail function and log-domain quadrature helpers."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erfc, gammaln, log_ndtr, logsumexp

GL_ORDER = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)
_GL_LOGW = np.log(_GL_W)
_Q_DIRECT_LIMIT = 8.0


def q_function(x):
    """Gaussian tail probability Q(x) = P(N(0,1) > x).

    Uses ``erfc`` for |x| <= 8 and exponentiates the log-domain tail beyond.
    """
    x = np.asarray(x, dtype=float)
    direct = 0.5 * erfc(x / math.sqrt(2.0))
    out = np.where(np.abs(x) <= _Q_DIRECT_LIMIT, direct, np.exp(log_ndtr(-x)))
    return out if out.ndim else float(out)


def log_q_function(x):
    """Natural log of Q(x), accurate far into both tails."""
    out = log_ndtr(-np.asarray(x, dtype=float))
    return out if np.ndim(out) else float(out)


def gl_nodes(a, b, panels: int):
    """Composite Gauss-Legendre nodes and log-weights on [a, b].

    ``a`` and ``b`` may be arrays of shape (m,); the result then has shape
    (m, panels * GL_ORDER). Each panel carries a 16-point rule.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = np.linspace(0.0, 1.0, panels + 1)
    left = a[..., None] + (b - a)[..., None] * t[:-1]
    half = 0.5 * (b - a)[..., None] / panels * np.ones(panels)
    mid = left + half
    x = mid[..., :, None] + half[..., :, None] * _GL_X
    logw = np.log(half)[..., :, None] + _GL_LOGW
    shape = x.shape[:-2] + (panels * GL_ORDER,)
    return x.reshape(shape), logw.reshape(shape)


def log_integrate(log_f, a, b, panels: int):
    """log of the integral of exp(log_f) over [a, b] (a < b), row-wise for arrays."""
    x, logw = gl_nodes(a, b, panels)
    return logsumexp(log_f(x) + logw, axis=-1)


def log_binomial_half_pmf(n: int, k):
    """log P(Binomial(n, 1/2) = k)."""
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1) - n * math.log(2.0)
