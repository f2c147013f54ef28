"""Bi-AWGN capacity and Shannon's 1959 sphere-packing lower bound.

Everything that can overflow at block lengths in the hundreds (sin^(L-2),
Gamma((L+1)/2), the e^{-L gamma} prefactor) is carried in natural-log form
and only exponentiated after assembly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from .errors import NumericalError, ParameterError
from .params import SystemParams
from .special import gl_nodes, log_integrate, log_q_function

LN2 = math.log(2.0)
_DROP = 60.0            # nats below the peak treated as zero mass
_CAP_HALF_WIDTH = 10.0  # capacity integral truncation, in noise std units
_THETA_TOL = 1e-10


@dataclass(frozen=True)
class CapacityResult:
    c2: float
    abs_error_est: float


@dataclass(frozen=True)
class SpbResult:
    p_e_lower: float
    theta: float
    abs_error_est: float
    log_terms: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# capacity

def _capacity_expectation(beta: float, panels: int) -> float:
    u, logw = gl_nodes(-_CAP_HALF_WIDTH, _CAP_HALF_WIDTH, panels)
    y = beta + u
    integrand = np.logaddexp(0.0, -2.0 * beta * y) / LN2
    weights = np.exp(logw - 0.5 * u * u) / math.sqrt(2.0 * math.pi)
    return float(np.sum(weights * integrand))


def capacity_biawgn(gamma_t: float, resolution: int = 1) -> CapacityResult:
    """Capacity in bits/use of the binary-input AWGN channel at SNR gamma_t.

    ``C = 1 - E[log2(1 + exp(-2 b Y))]`` with ``Y ~ N(b, 1)``, ``b = sqrt(2 gamma_t)``.
    The expectation is truncated to ``|Y - b| <= 10``; the truncated mass is
    bounded analytically and added to the error estimate together with the
    change under halving the node count.
    """
    if gamma_t < 0 or math.isnan(gamma_t):
        raise ParameterError(f"gamma_t must be >= 0, got {gamma_t}")
    if gamma_t == 0:
        return CapacityResult(0.0, 0.0)
    beta = math.sqrt(2.0 * gamma_t)
    panels = 32 * resolution
    fine = _capacity_expectation(beta, panels)
    coarse = _capacity_expectation(beta, panels // 2)
    phi10 = math.exp(-0.5 * _CAP_HALF_WIDTH**2) / math.sqrt(2.0 * math.pi)
    # integrand <= 1 + 2 b |Y| / ln 2 outside the window
    tail = math.erfc(_CAP_HALF_WIDTH / math.sqrt(2.0)) + 2.0 * beta / LN2 * phi10
    err = abs(fine - coarse) + tail + 1e-14
    c2 = min(1.0, max(0.0, 1.0 - fine))
    return CapacityResult(c2, err)


def capacity_crossing(rate: float, lo: float = 1e-6, hi: float = 1e3) -> float:
    """SNR gamma at which the Bi-AWGN capacity equals ``rate`` (0 < rate < 1)."""
    if not (0 < rate < 1):
        raise ParameterError(f"rate must lie in (0, 1), got {rate}")
    return brentq(lambda g: capacity_biawgn(g).c2 - rate, lo, hi, xtol=1e-14, rtol=1e-14)


# --------------------------------------------------------------------------
# solid angle and theta

def _left_cut(g, a: float, b: float, level: float) -> float:
    """Left end of the region of [a, b] where increasing ``g`` is >= ``level``."""
    if g(a) >= level:
        return a
    lo, hi = a, b
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) >= level:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return lo


def _log_sin_rising(n: int, a: float, b: float, panels: int) -> float:
    """log of the integral of sin^n over [a, b], 0 <= a < b <= pi/2."""
    if n == 0:
        return math.log(b - a)

    def g(phi):
        return n * math.log(math.sin(phi)) if phi > 0 else -math.inf

    left = _left_cut(g, a, b, g(b) - _DROP)
    return float(log_integrate(lambda x: n * np.log(np.sin(x)), left, b, panels))


def log_solid_angle_fraction(l_t: int, theta: float, panels: int = 8) -> float:
    """log( Omega_L(theta) / Omega_L(pi) ), the cap fraction of the unit sphere in R^L."""
    n = l_t - 2
    if not (0 < theta <= math.pi):
        raise ParameterError(f"theta must lie in (0, pi], got {theta}")
    half = math.pi / 2
    log_half = _log_sin_rising(n, 0.0, half, panels)
    log_full = LN2 + log_half
    if theta <= half:
        log_num = _log_sin_rising(n, 0.0, theta, panels)
    elif theta >= math.pi:
        return 0.0
    else:
        log_num = np.logaddexp(log_half, _log_sin_rising(n, math.pi - theta, half, panels))
    return float(log_num - log_full)


def solve_theta(l_t: int, r_c: float, resolution: int = 1) -> float:
    """Cone half-angle whose solid-angle fraction equals 2^(-l_t r_c)."""
    if l_t < 2:
        raise ParameterError(f"l_t must be >= 2, got {l_t}")
    if not (0 < r_c <= 1):
        raise ParameterError(f"r_c must lie in (0, 1], got {r_c}")
    panels = 8 * resolution
    target = -l_t * r_c * LN2

    def resid(th):
        return log_solid_angle_fraction(l_t, th, panels) - target

    lo, hi = 1e-12, math.pi
    r_lo, r_hi = resid(lo), resid(hi)
    if not (r_lo < 0 < r_hi):
        raise NumericalError("theta equation is not bracketed", l_t=l_t, r_c=r_c,
                             resid_lo=r_lo, resid_hi=r_hi)
    theta = brentq(resid, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    r = resid(theta)
    if abs(r) > _THETA_TOL:
        raise NumericalError("theta residual above tolerance", l_t=l_t, r_c=r_c, theta=theta, residual=r)
    return theta


# --------------------------------------------------------------------------
# f_L

def log_f_l(l: int, x, resolution: int = 1):
    """log f_L(x) where
    f_L(x) = 2^{-(L-1)/2} / Gamma((L+1)/2) * int_0^inf z^{L-1} exp(-z^2/2 + z x) dz.

    The integrand is log-concave with its mode at z* = (x + sqrt(x^2 + 4(L-1)))/2;
    the integration window is grown around z* until both ends sit 60 nats
    below the mode.
    """
    if not isinstance(l, (int, np.integer)) or l < 1:
        raise ParameterError(f"L must be an integer >= 1, got {l!r}")
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    m = l - 1
    zs = 0.5 * (xa + np.sqrt(xa * xa + 4.0 * m))

    def g(z, xv):
        with np.errstate(divide="ignore"):
            core = -0.5 * z * z + xv * z
            if m:
                core = core + m * np.log(z)
        return core

    peak = g(zs, xa)
    with np.errstate(divide="ignore"):
        scale = np.where(zs > 0, 1.0 / np.sqrt(1.0 + m / np.where(zs > 0, zs, 1.0) ** 2),
                         1.0 / np.maximum(1.0, np.abs(xa)))
    h = 12.0 * scale
    for _ in range(64):
        lo = np.maximum(0.0, zs - h)
        hi = zs + h
        ok_lo = (lo == 0.0) | (g(lo, xa) <= peak - _DROP)
        ok_hi = g(hi, xa) <= peak - _DROP
        if np.all(ok_lo & ok_hi):
            break
        h = np.where(ok_lo & ok_hi, h, 2.0 * h)
    else:
        raise NumericalError("f_L window did not converge", L=l)

    panels = 8 * resolution
    xcol = xa[:, None]
    log_int = log_integrate(lambda z: g(z, xcol), lo, hi, panels)
    out = log_int - 0.5 * m * LN2 - gammaln(0.5 * (l + 1))
    return out if np.ndim(x) else float(out[0])


# --------------------------------------------------------------------------
# sphere-packing bound

def _outer_log_integral(l_t, amp, a, b, panels, inner_res):
    n = l_t - 2

    def h(phi):
        shape = np.shape(phi)
        phi = np.ravel(phi)
        with np.errstate(divide="ignore"):
            val = n * np.log(np.sin(phi)) if n else np.zeros_like(phi)
        val = val + log_f_l(l_t, amp * np.cos(phi), inner_res)
        return val.reshape(shape)

    grid = np.linspace(a, b, 513)
    hv = h(grid)
    keep = np.nonzero(hv >= hv.max() - _DROP)[0]
    ca = grid[max(keep[0] - 1, 0)]
    cb = grid[min(keep[-1] + 1, grid.size - 1)]
    return float(log_integrate(h, ca, cb, panels))


def _assemble(log_q, log_pref, log_int, sign):
    """Combine Q-term and integral term; returns (p, log_p)."""
    t2 = log_pref + log_int
    if sign > 0:
        log_p = float(np.logaddexp(log_q, t2))
        return math.exp(log_p), log_p
    diff = math.exp(log_q) - math.exp(t2)
    return diff, (math.log(diff) if diff > 0 else -math.inf)


def p_spb(l_t: int, r_c: float, gamma_t: float, resolution: int = 1,
          rel_tol: float = 1e-12, max_doublings: int = 6) -> SpbResult:
    """Shannon (1959) sphere-packing lower bound on block error probability.

    ``P = Q(sqrt(2 L g)) + (L-1)/sqrt(2 pi) e^{-L g}
          * int_theta^{pi/2} sin^{L-2}(phi) f_L(sqrt(2 L g) cos phi) dphi``

    with theta from :func:`solve_theta`. The outer integral starts at
    512*resolution Gauss-Legendre nodes and doubles until the log-integral
    moves by less than ``rel_tol``. When theta > pi/2 the integral runs
    backwards and is subtracted.
    """
    if not isinstance(l_t, (int, np.integer)) or l_t < 2:
        raise ParameterError(f"l_t must be an integer >= 2, got {l_t!r}")
    if not (0 < r_c <= 1):
        raise ParameterError(f"r_c must lie in (0, 1], got {r_c}")
    if not (gamma_t > 0):
        raise ParameterError(f"gamma_t must be > 0, got {gamma_t}")

    theta = solve_theta(l_t, r_c, resolution)
    amp = math.sqrt(2.0 * l_t * gamma_t)
    log_q = log_q_function(amp)
    log_pref = math.log(l_t - 1) - 0.5 * math.log(2.0 * math.pi) - l_t * gamma_t
    half = math.pi / 2
    sign = 1 if theta < half else -1
    a, b = (theta, half) if sign > 0 else (half, theta)

    if b - a <= 0.0:
        p = math.exp(log_q)
        return SpbResult(p, theta, 1e-15 + 1e-12 * p,
                         {"log_q_term": log_q, "log_integral_term": -math.inf,
                          "log_p": log_q, "clamped": False, "outer_panels": 0})

    inner_res = resolution
    panels = 32 * resolution
    prev = _outer_log_integral(l_t, amp, a, b, panels, inner_res)
    for _ in range(max_doublings):
        panels *= 2
        cur = _outer_log_integral(l_t, amp, a, b, panels, inner_res)
        if abs(cur - prev) <= rel_tol * max(1.0, abs(cur)):
            break
        prev = cur
    else:
        raise NumericalError("outer sphere-packing integral did not converge",
                             l_t=l_t, r_c=r_c, gamma_t=gamma_t, panels=panels,
                             last_change=abs(cur - prev))

    p, log_p = _assemble(log_q, log_pref, cur, sign)
    p_outer_coarse, _ = _assemble(log_q, log_pref, prev, sign)
    inner_fine = _outer_log_integral(l_t, amp, a, b, panels, 2 * inner_res)
    p_inner_fine, _ = _assemble(log_q, log_pref, inner_fine, sign)
    err = abs(p - p_outer_coarse) + abs(p - p_inner_fine) + 1e-12 * abs(p) + 1e-300

    clamped = p > 1.0 or p < 0.0
    p_out = min(1.0, max(0.0, p))
    log_terms = {
        "log_q_term": log_q,
        "log_integral_term": log_pref + cur,
        "log_p": log_p,
        "clamped": clamped,
        "unclamped": p,
        "outer_panels": panels,
    }
    return SpbResult(p_out, theta, err, log_terms)


def security_margin(params: SystemParams) -> tuple[float, float, bool]:
    """(R_c, C_2(gamma_t), R_c > C_2): information security above capacity."""
    rc = params.code_rate
    c2 = capacity_biawgn(params.gamma_t).c2
    # C_2 < 1 at every finite SNR even where it rounds to 1.0
    secure = rc > c2 or (rc >= 1.0 and math.isfinite(params.gamma_t))
    return rc, c2, secure
