"""Seeded Monte Carlo sweeps and CSV tables.

Random streams: trial ``i`` of sweep point ``p`` draws everything it needs
from ``RngStream(master_seed, (p << 32) | i)``. Per-point setup (Bob's key,
the fixed message set) uses stream ``SETUP_STREAM | p`` and Monte Carlo
threshold calibration uses ``CALIBRATION_STREAM | p``. Trials only ever
contribute integer counts, so any split of the trial range across worker
processes reproduces the serial table byte for byte.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..adversary import impersonation_far, impersonation_search, ml_decode
from ..bounds import capacity_biawgn, p_spb, security_margin
from ..detector import (
    BinomialExact,
    calibrate_threshold,
    detection_probability,
    expected_false_alarm,
    impostor_distance_law,
    statistic,
)
from ..params import SystemParams, gamma_from_eb_n0
from ..rng import RngStream
from ..tag_codec import key_index
from ..waveform import transmit_tag
from .config import ExperimentConfig

SETUP_STREAM = 1 << 63
CALIBRATION_STREAM = 1 << 62
DEFAULT_IMPERSONATION_MESSAGES = 8

AUTH_COLUMNS = ("eb_n0_db", "gamma_t", "threshold", "trials", "pd_empirical", "pd_closed_form",
                "pfa_empirical", "pfa_target", "p_spb", "c2", "info_secure")
ML_ATTACK_COLUMNS = ("eb_n0_db", "gamma_t", "trials", "errors", "pe_empirical", "pe_std_err",
                     "p_spb", "p_spb_abs_error", "ratio")
IMPERSONATION_COLUMNS = ("eb_n0_db", "gamma_t", "trials", "d_star", "threshold", "far_empirical",
                         "far_std_err", "far_closed_form")
BOUNDS_COLUMNS = ("eb_n0_db", "gamma_t", "rc", "c2", "p_spb", "theta", "abs_error_est")
CALIBRATE_COLUMNS = ("eb_n0_db", "gamma_t", "target_pfa", "threshold", "expected_pfa",
                     "pd_closed_form")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def trial_stream(master_seed: int, point: int, trial: int) -> RngStream:
    return RngStream(master_seed, (point << 32) | trial)


def _chunks(n: int, parts: int):
    parts = max(1, min(parts, n))
    edges = np.linspace(0, n, parts + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _map_counts(fn, jobs, workers: int):
    """Sum integer-count tuples returned by fn over jobs, serially or in processes."""
    if workers <= 1 or len(jobs) <= 1:
        results = [fn(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(fn, jobs))
    return tuple(int(sum(col)) for col in zip(*results))


def _point_params(cfg: ExperimentConfig, eb_n0_db: float) -> SystemParams:
    return cfg.params.with_gamma(gamma_from_eb_n0(eb_n0_db, cfg.params.code_rate))


def _setup(cfg: ExperimentConfig, point: int, n_messages: int):
    rng = RngStream(cfg.master_seed, SETUP_STREAM | point)
    k_b = rng.bits(cfg.params.l_k)
    messages = [rng.bits(cfg.params.l_s) for _ in range(n_messages)]
    return k_b, messages


def _calibrate(cfg: ExperimentConfig, params: SystemParams, point: int, k_b, messages) -> float:
    rng = None
    if not isinstance(cfg.calibration, BinomialExact):
        rng = RngStream(cfg.master_seed, CALIBRATION_STREAM | point)
    return calibrate_threshold(cfg.tag_function, params, cfg.detector, k_b, messages or None, rng)


# --------------------------------------------------------------------------
# authentication sweep

def _auth_chunk(job):
    (tf, params, k_b, messages, threshold, master_seed, point, lo, hi, noise_var) = job
    accepted = false_accepts = 0
    for i in range(lo, hi):
        rng = trial_stream(master_seed, point, i)
        s = messages[rng.choice_index(len(messages))] if messages else rng.bits(params.l_s)
        c_b = tf.encode(s, k_b)
        y = transmit_tag(s, c_b, params, rng, noise_var)
        accepted += statistic(y, c_b) >= threshold
        # impostor with a uniformly drawn key on a fresh message
        s_e = messages[rng.choice_index(len(messages))] if messages else rng.bits(params.l_s)
        k_e = rng.bits(params.l_k)
        y_e = transmit_tag(s_e, tf.encode(s_e, k_e), params, rng, noise_var)
        false_accepts += statistic(y_e, tf.encode(s_e, k_b)) >= threshold
    return accepted, false_accepts


def auth_point(cfg: ExperimentConfig, point: int, eb_n0_db: float, workers: int | None = None) -> dict:
    params = _point_params(cfg, eb_n0_db)
    k_b, messages = _setup(cfg, point, cfg.n_messages)
    threshold = _calibrate(cfg, params, point, k_b, messages)
    noise_var = 0.0 if cfg.noiseless else params.noise_var
    workers = cfg.workers if workers is None else workers
    jobs = [(cfg.tag_function, params, k_b, messages, threshold, cfg.master_seed, point, lo, hi, noise_var)
            for lo, hi in _chunks(cfg.trials, 4 * workers)]
    accepted, false_accepts = _map_counts(_auth_chunk, jobs, workers)
    rc, c2, secure = security_margin(params)
    return {
        "eb_n0_db": eb_n0_db,
        "gamma_t": params.gamma_t,
        "threshold": threshold,
        "trials": cfg.trials,
        "pd_empirical": accepted / cfg.trials,
        "pd_closed_form": detection_probability(threshold, params),
        "pfa_empirical": false_accepts / cfg.trials,
        "pfa_target": cfg.target_pfa,
        "p_spb": p_spb(params.l_t, rc, params.gamma_t).p_e_lower,
        "c2": c2,
        "info_secure": secure,
    }


def run_auth_sweep(cfg: ExperimentConfig, workers: int | None = None) -> str:
    rows = [auth_point(cfg, p, eb, workers) for p, eb in enumerate(cfg.sweep)]
    return to_csv(AUTH_COLUMNS, rows)


# --------------------------------------------------------------------------
# attack sweeps

def _ml_chunk(job):
    tf, params, eve_noise_var, messages, master_seed, point, lo, hi = job
    errors = 0
    for i in range(lo, hi):
        rng = trial_stream(master_seed, point, i)
        s = messages[rng.choice_index(len(messages))] if messages else rng.bits(params.l_s)
        k = rng.bits(params.l_k)
        y = transmit_tag(s, tf.encode(s, k), params, rng, eve_noise_var)
        errors += key_index(ml_decode(tf, s, y).guessed_key) != key_index(k)
    return (errors,)


def ml_attack_point(cfg: ExperimentConfig, point: int, eb_n0_db: float, workers: int | None = None) -> dict:
    cfg.tag_function.require_enumerable("attack sweep")
    params = _point_params(cfg, eb_n0_db)
    eve = params.with_gamma(params.gamma_t * cfg.eve_gamma_scale)
    eve_noise = 0.0 if cfg.noiseless else eve.noise_var
    _, messages = _setup(cfg, point, cfg.n_messages)
    workers = cfg.workers if workers is None else workers
    jobs = [(cfg.tag_function, params, eve_noise, messages, cfg.master_seed, point, lo, hi)
            for lo, hi in _chunks(cfg.trials, 4 * workers)]
    (errors,) = _map_counts(_ml_chunk, jobs, workers)
    pe = errors / cfg.trials
    bound = p_spb(params.l_t, params.code_rate, eve.gamma_t)
    return {
        "eb_n0_db": eb_n0_db,
        "gamma_t": eve.gamma_t,
        "trials": cfg.trials,
        "errors": errors,
        "pe_empirical": pe,
        "pe_std_err": math.sqrt(pe * (1.0 - pe) / cfg.trials),
        "p_spb": bound.p_e_lower,
        "p_spb_abs_error": bound.abs_error_est,
        "ratio": pe / bound.p_e_lower if bound.p_e_lower > 0 else math.inf,
    }


def _impersonation_chunk(job):
    tf, params, k_b, s_star, k_star, threshold, noise_var, master_seed, point, lo, hi = job
    c_b = tf.encode(s_star, k_b)
    forged = tf.encode(s_star, k_star)
    accepted = 0
    for i in range(lo, hi):
        rng = trial_stream(master_seed, point, i)
        y = transmit_tag(s_star, forged, params, rng, noise_var)
        accepted += statistic(y, c_b) >= threshold
    return (accepted,)


def impersonation_point(cfg: ExperimentConfig, point: int, eb_n0_db: float,
                        workers: int | None = None) -> dict:
    cfg.tag_function.require_enumerable("impersonation sweep")
    params = _point_params(cfg, eb_n0_db)
    k_b, messages = _setup(cfg, point, cfg.n_messages or DEFAULT_IMPERSONATION_MESSAGES)
    threshold = _calibrate(cfg, params, point, k_b, messages)
    s_star, k_star, d_star = impersonation_search(cfg.tag_function, k_b, messages)
    noise_var = 0.0 if cfg.noiseless else params.noise_var
    workers = cfg.workers if workers is None else workers
    jobs = [(cfg.tag_function, params, k_b, s_star, k_star, threshold, noise_var, cfg.master_seed,
             point, lo, hi) for lo, hi in _chunks(cfg.trials, 4 * workers)]
    (accepted,) = _map_counts(_impersonation_chunk, jobs, workers)
    far = accepted / cfg.trials
    return {
        "eb_n0_db": eb_n0_db,
        "gamma_t": params.gamma_t,
        "trials": cfg.trials,
        "d_star": d_star,
        "threshold": threshold,
        "far_empirical": far,
        "far_std_err": math.sqrt(far * (1.0 - far) / cfg.trials),
        "far_closed_form": impersonation_far(d_star, threshold, params),
    }


def run_attack_sweep(cfg: ExperimentConfig, workers: int | None = None) -> str:
    """Per-point attack table; ``attack = impersonation`` selects the active attack,
    anything else the passive ML key-recovery attack."""
    cfg.tag_function.require_enumerable("attack sweep")
    if cfg.attack == "impersonation":
        rows = [impersonation_point(cfg, p, eb, workers) for p, eb in enumerate(cfg.sweep)]
        return to_csv(IMPERSONATION_COLUMNS, rows)
    rows = [ml_attack_point(cfg, p, eb, workers) for p, eb in enumerate(cfg.sweep)]
    return to_csv(ML_ATTACK_COLUMNS, rows)


# --------------------------------------------------------------------------
# deterministic tables

def bounds_rows(l_t: int, r_c: float, sweep) -> list[dict]:
    rows = []
    for eb in sweep:
        g = gamma_from_eb_n0(eb, r_c)
        cap = capacity_biawgn(g)
        spb = p_spb(l_t, r_c, g)
        rows.append({
            "eb_n0_db": eb,
            "gamma_t": g,
            "rc": r_c,
            "c2": cap.c2,
            "p_spb": spb.p_e_lower,
            "theta": spb.theta,
            "abs_error_est": max(spb.abs_error_est, cap.abs_error_est),
        })
    return rows


def tabulate_bounds(l_t: int, r_c: float, sweep) -> str:
    return to_csv(BOUNDS_COLUMNS, bounds_rows(l_t, r_c, sweep))


def run_calibration(cfg: ExperimentConfig) -> str:
    rows = []
    for p, eb in enumerate(cfg.sweep):
        params = _point_params(cfg, eb)
        k_b, messages = _setup(cfg, p, cfg.n_messages)
        thr = _calibrate(cfg, params, p, k_b, messages)
        rng = None
        if not isinstance(cfg.calibration, BinomialExact):
            rng = RngStream(cfg.master_seed, CALIBRATION_STREAM | p)
        d, w = impostor_distance_law(cfg.tag_function, params, cfg.detector, k_b, messages or None, rng)
        sigma = math.sqrt(params.l_t / params.gamma_t)
        rows.append({
            "eb_n0_db": eb,
            "gamma_t": params.gamma_t,
            "target_pfa": cfg.target_pfa,
            "threshold": thr,
            "expected_pfa": expected_false_alarm(thr, params.l_t - 2.0 * d, w, sigma),
            "pd_closed_form": detection_probability(thr, params),
        })
    return to_csv(CALIBRATE_COLUMNS, rows)
