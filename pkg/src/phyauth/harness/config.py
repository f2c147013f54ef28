"""Flat ``key = value`` experiment configuration.

One setting per line, ``#`` starts a comment, blank lines are ignored.
Recognized keys::

    l_k                  key length in bits (required)
    l_t                  tag length in bits (required)
    q                    spreading factor, l_s = q * l_t (default 1)
    rho_t                tag amplitude in (0, 1) (default 1/sqrt(2))
    tag_function         keyed_hash | seeded_random_codebook (default keyed_hash)
    codebook_seed        64-bit seed of the random codebook (default 0)
    sweep                comma separated Eb/N0 points in dB (required)
    trials               Monte Carlo trials per point (default 1000)
    target_pfa           false-alarm target of the detector (default 0.01)
    master_seed          64-bit master seed (default 0)
    attack               none | ml | impersonation (default none)
    calibration          binomial_exact | monte_carlo (default binomial_exact)
    calibration_samples  (s, k_E) draws for monte_carlo calibration (default 10000)
    n_messages           size of a fixed random message set; 0 draws a fresh
                         message every trial (default 0)
    eve_gamma_scale      Eve's tag SNR as a multiple of Bob's (default 1.0)
    noiseless            true | false; disable channel noise (default false)
    workers              worker processes for trial loops (default 1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..detector import BinomialExact, DetectorConfig, MonteCarlo
from ..errors import CapabilityError, ConfigError, ParameterError
from ..params import SystemParams
from ..tag_codec import KeyedHash, SeededRandomCodebook, TagFunction

ATTACKS = ("none", "ml", "impersonation")


@dataclass(frozen=True)
class ExperimentConfig:
    params: SystemParams
    tag_function: TagFunction
    sweep: tuple
    trials: int
    target_pfa: float
    master_seed: int
    attack: str = "none"
    calibration: BinomialExact | MonteCarlo = field(default_factory=BinomialExact)
    n_messages: int = 0
    eve_gamma_scale: float = 1.0
    noiseless: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}", field="trials")
        if not self.sweep:
            raise ConfigError("sweep must contain at least one Eb/N0 point", field="sweep")
        if not (0.0 < self.target_pfa < 1.0):
            raise ConfigError(f"target_pfa must lie in (0, 1), got {self.target_pfa}", field="target_pfa")
        if not (0 <= self.master_seed < 2**64):
            raise ConfigError("master_seed must be a 64-bit unsigned integer", field="master_seed")
        if self.attack not in ATTACKS:
            raise ConfigError(f"attack must be one of {ATTACKS}, got {self.attack!r}", field="attack")
        if self.n_messages < 0:
            raise ConfigError("n_messages must be >= 0", field="n_messages")
        if not (self.eve_gamma_scale > 0):
            raise ConfigError("eve_gamma_scale must be > 0", field="eve_gamma_scale")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1", field="workers")

    @property
    def detector(self) -> DetectorConfig:
        return DetectorConfig(self.target_pfa, self.calibration)

    def override(self, **changes) -> "ExperimentConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)


def _to_int(v, key, line):
    try:
        return int(v, 0)
    except ValueError:
        raise ConfigError(f"expected an integer, got {v!r}", line, key) from None


def _to_float(v, key, line):
    try:
        out = float(v)
    except ValueError:
        raise ConfigError(f"expected a number, got {v!r}", line, key) from None
    if not math.isfinite(out):
        raise ConfigError(f"expected a finite number, got {v!r}", line, key)
    return out


def _to_bool(v, key, line):
    low = v.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"expected true/false, got {v!r}", line, key)


def _sweep(v, key, line):
    parts = [p.strip() for p in v.split(",") if p.strip()]
    if not parts:
        raise ConfigError("sweep must list at least one value", line, key)
    return tuple(_to_float(p, key, line) for p in parts)


_PARSERS = {
    "l_k": _to_int,
    "l_t": _to_int,
    "q": _to_int,
    "rho_t": _to_float,
    "tag_function": lambda v, k, n: v,
    "codebook_seed": _to_int,
    "sweep": _sweep,
    "trials": _to_int,
    "target_pfa": _to_float,
    "master_seed": _to_int,
    "attack": lambda v, k, n: v,
    "calibration": lambda v, k, n: v,
    "calibration_samples": _to_int,
    "n_messages": _to_int,
    "eve_gamma_scale": _to_float,
    "noiseless": _to_bool,
    "workers": _to_int,
}
_REQUIRED = ("l_k", "l_t", "sweep")


def parse_config(text: str) -> ExperimentConfig:
    values = {}
    lines = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", n)
        key, val = (p.strip() for p in body.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError("unknown key", n, key)
        if key in values:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", n, key)
        values[key] = _PARSERS[key](val, key, n)
        lines[key] = n
    for key in _REQUIRED:
        if key not in values:
            raise ConfigError("missing required key", field=key)
    return build_config(values, lines)


def build_config(values: dict, lines: dict | None = None) -> ExperimentConfig:
    lines = lines or {}

    def fail(msg, key):
        return ConfigError(msg, lines.get(key), key)

    try:
        params = SystemParams.make(values["l_k"], values["l_t"], values.get("q", 1),
                                   values.get("rho_t", math.sqrt(0.5)), 1.0)
    except ParameterError as e:
        raise ConfigError(str(e)) from None

    kind = values.get("tag_function", "keyed_hash")
    if kind == "keyed_hash":
        tf = KeyedHash(params)
    elif kind == "seeded_random_codebook":
        try:
            tf = SeededRandomCodebook(params, values.get("codebook_seed", 0))
        except (ParameterError, CapabilityError) as e:
            raise fail(str(e), "tag_function") from None
    else:
        raise fail(f"unknown tag function {kind!r}", "tag_function")

    cal = values.get("calibration", "binomial_exact")
    if cal == "binomial_exact":
        calibration = BinomialExact()
    elif cal == "monte_carlo":
        try:
            calibration = MonteCarlo(values.get("calibration_samples", 10_000))
        except ParameterError as e:
            raise fail(str(e), "calibration_samples") from None
    else:
        raise fail(f"unknown calibration {cal!r}", "calibration")

    try:
        return ExperimentConfig(
            params=params,
            tag_function=tf,
            sweep=tuple(values["sweep"]),
            trials=values.get("trials", 1000),
            target_pfa=values.get("target_pfa", 0.01),
            master_seed=values.get("master_seed", 0),
            attack=values.get("attack", "none"),
            calibration=calibration,
            n_messages=values.get("n_messages", 0),
            eve_gamma_scale=values.get("eve_gamma_scale", 1.0),
            noiseless=values.get("noiseless", False),
            workers=values.get("workers", 1),
        )
    except ConfigError as e:
        if e.field and e.line is None and e.field in lines:
            raise ConfigError(str(e).split("] ", 1)[-1], lines[e.field], e.field) from None
        raise


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config file: {e}") from None
    return parse_config(text)
