"""Scenario configuration: YAML documents validated against a fixed schema.

Grammar
-------
A scenario file is a YAML mapping (JSON is accepted too, being a YAML subset)
with the sections below.  Every key is optional; omitted keys take the
default shown.  Unknown keys are rejected with a nearest-key suggestion.

.. code-block:: yaml

    atoms:
      detuning_MHz: 200.0        # one-photon detuning Delta from F=2 -> F'=2, != 0, != -816.7
      gamma0_per_us: 0.0         # coherence decay rate, >= 0
    magnetics:
      B0_gauss: 0.25             # bias field, >= 0
      gradient_MHz: 0.25         # write gradient span across the ensemble, > 0
      flip_time_us: 40.0         # gradient reversal time, > 0
      beta_per_rail: null        # number or [beta1, beta2]; overrides calibration
      calibration_target: [0.39, 0.32]   # rail efficiencies to calibrate to, or null
      noise:
        sigma_B_gauss: 0.0       # quasi-static shot-to-shot field deviation, >= 0
        mains_amp_gauss: 0.0     # mains harmonic amplitude, >= 0
        mains_freq_Hz: 50.0      # > 0
        mains_triggered: false
    signals:
      shape: gaussian            # only gaussian
      width_us: 10.0             # intensity FWHM, > 0
      centre_us: 15.0            # mean arrival time of the two rails
      amplitude: 1.0             # number or [a1, a2], >= 0
      polarisation: H            # H, V, D, A, L, R
      temporal_match: 0.97       # rail envelope overlap, set by a time offset, in (0, 1]
      duration_us: 90.0          # simulated window, > 0
    control:
      polarisation: V
      mode: linear               # linear | circular
    grid:
      Nz: 256                    # >= 16
      dt_us: 0.05                # > 0
    run:
      seed: 0                    # integer >= 0
      trials: 1000               # Monte-Carlo trials, >= 100
    sweep:
      parameter: beta            # beta | detuning
      values: [0.05, 0.1, 0.2, 0.4, 0.8]
    spectrum:
      span_MHz: null             # half-width of the probe ladder; null -> delta0 + gradient + 0.5
      points: 801                # >= 100
      linewidth_MHz: 0.05        # homogeneous half-width, > 0
"""
import copy
import difflib
import hashlib
import json
from pathlib import Path

import yaml

from .exceptions import ConfigError

__all__ = ["DEFAULTS", "parse_config", "load_config", "validate_config", "config_digest",
           "suggest_key", "PAPER_REPLICA", "resolve_config_path"]

PAPER_REPLICA = Path(__file__).with_name("configs") / "paper_replica.yaml"

DEFAULTS = {
    "atoms": {"detuning_MHz": 200.0, "gamma0_per_us": 0.0},
    "magnetics": {
        "B0_gauss": 0.25,
        "gradient_MHz": 0.25,
        "flip_time_us": 40.0,
        "beta_per_rail": None,
        "calibration_target": [0.39, 0.32],
        "noise": {"sigma_B_gauss": 0.0, "mains_amp_gauss": 0.0, "mains_freq_Hz": 50.0,
                  "mains_triggered": False},
    },
    "signals": {"shape": "gaussian", "width_us": 10.0, "centre_us": 15.0, "amplitude": 1.0,
                "polarisation": "H", "temporal_match": 0.97, "duration_us": 90.0},
    "control": {"polarisation": "V", "mode": "linear"},
    "grid": {"Nz": 256, "dt_us": 0.05},
    "run": {"seed": 0, "trials": 1000},
    "sweep": {"parameter": "beta", "values": [0.05, 0.1, 0.2, 0.4, 0.8]},
    "spectrum": {"span_MHz": None, "points": 801, "linewidth_MHz": 0.05},
}

POLARISATIONS = ("H", "V", "D", "A", "L", "R")


def suggest_key(key, allowed):
    """Closest allowed key by sequence similarity, or None."""
    hits = difflib.get_close_matches(key, list(allowed), n=1, cutoff=0.3)
    return hits[0] if hits else None


def _merge(defaults, user, path=""):
    if not isinstance(user, dict):
        raise ConfigError(f"{path or 'document'} must be a mapping, got {type(user).__name__}")
    out = copy.deepcopy(defaults)
    for key, value in user.items():
        where = f"{path}.{key}" if path else str(key)
        if key not in defaults:
            hint = suggest_key(str(key), defaults)
            msg = f"unknown key {where!r}"
            if hint:
                msg += f"; did you mean {(path + '.' if path else '') + hint!r}?"
            raise ConfigError(msg)
        if isinstance(defaults[key], dict):
            out[key] = _merge(defaults[key], value if value is not None else {}, where)
        else:
            out[key] = value
    return out


def _section(cfg, section):
    node = cfg
    for part in section.split("."):
        node = node[part]
    return node


def _num(cfg, section, key, *, lo=None, hi=None, strict_lo=False, integer=False, allow_none=False):
    value = _section(cfg, section)[key]
    name = key
    if value is None and allow_none:
        return
    kind = int if integer else (int, float)
    if isinstance(value, bool) or not isinstance(value, kind):
        raise ConfigError(f"{section}.{name} must be {'an integer' if integer else 'a number'}, got {value!r}")
    if lo is not None and (value < lo or (strict_lo and value == lo)):
        raise ConfigError(f"{section}.{name}: constraint {name} {'>' if strict_lo else '≥'} {lo:g} violated (got {value})")
    if hi is not None and value > hi:
        raise ConfigError(f"{section}.{name}: constraint {name} ≤ {hi:g} violated (got {value})")


def _pair_or_scalar(cfg, section, key, *, lo=0.0, hi=None, allow_none=False):
    value = _section(cfg, section)[key]
    if value is None:
        if allow_none:
            return
        raise ConfigError(f"{section}.{key} must not be null")
    vals = value if isinstance(value, list) else [value]
    if len(vals) not in (1, 2):
        raise ConfigError(f"{section}.{key} must be a number or a two-element list")
    for v in vals:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{section}.{key} entries must be numbers, got {v!r}")
        if v < lo or (hi is not None and v > hi):
            bound = f"{key} ≥ {lo:g}" + (f" and ≤ {hi:g}" if hi is not None else "")
            raise ConfigError(f"{section}.{key}: constraint {bound} violated (got {v})")


def validate_config(cfg):
    """Check types and ranges of a merged config; raise :class:`ConfigError`."""
    _num(cfg, "atoms", "detuning_MHz")
    det = cfg["atoms"]["detuning_MHz"]
    if abs(det) < 1.0 or abs(det + 816.7) < 1.0:
        raise ConfigError("atoms.detuning_MHz: constraint detuning_MHz ∉ {0, -816.7} (±1 MHz guard) violated")
    _num(cfg, "atoms", "gamma0_per_us", lo=0.0)
    _num(cfg, "magnetics", "B0_gauss", lo=0.0)
    _num(cfg, "magnetics", "gradient_MHz", lo=0.0, strict_lo=True)
    _num(cfg, "magnetics", "flip_time_us", lo=0.0, strict_lo=True)
    _pair_or_scalar(cfg, "magnetics", "beta_per_rail", allow_none=True)
    _pair_or_scalar(cfg, "magnetics", "calibration_target", hi=1.0, allow_none=True)
    if cfg["magnetics"]["beta_per_rail"] is None and cfg["magnetics"]["calibration_target"] is None:
        raise ConfigError("magnetics: one of beta_per_rail or calibration_target is required")
    noise = cfg["magnetics"]["noise"]
    for key in ("sigma_B_gauss", "mains_amp_gauss"):
        _num(cfg, "magnetics.noise", key, lo=0.0)
    _num(cfg, "magnetics.noise", "mains_freq_Hz", lo=0.0, strict_lo=True)
    if not isinstance(noise["mains_triggered"], bool):
        raise ConfigError("magnetics.noise.mains_triggered must be true or false")
    sig = cfg["signals"]
    if sig["shape"] != "gaussian":
        raise ConfigError(f"signals.shape: only 'gaussian' is supported, got {sig['shape']!r}")
    _num(cfg, "signals", "width_us", lo=0.0, strict_lo=True)
    _num(cfg, "signals", "centre_us", lo=0.0)
    _pair_or_scalar(cfg, "signals", "amplitude")
    _num(cfg, "signals", "temporal_match", lo=0.0, hi=1.0, strict_lo=True)
    _num(cfg, "signals", "duration_us", lo=0.0, strict_lo=True)
    for section in ("signals", "control"):
        if cfg[section]["polarisation"] not in POLARISATIONS:
            raise ConfigError(f"{section}.polarisation must be one of {POLARISATIONS}, got {cfg[section]['polarisation']!r}")
    if cfg["control"]["mode"] not in ("linear", "circular"):
        raise ConfigError(f"control.mode must be 'linear' or 'circular', got {cfg['control']['mode']!r}")
    _num(cfg, "grid", "Nz", lo=16, integer=True)
    _num(cfg, "grid", "dt_us", lo=0.0, strict_lo=True)
    _num(cfg, "run", "seed", lo=0, integer=True)
    _num(cfg, "run", "trials", lo=100, integer=True)
    if cfg["sweep"]["parameter"] not in ("beta", "detuning"):
        raise ConfigError("sweep.parameter must be 'beta' or 'detuning'")
    vals = cfg["sweep"]["values"]
    if not isinstance(vals, list) or not vals or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
        raise ConfigError("sweep.values must be a non-empty list of numbers")
    _num(cfg, "spectrum", "span_MHz", lo=0.0, strict_lo=True, allow_none=True)
    _num(cfg, "spectrum", "points", lo=100, integer=True)
    _num(cfg, "spectrum", "linewidth_MHz", lo=0.0, strict_lo=True)
    if cfg["magnetics"]["flip_time_us"] >= sig["duration_us"]:
        raise ConfigError("magnetics.flip_time_us must lie inside signals.duration_us")
    return cfg


def parse_config(source):
    """Parse YAML text or a mapping, fill defaults and validate."""
    if isinstance(source, dict):
        user = source
    else:
        try:
            user = yaml.safe_load(source)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config is not valid YAML: {exc}") from None
    if user is None:
        user = {}
    return validate_config(_merge(DEFAULTS, user))


def resolve_config_path(path):
    if str(path) in ("paper-replica", "paper_replica"):
        return PAPER_REPLICA
    return Path(path)


def load_config(path):
    p = resolve_config_path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    return parse_config(text)


def config_digest(cfg):
    """sha256 of the canonical JSON form of a merged config."""
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()
