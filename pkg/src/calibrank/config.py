"""Experiment configuration, loadable from INI-style files.

A config file holds ``key = value`` lines under arbitrary ``[section]``
headers (sections are purely organizational; all keys share one namespace
and must be :class:`ScenarioConfig` field names).  Command-line flags
override file values, which override the per-setting defaults.

Example::

    [experiment]
    setting = abtest
    scenario = one-biased
    m = 2,4,6,8
    trials = 10000

    [randomness]
    seed = 7
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass

from .model import NoiseModel, WeightFunction

__all__ = [
    "ScenarioConfig",
    "SETTINGS",
    "load_config_file",
    "parse_noise",
    "resolve_config",
]

SETTINGS = ("canonical", "abtest", "rank", "metric-rank", "tradeoff", "oracle")

TRADEOFF_GAMMAS = tuple(2.0**k for k in range(-10, 11))


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a simulation run needs.  ``n``, ``m`` and ``gamma`` are
    sweep tuples; a single value is a 1-tuple.  ``m = (0,)`` in the ranking
    settings means "half of all pairs", matching the experiment family."""

    setting: str = "abtest"
    scenario: str = "one-biased"
    n: tuple[int, ...] = (2,)
    m: tuple[int, ...] = (4,)
    gamma: tuple[float, ...] = (1.0,)
    weight: str = "ratio"
    noise: str = "none"
    value_lo: float | None = None
    value_hi: float | None = None
    estimators: tuple[str, ...] = ()
    trials: int = 10000
    inner_samples: int = 1000
    seed: int = 0
    threads: int = 0
    init: str = "index-ties"
    target: str = "abtest"
    x1: float = 0.7
    x2: float = 0.3

    def noise_model(self) -> NoiseModel:
        return parse_noise(self.noise)

    def weight_fn(self, gamma: float | None = None) -> WeightFunction:
        if self.weight == "ratio":
            return WeightFunction.ratio(self.gamma[0] if gamma is None else gamma)
        if self.weight == "logistic":
            return WeightFunction.logistic()
        raise ValueError(f"unknown weight {self.weight!r}")

    def effective_threads(self) -> int:
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)


_DEFAULTS: dict[str, dict] = {
    "canonical": {"scenario": "perfect", "m": (2,), "trials": 100_000},
    "abtest": {"scenario": "one-biased", "m": (4,), "trials": 10_000},
    "rank": {"scenario": "affine", "n": (6,), "m": (0,), "trials": 100},
    "metric-rank": {"scenario": "affine", "n": (4,), "m": (0,), "trials": 100},
    "tradeoff": {"scenario": "both", "gamma": TRADEOFF_GAMMAS, "trials": 500_000},
    "oracle": {"scenario": "one-biased", "m": (4,)},
}

_FIELD_NAMES = {f.name for f in dataclasses.fields(ScenarioConfig)}

_INT_TUPLES = {"n", "m"}
_FLOAT_TUPLES = {"gamma"}
_STR_TUPLES = {"estimators"}
_INTS = {"trials", "inner_samples", "seed", "threads"}
_FLOATS = {"x1", "x2"}
_OPT_FLOATS = {"value_lo", "value_hi"}


def _coerce(name: str, raw):
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    try:
        if name in _INT_TUPLES:
            return tuple(int(v) for v in raw.split(","))
        if name in _FLOAT_TUPLES:
            return tuple(float(v) for v in raw.split(","))
        if name in _STR_TUPLES:
            return tuple(v.strip() for v in raw.split(",") if v.strip())
        if name in _INTS:
            return int(raw)
        if name in _FLOATS or name in _OPT_FLOATS:
            return float(raw)
    except ValueError:
        raise ValueError(f"bad value for {name!r}: {raw!r}") from None
    return raw


def parse_noise(spec: str) -> NoiseModel:
    """"none", "gaussian:SIGMA" or "uniform:HALF_WIDTH"."""
    spec = spec.strip()
    if spec == "none":
        return NoiseModel.none()
    kind, sep, scale = spec.partition(":")
    if not sep:
        raise ValueError(f"bad noise spec {spec!r}; expected kind:scale")
    if kind == "gaussian":
        return NoiseModel.gaussian(float(scale))
    if kind == "uniform":
        return NoiseModel.uniform(float(scale))
    raise ValueError(f"unknown noise kind {kind!r}")


def load_config_file(path: str) -> dict:
    """Read a config file into a flat {field: raw string} dict."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_string(fh.read(), source=path)
    values: dict = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key not in _FIELD_NAMES:
                raise ValueError(f"unknown config key {key!r} in [{section}]")
            if key in values:
                raise ValueError(f"config key {key!r} appears twice")
            values[key] = raw
    return values


def resolve_config(
    setting: str, file_values: dict | None = None, overrides: dict | None = None
) -> ScenarioConfig:
    """Layer defaults, config-file values, then explicit overrides."""
    if setting not in SETTINGS:
        raise ValueError(f"unknown setting {setting!r}")
    merged: dict = {"setting": setting}
    merged.update(_DEFAULTS.get(setting, {}))
    for layer in (file_values or {}), (overrides or {}):
        for key, raw in layer.items():
            if raw is None:
                continue
            if key not in _FIELD_NAMES:
                raise ValueError(f"unknown config key {key!r}")
            merged[key] = _coerce(key, raw)
    merged["setting"] = setting
    cfg = ScenarioConfig(**merged)
    _validate(cfg)
    return cfg


def _validate(cfg: ScenarioConfig) -> None:
    if cfg.trials < 1:
        raise ValueError("trials must be >= 1")
    if cfg.inner_samples < 1:
        raise ValueError("inner_samples must be >= 1")
    if cfg.threads < 0:
        raise ValueError("threads must be >= 0")
    if cfg.weight not in ("ratio", "logistic"):
        raise ValueError(f"unknown weight {cfg.weight!r}")
    if any(g <= 0 for g in cfg.gamma):
        raise ValueError("gamma values must be positive")
    if cfg.init not in ("index-ties", "uniform-random"):
        raise ValueError(f"unknown init {cfg.init!r}")
    parse_noise(cfg.noise)
    if (cfg.value_lo is None) != (cfg.value_hi is None):
        raise ValueError("value_lo and value_hi must be given together")
    if cfg.value_lo is not None and not cfg.value_lo < cfg.value_hi:
        raise ValueError("need value_lo < value_hi")
    if cfg.setting in ("abtest", "oracle"):
        if any(mm < 2 or mm % 2 for mm in cfg.m):
            raise ValueError("A/B reviewer counts must be even and >= 2")
    if cfg.setting in ("rank", "metric-rank"):
        if any(nn < 3 for nn in cfg.n):
            raise ValueError("ranking experiments need n >= 3")
    if cfg.setting == "oracle" and cfg.target not in ("canonical", "abtest"):
        raise ValueError(f"unknown oracle target {cfg.target!r}")
