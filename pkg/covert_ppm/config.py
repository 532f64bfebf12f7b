"""Experiment configuration for covert-ppm runs.

Config files are flat ``key = value`` text; ``#`` starts a comment. Loading copies the
defaults and merges the file over them, so a partial file is valid.
"""

import logging
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .dmc_core import CovertChannelPair, FiniteDistribution
from .errors import CovertError, ConfigError
from .utils import parse_float_list

logger = logging.getLogger(__name__)

METRICS = ("kl", "tv", "beta")
UNITS = ("nats", "bits")
SUITES = ("exact-oracles", "concentration", "sandwich", "moments")

DEFAULT_CONFIG: Dict[str, str] = {
    "p_m": "0.11",
    "p_w": "0.45",
    "p0": "",
    "p1": "",
    "q0": "",
    "q1": "",
    "metric": "kl",
    "epsilon": "0.001",
    "delta": "0.01",
    "alpha": "0.2",
    "rho": "0.1",
    "berry_esseen": "false",
    "n_grid": "logspace:2:8:13",
    "seed": "0",
    "out": "",
    "unit": "nats",
    "suites": ",".join(SUITES),
    "trials": "100000",
    "n": "64",
    "ell": "4",
    "M": "16",
    "K": "1",
    "gamma": "",
    "max_over_keys": "true",
    "workers": "1",
    "codebook_out": "",
}

_TRUE = ("true", "1", "yes", "on")
_FALSE = ("false", "0", "no", "off")


def parse_n_grid(text: str) -> Tuple[int, ...]:
    """Parse "logspace:lo:hi:count" (powers of ten) or an explicit comma list."""
    text = text.strip()
    if text.startswith("logspace:"):
        try:
            _, lo, hi, count = text.split(":")
            values = np.logspace(float(lo), float(hi), int(count))
        except ValueError as e:
            raise ConfigError(f"bad logspace grid {text!r}") from e
        grid = tuple(int(round(v)) for v in values)
    else:
        try:
            grid = tuple(int(float(item)) for item in text.split(",") if item.strip())
        except ValueError as e:
            raise ConfigError(f"bad n grid {text!r}") from e
    if not grid:
        raise ConfigError("n grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError(f"n grid must be strictly increasing, got {grid}")
    if grid[0] < 1:
        raise ConfigError("n grid values must be positive")
    return grid


def _format_n_grid(grid: Tuple[int, ...]) -> str:
    return ",".join(str(n) for n in grid)


def _parse_bool(key: str, text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ConfigError(f"{key}: expected true/false, got {text!r}")


def _parse_pmf(key: str, text: str) -> Optional[Tuple[float, ...]]:
    if not text.strip():
        return None
    try:
        return tuple(parse_float_list(text))
    except ValueError as e:
        raise ConfigError(f"{key}: bad probability list {text!r}") from e


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment settings.

    Attributes:
        p_m: Receiver BSC crossover
        p_w: Warden BSC crossover
        pmfs: Optional explicit (p0, p1, q0, q1) rows overriding the BSCs
        metric: Covertness metric for montecarlo and plan runs
        epsilon: Target error probability
        delta: Covertness level
        alpha: False-alarm level of the beta metric
        rho: Key-length slack
        berry_esseen: Keep the Berry-Esseen term in the planners
        n_grid: Strictly increasing blocklengths
        seed: Master seed
        out: Output path, "" for stdout
        unit: "nats" or "bits"
        suites: Verification suites to run
        trials, n, ell, M, K, gamma, max_over_keys, workers: Monte Carlo settings
        codebook_out: File the montecarlo verb writes its sampled codebook to, "" for none
    """

    p_m: float = 0.11
    p_w: float = 0.45
    pmfs: Optional[Tuple[Tuple[float, ...], ...]] = None
    metric: str = "kl"
    epsilon: float = 1e-3
    delta: float = 1e-2
    alpha: float = 0.2
    rho: float = 0.1
    berry_esseen: bool = False
    n_grid: Tuple[int, ...] = field(default_factory=lambda: parse_n_grid("logspace:2:8:13"))
    seed: int = 0
    out: str = ""
    unit: str = "nats"
    suites: Tuple[str, ...] = SUITES
    trials: int = 100000
    n: int = 64
    ell: int = 4
    M: int = 16
    K: int = 1
    gamma: Optional[float] = None
    max_over_keys: bool = True
    workers: int = 1
    codebook_out: str = ""

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ConfigError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.unit not in UNITS:
            raise ConfigError(f"unit must be one of {UNITS}, got {self.unit!r}")
        for name in ("epsilon", "delta", "alpha"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {value!r}")
        if self.rho <= 0:
            raise ConfigError(f"rho must be positive, got {self.rho!r}")
        for name in ("trials", "n", "ell", "M", "K", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.ell > self.n:
            raise ConfigError(f"ell={self.ell} exceeds n={self.n}")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        unknown = set(self.suites) - set(SUITES)
        if unknown:
            raise ConfigError(f"unknown suites {sorted(unknown)}")

    def channel(self) -> CovertChannelPair:
        """The channel pair described by the config."""
        try:
            if self.pmfs is None:
                return CovertChannelPair.bsc(self.p_m, self.p_w)
            p0, p1, q0, q1 = (FiniteDistribution(tuple(range(len(r))), r) for r in self.pmfs)
            return CovertChannelPair(p0, p1, q0, q1)
        except (CovertError, ValueError) as e:
            raise ConfigError(f"invalid channel: {e}") from e

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """Copy with the non-None overrides applied (CLI flags win over the file)."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def as_mapping(self) -> Dict[str, str]:
        """Flat text form; floats use repr so a save/load round trip is exact."""
        values: Dict[str, str] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "pmfs":
                rows = value or ("", "", "", "")
                for key, row in zip(("p0", "p1", "q0", "q1"), rows):
                    values[key] = ",".join(repr(float(x)) for x in row)
            elif f.name == "n_grid":
                values["n_grid"] = _format_n_grid(value)
            elif f.name == "suites":
                values["suites"] = ",".join(value)
            elif isinstance(value, bool):
                values[f.name] = "true" if value else "false"
            elif value is None:
                values[f.name] = ""
            elif isinstance(value, float):
                values[f.name] = repr(value)
            else:
                values[f.name] = str(value)
        return values


_FLOAT_KEYS = ("p_m", "p_w", "epsilon", "delta", "alpha", "rho")
_INT_KEYS = ("seed", "trials", "n", "ell", "M", "K", "workers")


def config_from_mapping(mapping: Dict[str, str]) -> ExperimentConfig:
    """Build a config from string values, defaults filled in first."""
    merged = dict(DEFAULT_CONFIG)
    unknown = set(mapping) - set(DEFAULT_CONFIG)
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    merged.update(mapping)
    kwargs: Dict[str, Any] = {}
    try:
        for key in _FLOAT_KEYS:
            kwargs[key] = float(merged[key])
        for key in _INT_KEYS:
            kwargs[key] = int(merged[key])
    except ValueError as e:
        raise ConfigError(f"unparseable value: {e}") from e
    kwargs["gamma"] = None
    if merged["gamma"].strip():
        try:
            kwargs["gamma"] = float(merged["gamma"])
        except ValueError as e:
            raise ConfigError(f"gamma: bad value {merged['gamma']!r}") from e
    if not all(math.isfinite(kwargs[key]) for key in _FLOAT_KEYS):
        raise ConfigError("probability and rate settings must be finite")
    rows = [_parse_pmf(key, merged[key]) for key in ("p0", "p1", "q0", "q1")]
    if any(r is not None for r in rows):
        if any(r is None for r in rows):
            raise ConfigError("explicit channels need all four of p0, p1, q0, q1")
        kwargs["pmfs"] = tuple(rows)
    kwargs["berry_esseen"] = _parse_bool("berry_esseen", merged["berry_esseen"])
    kwargs["max_over_keys"] = _parse_bool("max_over_keys", merged["max_over_keys"])
    kwargs["n_grid"] = parse_n_grid(merged["n_grid"])
    kwargs["metric"] = merged["metric"].strip()
    kwargs["unit"] = merged["unit"].strip()
    kwargs["out"] = merged["out"].strip()
    kwargs["codebook_out"] = merged["codebook_out"].strip()
    kwargs["suites"] = tuple(s.strip() for s in merged["suites"].split(",") if s.strip())
    return ExperimentConfig(**kwargs)


def parse_config_text(text: str) -> Dict[str, str]:
    """Parse flat key = value lines into a dict of raw strings."""
    values: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {number}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {number}: empty key")
        values[key] = value
    return values


def load_config(path: Optional[str] = None) -> ExperimentConfig:
    """Load a config file merged over the defaults (defaults only when path is None)."""
    if path is None:
        return config_from_mapping({})
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    logger.info("loaded config from %s", path)
    return config_from_mapping(parse_config_text(text))


def format_config(config: ExperimentConfig) -> str:
    lines: List[str] = [f"{key} = {value}" for key, value in config.as_mapping().items()]
    return "\n".join(lines) + "\n"


def save_config(config: ExperimentConfig, path: str) -> None:
    """Write every key so that load_config(path) reproduces config exactly."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(format_config(config), encoding="utf-8")
