"""Run configuration: the key=value file format and its defaults."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from .configurations import ConfigKind, Configuration, LaserDrive
from .errors import ConfigError
from .flow import RateSet
from .state import Mode

_CONFIG_NAMES = {
    "v": Configuration.V,
    "lambda": Configuration.LAMBDA,
    "cascade_weak_up": Configuration.CASCADE_WEAK_UP,
    "cascade_weak_down": Configuration.CASCADE_WEAK_DOWN,
}
_LASER_NAMES = {d.value: d for d in LaserDrive}
_MODE_NAMES = {m.value: m for m in Mode}
_ENGINES = ("auto", "renewal", "steps")


@dataclass(frozen=True)
class RunConfig:
    """Everything one reproducible run needs.

    Defaults give the desk-scale V configuration: a weak/strong rate
    ratio of 1e-3 instead of the physical 5e-9 (one time unit is one
    strong lifetime, about 1e-8 s; the weak lifetime is about 2 s), so
    dark periods show up within seconds of compute. The physical ratio
    stays reachable through the rate keys.
    """

    kind: str = "v"
    lasers: str = "both"
    k_strong_absorb: float = 1.0
    k_strong_emit: float = 1.0
    k_weak_absorb: float = 1e-3
    k_weak_emit: float = 1e-3
    mode: str = "nurules"
    duration: float = 2e6
    dt_max: float = 0.01
    master_seed: int = 0
    trajectories: int = 1
    threshold_gap: Optional[float] = None  # None = auto (20x strong cycle)
    depth: int = 2
    max_depth: int = 8
    engine: str = "auto"
    out: str = "out"

    def config_kind(self) -> ConfigKind:
        return ConfigKind(_CONFIG_NAMES[self.kind], _LASER_NAMES[self.lasers])

    def rate_set(self) -> RateSet:
        return RateSet(
            k_strong_absorb=self.k_strong_absorb,
            k_strong_emit=self.k_strong_emit,
            k_weak_absorb=self.k_weak_absorb,
            k_weak_emit=self.k_weak_emit,
        )

    def mode_enum(self) -> Mode:
        return _MODE_NAMES[self.mode]

    def resolved_threshold(self) -> float:
        if self.threshold_gap is not None:
            return self.threshold_gap
        return 20.0 * (1.0 / self.k_strong_absorb + 1.0 / self.k_strong_emit)

    def out_dir(self) -> Path:
        return Path(self.out)


def _parse_choice(value: str, choices, what: str):
    v = value.strip().lower()
    if v not in choices:
        raise ValueError(f"{what} must be one of {sorted(choices)}, got {value!r}")
    return v


def _parse_positive_float(value: str, what: str) -> float:
    x = float(value)
    if x <= 0:
        raise ValueError(f"{what} must be positive, got {value}")
    return x


def _parse_positive_int(value: str, what: str) -> int:
    x = int(value)
    if x < 1:
        raise ValueError(f"{what} must be at least 1, got {value}")
    return x


def _parse_seed(value: str) -> int:
    x = int(value)
    if not (0 <= x < 2**64):
        raise ValueError(f"master_seed must fit in 64 bits, got {value}")
    return x


def _parse_threshold(value: str) -> Optional[float]:
    if value.strip().lower() == "auto":
        return None
    return _parse_positive_float(value, "threshold_gap")


_PARSERS = {
    "kind": lambda v: _parse_choice(v, _CONFIG_NAMES, "kind"),
    "lasers": lambda v: _parse_choice(v, _LASER_NAMES, "lasers"),
    "k_strong_absorb": lambda v: _parse_positive_float(v, "k_strong_absorb"),
    "k_strong_emit": lambda v: _parse_positive_float(v, "k_strong_emit"),
    "k_weak_absorb": lambda v: _parse_positive_float(v, "k_weak_absorb"),
    "k_weak_emit": lambda v: _parse_positive_float(v, "k_weak_emit"),
    "mode": lambda v: _parse_choice(v, _MODE_NAMES, "mode"),
    "duration": lambda v: _parse_positive_float(v, "duration"),
    "dt_max": lambda v: _parse_positive_float(v, "dt_max"),
    "master_seed": _parse_seed,
    "trajectories": lambda v: _parse_positive_int(v, "trajectories"),
    "threshold_gap": _parse_threshold,
    "depth": lambda v: _parse_positive_int(v, "depth"),
    "max_depth": lambda v: _parse_positive_int(v, "max_depth"),
    "engine": lambda v: _parse_choice(v, _ENGINES, "engine"),
    "out": lambda v: v.strip(),
}


def parse_config(text: str) -> RunConfig:
    """Parse a key=value document (one pair per line, # comments).

    Omitted keys take the documented defaults. Raises ConfigError naming
    the offending line for unknown keys, malformed values, or violated
    invariants.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        parser = _PARSERS.get(key)
        if parser is None:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = parser(value.strip())
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    cfg = RunConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.max_depth < cfg.depth:
        raise ConfigError("max_depth must be at least depth")


def with_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """Apply already-parsed override values (e.g. from command-line flags)."""
    present = {k: v for k, v in overrides.items() if v is not None}
    out = replace(cfg, **present)
    _validate(out)
    return out
