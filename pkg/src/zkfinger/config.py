"""Runtime configuration with a small line-oriented file format.

Files hold `key = value` pairs, one per line, with `#` comments and
blank lines ignored. Unknown keys are rejected so typos fail loudly.
"""

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    k: int = 5
    cx: float = 4.0
    cy: float = math.pi / 8
    d_max: float = 100.0
    p: int = 60
    bit_width: int = 20
    threshold: int = 30  # acceptance cutoff, percent
    curve: str = "bn254"
    store_path: str = "artifacts/objects"
    ledger_path: str = "artifacts/ledger.bin"
    resize_400: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k must be at least 1")
        if self.cx <= 0 or self.cy <= 0 or self.d_max <= 0:
            raise ConfigError("grid steps and d_max must be positive")
        if self.p < 1:
            raise ConfigError("p must be positive")
        if not 1 <= self.bit_width <= 62:
            raise ConfigError("bit_width out of range")
        if not 0 <= self.threshold <= 100:
            raise ConfigError("threshold must be a percentage")
        if self.curve != "bn254":
            raise ConfigError(f"unsupported curve {self.curve!r}")


_PARSERS = {
    "k": int,
    "cx": float,
    "cy": float,
    "d_max": float,
    "p": int,
    "bit_width": int,
    "threshold": int,
    "curve": str,
    "store_path": str,
    "ledger_path": str,
    "resize_400": lambda s: {"true": True, "false": False}[s.lower()],
}


def load_config(path) -> Config:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        if key not in _PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except (ValueError, KeyError):
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {value!r}") from None
    return Config(**values)


def apply_overrides(config: Config, **overrides) -> Config:
    """New Config with the given non-None fields replaced."""
    known = {f.name for f in fields(Config)}
    updates = {}
    for key, value in overrides.items():
        if key not in known:
            raise ConfigError(f"unknown config field {key!r}")
        if value is not None:
            updates[key] = value
    return replace(config, **updates) if updates else config
