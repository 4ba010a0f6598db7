"""Flat ``key = value`` run configuration.

One assignment per line, ``#`` starts a comment, arrays are comma
separated.  Unknown keys are rejected so typos do not pass silently.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    alpha: float = 2.0
    k: float = 1.0
    R: float = 0.0
    cap: str = "PurePower"
    a: float = 0.3
    p: float = 20.0
    m: int = 0
    # one-dimensional problems
    s_max: float = 200.0  # extent of geometry tables and potential traces
    n: int = 2000  # table samples
    h: float = 0.1  # half-line grid spacing
    safety: float = 3.0
    # fiber lattices
    fiber_s_max: float = 450.0
    n_u: int = 16
    h0: float = 0.05
    growth: float = 1.01
    E_list: list = field(default_factory=lambda: [1e-2, 1e-3, 1e-4])
    m_max: int = 10
    output_dir: str = "out"
    seed: int = 0

    def validate(self) -> "RunConfig":
        if not self.alpha > 1:
            raise ConfigError("alpha must exceed 1")
        if not self.k > 0:
            raise ConfigError("k must be positive")
        if not self.a > 0:
            raise ConfigError("a must be positive")
        if self.p < 0:
            raise ConfigError("p must be non-negative")
        if self.n < 16 or self.n_u < 8:
            raise ConfigError("grid sizes too small (n >= 16, n_u >= 8)")
        if self.h <= 0 or self.h0 <= 0 or self.growth < 1:
            raise ConfigError("grid spacings must be positive and growth >= 1")
        if self.m_max < 0:
            raise ConfigError("m_max must be non-negative")
        E = self.E_list
        if not E or any(e <= 0 for e in E):
            raise ConfigError("E_list must hold positive energies")
        if any(b >= a for a, b in zip(E, E[1:])):
            raise ConfigError("E_list must be strictly decreasing")
        return self

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in fields(RunConfig)}


def _convert(key: str, raw: str):
    if key not in _FIELDS:
        raise ConfigError(f"unknown key {key!r}")
    default = getattr(RunConfig(), key)
    try:
        if isinstance(default, list):
            return [float(x) for x in raw.split(",") if x.strip()]
        if isinstance(default, bool):
            return raw.strip().lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_lines(lines, source: str = "<string>") -> dict:
    out = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, raw = (x.strip() for x in line.split("=", 1))
        out[key] = _convert(key, raw)
    return out


def load(path=None, overrides=()) -> RunConfig:
    """Read ``path`` (optional) and apply ``key=value`` overrides."""
    values = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        values.update(parse_lines(text.splitlines(), str(p)))
    values.update(parse_lines(overrides, "--set"))
    return RunConfig(**values).validate()


def dumps(cfg: RunConfig) -> str:
    lines = []
    for k, v in cfg.as_dict().items():
        if isinstance(v, list):
            v = ", ".join(f"{x:g}" for x in v)
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"
