"""Run configuration: YAML parsing, validation and canonical emission."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .acquisition import AcquisitionConfig
from .benchmarks import BUILTIN_OBJECTIVES
from .core import BoxBounds
from .loop import LoopConfig


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    seed: int
    objective: str | None = None
    command: list | None = None
    noise: float = 0.0
    dim: int | None = None
    n_objectives: int = 2
    lower: list | None = None
    upper: list | None = None
    signs: list | None = None
    n_init: int = 20
    n_max: int = 50
    delta: float = 1e-6
    n_restarts: int = 20
    gp_restarts: int = 10
    n_samples: int = 100
    n_candidates: int = 1000
    grid_resolution: int = 64
    attainment_every: int = 5
    timeout: float = 60.0
    threads: int = 1
    output_dir: str = "run"
    extra: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def bounds(self) -> BoxBounds:
        return BoxBounds(self.lower, self.upper)

    def loop_config(self) -> LoopConfig:
        return LoopConfig(
            n_max=self.n_max,
            seed=self.seed,
            delta=self.delta,
            gp_restarts=self.gp_restarts,
            acquisition=AcquisitionConfig(n_restarts=self.n_restarts),
            n_samples=self.n_samples,
            n_candidates=self.n_candidates,
            grid_resolution=self.grid_resolution,
            attainment_every=self.attainment_every,
            threads=self.threads,
        )

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            if f.name == "extra":
                continue
            value = getattr(self, f.name)
            if value is not None:
                out[f.name] = value
        return out

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True, default_flow_style=None)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig) if f.name != "extra"}
_INT_KEYS = {
    "seed", "dim", "n_objectives", "n_init", "n_max", "n_restarts", "gp_restarts",
    "n_samples", "n_candidates", "grid_resolution", "attainment_every", "threads",
}
_FLOAT_KEYS = {"noise", "delta", "timeout"}
_POSITIVE = {"n_objectives", "n_init", "n_max", "n_restarts", "gp_restarts", "n_samples", "grid_resolution", "threads"}


def _key_lines(text: str) -> dict:
    node = yaml.compose(text)
    if node is None:
        return {}
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError("line 1: configuration must be a key/value mapping")
    return {k.value: k.start_mark.line + 1 for k, _ in node.value}


def _coerce(key, value, line):
    where = f"line {line}: {key}"
    if key in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer, got {value!r}")
        return value
    if key in _FLOAT_KEYS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number, got {value!r}")
        return float(value)
    if key in ("lower", "upper", "signs"):
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"{where} must be a list of numbers")
        return [float(v) for v in value]
    if key == "command":
        if isinstance(value, str):
            return [value]
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ConfigError(f"{where} must be a string or list of strings")
        return value
    if key in ("objective", "output_dir"):
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string")
        return value
    return value


def parse_config_text(text: str) -> RunConfig:
    """Parse and validate a YAML run configuration, applying defaults."""
    try:
        lines = _key_lines(text)
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("line 1: configuration must be a key/value mapping")

    unknown = [k for k in data if k not in _FIELDS]
    if unknown:
        k = unknown[0]
        raise ConfigError(f"line {lines.get(k, '?')}: unknown key {k!r}")
    if "seed" not in data:
        raise ConfigError("missing mandatory key 'seed'")
    values = {k: _coerce(k, v, lines.get(k, "?")) for k, v in data.items()}
    cfg = RunConfig(**values)
    _validate(cfg, lines)
    return cfg


def _validate(cfg: RunConfig, lines: dict) -> None:
    def fail(key, msg):
        raise ConfigError(f"line {lines.get(key, '?')}: {key} {msg}")

    if (cfg.objective is None) == (cfg.command is None):
        raise ConfigError("exactly one of 'objective' or 'command' must be given")
    if cfg.objective is not None:
        if cfg.objective not in BUILTIN_OBJECTIVES:
            fail("objective", f"must be one of {', '.join(BUILTIN_OBJECTIVES)}")
        builtin_dim = {"synthetic-2d": 2, "synthetic-6d": 6}[cfg.objective]
        if cfg.dim is not None and cfg.dim != builtin_dim:
            fail("dim", f"must be {builtin_dim} for {cfg.objective}")
        cfg.dim = builtin_dim
        if cfg.n_objectives != 2:
            fail("n_objectives", "must be 2 for built-in objectives")
    elif cfg.dim is None:
        raise ConfigError("missing key 'dim' (required with 'command')")
    for key in _POSITIVE:
        if getattr(cfg, key) < 1:
            fail(key, "must be positive")
    if cfg.dim < 1:
        fail("dim", "must be positive")
    if cfg.n_candidates < 0 or cfg.attainment_every < 0:
        fail("n_candidates" if cfg.n_candidates < 0 else "attainment_every", "must be non-negative")
    if cfg.n_init < 2:
        fail("n_init", "must be at least 2")
    if cfg.n_max < cfg.n_init:
        fail("n_max", f"({cfg.n_max}) must be >= n_init ({cfg.n_init})")
    if not cfg.delta > 0:
        fail("delta", "must be positive")
    if cfg.noise < 0:
        fail("noise", "must be non-negative")
    if not cfg.timeout > 0:
        fail("timeout", "must be positive")
    cfg.lower = cfg.lower if cfg.lower is not None else [0.0] * cfg.dim
    cfg.upper = cfg.upper if cfg.upper is not None else [1.0] * cfg.dim
    if len(cfg.lower) != cfg.dim or len(cfg.upper) != cfg.dim:
        fail("lower" if len(cfg.lower) != cfg.dim else "upper", f"must have {cfg.dim} entries")
    if not all(lo < hi for lo, hi in zip(cfg.lower, cfg.upper)):
        fail("upper", "must exceed lower in every coordinate")
    cfg.signs = cfg.signs if cfg.signs is not None else [1.0] * cfg.n_objectives
    if len(cfg.signs) != cfg.n_objectives or any(s not in (1.0, -1.0) for s in cfg.signs):
        fail("signs", f"must list {cfg.n_objectives} entries, each +1 (maximize) or -1 (minimize)")


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    return parse_config_text(text)
