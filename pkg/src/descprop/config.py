"""Run configuration: a flat key-value file plus command-line overrides.

The file format is intentionally minimal: one ``key: value`` pair per
line, full-line ``#`` comments, scalar values only. Values are coerced
in order boolean, integer, real, string; ``target_columns`` accepts a
comma- or whitespace-separated list. Unknown keys are rejected rather
than silently ignored so typos surface immediately.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path

from .descriptors import DESCRIPTOR_SETS
from .errors import ConfigError

logger = logging.getLogger(__name__)

PROBLEM_TYPES = ("regression", "multilabel")
SAMPLERS = ("random",)
SNAPSHOT_NAME = "config_snapshot"

_SIZE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class RunConfig:
    """Everything a training run needs, resolved and validated."""

    input_file: str
    target_columns: tuple[str, ...]
    smiles_column: str = "smiles"
    output_directory: str = "output"
    random_seed: int = 0
    problem_type: str = "regression"
    descriptor_set: str = "all"
    clamp_input: bool = False
    clamp_bound: float = 3.0
    number_repeats: int = 1
    number_epochs: int = 100
    batch_size: int = 64
    patience: int = 15
    train_size: float = 0.8
    val_size: float = 0.1
    test_size: float = 0.1
    sampler: str = "random"
    hidden_layers: int = 2
    hidden_width: int = 1800
    learning_rate: float = 1e-3

    def __post_init__(self):
        if not self.input_file:
            raise ConfigError("input_file is required")
        if not self.target_columns:
            raise ConfigError("target_columns is required")
        if self.problem_type not in PROBLEM_TYPES:
            raise ConfigError(
                f"unknown problem_type {self.problem_type!r} "
                f"(expected one of {list(PROBLEM_TYPES)})")
        if self.sampler not in SAMPLERS:
            raise ConfigError(
                f"unknown sampler {self.sampler!r} (expected one of {list(SAMPLERS)})")
        if self.descriptor_set not in DESCRIPTOR_SETS:
            raise ConfigError(
                f"unknown descriptor_set {self.descriptor_set!r} "
                f"(expected one of {sorted(DESCRIPTOR_SETS)})")
        total = self.train_size + self.val_size + self.test_size
        if abs(total - 1.0) > _SIZE_TOLERANCE:
            raise ConfigError(
                f"train_size + val_size + test_size must equal 1, got {total}")
        if self.number_repeats < 1:
            raise ConfigError("number_repeats must be at least 1")
        if self.number_epochs < 1:
            raise ConfigError("number_epochs must be at least 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1")
        if self.patience < 1:
            raise ConfigError("patience must be at least 1")
        if self.patience > self.number_epochs:
            raise ConfigError("patience cannot exceed number_epochs")
        if self.hidden_layers < 0:
            raise ConfigError("hidden_layers cannot be negative")
        if self.hidden_layers > 0 and self.hidden_width < 1:
            raise ConfigError("hidden_width must be at least 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.clamp_bound <= 0:
            raise ConfigError("clamp_bound must be positive")


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}
_KNOWN_KEYS = tuple(_FIELD_TYPES)

# snapshot layout: grouped the way a hand-written config reads
_SNAPSHOT_ORDER = (
    ("generic args", ("output_directory", "random_seed", "problem_type")),
    ("featurization", ("input_file", "target_columns", "smiles_column",
                       "descriptor_set")),
    ("preprocessing", ("clamp_input", "clamp_bound")),
    ("training", ("number_repeats", "number_epochs", "batch_size", "patience",
                  "train_size", "val_size", "test_size", "sampler",
                  "hidden_layers", "hidden_width", "learning_rate")),
)


def coerce_scalar(text: str):
    """Interpret a raw config token as bool, int, float, or string."""
    stripped = text.strip()
    if stripped.lower() == "true":
        return True
    if stripped.lower() == "false":
        return False
    try:
        return int(stripped)
    except ValueError:
        pass
    try:
        return float(stripped)
    except ValueError:
        pass
    return stripped


def read_config_file(path: str | Path) -> dict[str, str]:
    """Raw ``key: value`` pairs from a config file, values unparsed."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    pairs: dict[str, str] = {}
    for line_number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if ":" not in stripped:
            raise ConfigError(
                f"{path}:{line_number}: expected 'key: value', got {stripped!r}")
        key, _, value = stripped.partition(":")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{path}:{line_number}: empty key")
        if key in pairs:
            raise ConfigError(f"{path}:{line_number}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def _split_columns(value) -> tuple[str, ...]:
    if isinstance(value, (list, tuple)):
        return tuple(str(v) for v in value)
    parts = [p for p in str(value).replace(",", " ").split() if p]
    return tuple(parts)


def _coerce_field(key: str, value) -> object:
    if key == "target_columns":
        columns = _split_columns(value)
        if not columns:
            raise ConfigError("target_columns must name at least one column")
        return columns
    if isinstance(value, str):
        value = coerce_scalar(value)
    expected = _FIELD_TYPES[key]
    if expected == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} expects an integer, got {value!r}")
        return value
    if expected == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} expects a number, got {value!r}")
        return float(value)
    if expected == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{key} expects true or false, got {value!r}")
        return value
    return str(value)


def build_run_config(values: dict) -> RunConfig:
    """Validate a key-value mapping and construct a RunConfig.

    Raises:
        ConfigError: on unknown keys, bad value types, or invariant
            violations (split sizes, problem_type, ...).
    """
    unknown = sorted(set(values) - set(_KNOWN_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    coerced = {key: _coerce_field(key, value) for key, value in values.items()}
    missing = [key for key in ("input_file", "target_columns") if key not in coerced]
    if missing:
        raise ConfigError(f"missing required config keys: {', '.join(missing)}")
    return RunConfig(**coerced)


def parse_config(path: str | Path, overrides: dict | None = None) -> RunConfig:
    """Load a config file and apply command-line overrides on top."""
    values: dict = dict(read_config_file(path))
    for key, value in (overrides or {}).items():
        if key in values:
            logger.info("override: %s = %r (file had %r)", key, value, values[key])
        values[key] = value
    return build_run_config(values)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "True" if value else "False"
    if isinstance(value, tuple):
        return ", ".join(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(config: RunConfig) -> str:
    """Render a RunConfig in the config-file format, reload-safe."""
    lines: list[str] = []
    for section, keys in _SNAPSHOT_ORDER:
        lines.append(f"# {section}")
        for key in keys:
            lines.append(f"{key}: {_format_value(getattr(config, key))}")
    return "\n".join(lines) + "\n"


def write_config_snapshot(config: RunConfig, output_directory: str | Path) -> Path:
    """Persist the resolved config so the run can be reproduced exactly."""
    path = Path(output_directory) / SNAPSHOT_NAME
    path.write_text(format_config(config), encoding="utf-8")
    return path
