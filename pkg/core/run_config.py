import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

OUTPUT_DIR_ENV = "CHEEGER_BOUNDS_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "reports"
OUTPUT_FORMATS = ("json", "csv")


def default_output_dir():
    return os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR


def get_default_settings():
    """Every tunable of a run with its default value."""
    return {
        "samples": 100_000,
        "batches": 32,
        "trials": 500,
        "trial_batches": 20,
        "cheeger_grid": 4096,
        "bruteforce_cells": 16,
        "confidence": 0.95,
        "equality_confidence": 0.999,
        "memory_budget": 4_000_000,
        "workers": 1,
        "master_seed": 1,
        "output_format": "json",
        "output_dir": default_output_dir(),
    }


def _coerce(key, value, default):
    try:
        if isinstance(default, int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if isinstance(default, float):
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"setting '{key}' expects {type(default).__name__} (got {value!r})") from None


def ensure_complete_settings(settings):
    """Fills missing keys from the defaults, coerces types and checks ranges."""
    defaults = get_default_settings()
    if settings is None:
        return defaults
    if not isinstance(settings, dict):
        raise ConfigError(f"settings must be a mapping (got {type(settings).__name__})")
    unknown = sorted(set(settings) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown settings: {', '.join(unknown)}")

    complete = dict(defaults)
    for key, value in settings.items():
        if value is not None:
            complete[key] = _coerce(key, value, defaults[key])

    for key in ("samples", "trials", "cheeger_grid", "memory_budget", "workers"):
        if complete[key] < 1:
            raise ConfigError(f"setting '{key}' must be >= 1 (got {complete[key]})")
    for key in ("batches", "trial_batches", "bruteforce_cells"):
        if complete[key] < 2:
            raise ConfigError(f"setting '{key}' must be >= 2 (got {complete[key]})")
    for key in ("confidence", "equality_confidence"):
        if not 0.0 < complete[key] < 1.0:
            raise ConfigError(f"setting '{key}' must lie in (0, 1) (got {complete[key]})")
    if complete["output_format"] not in OUTPUT_FORMATS:
        raise ConfigError(f"output_format must be one of {', '.join(OUTPUT_FORMATS)} "
                          f"(got {complete['output_format']!r})")
    return complete


def load_run_config(path):
    """Settings from a JSON file, completed with defaults."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from None
    settings = ensure_complete_settings(data)
    print(f"[CONFIG] Loaded {len(data)} settings from {path}")
    return settings


@dataclass
class RunConfig:
    """A resolved invocation: subcommand, its parameters and the run settings."""
    subcommand: str
    params: dict = field(default_factory=dict)
    settings: dict = field(default_factory=get_default_settings)
    output_path: str = ""

    @property
    def master_seed(self):
        return self.settings["master_seed"]

    @property
    def output_format(self):
        return self.settings["output_format"]

    def resolve_output_path(self):
        if self.output_path:
            return Path(self.output_path)
        return Path(self.settings["output_dir"]) / f"{self.subcommand}.{self.output_format}"

    def as_dict(self):
        """Echoed into every report; the output location is left out so reports compare byte for byte."""
        settings = {k: v for k, v in self.settings.items() if k != "output_dir"}
        return {"subcommand": self.subcommand, "params": self.params, "settings": settings}
