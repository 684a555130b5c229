"""Pipeline configuration: one YAML file whose defaults reproduce the standard setting."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import yaml

from .latent import RelationThresholds
from .lnf import DEFAULT_BETA, LbpParams
from .pipeline import METHODS
from .records import CleansingConfig, ConfigError

DEFAULTS = {
    "paths": {
        "schedule": None,
        "participation": None,
        "encounters": None,
        "raw_log": None,
        "output": "out",
    },
    "ingest": {"gap": 120.0, "room_zones": None, "common_zones": None},
    "cleansing": {"min_participation_duration": 180.0, "min_participation_count": 3, "min_encounter_duration": 180.0},
    "thresholds": {"k": 6, "phi": 0.4, "delta": 6, "theta": 1800.0},
    "lbp": {"damping": 0.5, "tolerance": 1e-6, "max_iterations": 200},
    "model": {"beta": DEFAULT_BETA, "encounter_mode": "time", "neighbor_fraction": 0.05},
    "split": {"train_sessions": None},
    "evaluate": {"methods": list(METHODS), "sweep": {}},
}


def _merge(base, override, where=""):
    for key, value in override.items():
        if key not in base:
            raise ConfigError(f"unknown config key {where}{key}")
        if isinstance(base[key], dict) and base[key] and isinstance(value, dict):
            _merge(base[key], value, f"{where}{key}.")
        else:
            base[key] = value
    return base


def parse_override(text: str):
    """``section.key=value`` with a YAML-parsed value."""
    if "=" not in text or "." not in text.split("=", 1)[0]:
        raise ConfigError(f"override {text!r} is not of the form section.key=value")
    path, raw = text.split("=", 1)
    section, key = path.split(".", 1)
    return {section: {key: yaml.safe_load(raw)}}


@dataclass
class PipelineConfig:
    data: dict
    base_dir: Path

    @classmethod
    def load(cls, path=None, overrides=()) -> "PipelineConfig":
        data = copy.deepcopy(DEFAULTS)
        base = Path.cwd()
        if path is not None:
            path = Path(path)
            try:
                loaded = yaml.safe_load(path.read_text()) or {}
            except FileNotFoundError:
                raise ConfigError(f"config file {path} not found") from None
            except yaml.YAMLError as exc:
                raise ConfigError(f"config file {path} is not valid YAML: {exc}") from None
            if not isinstance(loaded, dict):
                raise ConfigError(f"config file {path} must hold a mapping")
            _merge(data, loaded)
            base = path.resolve().parent
        for o in overrides:
            _merge(data, parse_override(o) if isinstance(o, str) else o)
        return cls(data, base)

    def path(self, name, required=True):
        value = self.data["paths"].get(name)
        if value is None:
            if required:
                raise ConfigError(f"config field paths.{name} is required")
            return None
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    def input_path(self, name, required=True):
        p = self.path(name, required)
        if p is not None and not p.exists():
            raise ConfigError(f"paths.{name}: {p} does not exist")
        return p

    def _build(self, cls, section):
        try:
            return cls(**self.data[section])
        except TypeError as exc:
            raise ConfigError(f"bad {section} section: {exc}") from None

    @property
    def cleansing(self) -> CleansingConfig:
        return self._build(CleansingConfig, "cleansing")

    @property
    def thresholds(self) -> RelationThresholds:
        return self._build(RelationThresholds, "thresholds")

    @property
    def lbp(self) -> LbpParams:
        return self._build(LbpParams, "lbp")

    @property
    def model(self) -> dict:
        return self.data["model"]

    @property
    def train_sessions(self) -> int:
        t = self.data["split"]["train_sessions"]
        if t is None:
            raise ConfigError("config field split.train_sessions is required")
        return int(t)

    @property
    def methods(self) -> list:
        methods = self.data["evaluate"]["methods"]
        if not methods:
            raise ConfigError("config field evaluate.methods is empty")
        for m in methods:
            if m not in METHODS:
                raise ConfigError(f"evaluate.methods: unknown method {m!r}")
        return list(methods)

    def digest(self) -> str:
        blob = json.dumps(self.data, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


def parse_sweep(text: str) -> dict:
    """``K=2..10`` (inclusive integer range) or ``phi=0.2,0.4,0.6``."""
    if "=" not in text:
        raise ConfigError(f"sweep {text!r} is not of the form name=values")
    name, values = text.split("=", 1)
    name = name.strip().lower()
    if ".." in values:
        lo, hi = values.split("..", 1)
        try:
            return {name: list(range(int(lo), int(hi) + 1))}
        except ValueError:
            raise ConfigError(f"sweep range {values!r} must be integers") from None
    out = [yaml.safe_load(v) for v in values.split(",") if v.strip()]
    if not out:
        raise ConfigError(f"sweep {text!r} lists no values")
    return {name: out}
