"""Run configuration: one YAML or JSON file with dotted ``section.key=value`` overrides."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .evolver.config import EvolverConfig
from .offloading import OffloadConfig
from .radio import LinkBudgetParams, QueueParams
from .scenario import SyntheticSpec


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class RunSection:
    scenario_path: str = ""
    output_dir: str = "out"
    seeds: tuple[int, ...] = (0,)
    workers: int = 1


@dataclass(frozen=True)
class CompareSection:
    deployment_path: str = ""
    strategies: tuple[str, ...] = ("ibrsg", "nearest", "strongest", "random")


@dataclass(frozen=True)
class RunConfig:
    run: RunSection = field(default_factory=RunSection)
    evolver: EvolverConfig = field(default_factory=EvolverConfig)
    radio: LinkBudgetParams = field(default_factory=LinkBudgetParams)
    queue: QueueParams = field(default_factory=QueueParams)
    offload: OffloadConfig = field(default_factory=OffloadConfig)
    compare: CompareSection = field(default_factory=CompareSection)
    synth: SyntheticSpec = field(default_factory=SyntheticSpec)

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            section = dataclasses.asdict(getattr(self, f.name))
            out[f.name] = {k: list(v) if isinstance(v, tuple) else v for k, v in section.items()}
        return out


_TYPES = {"run": RunSection, "evolver": EvolverConfig, "radio": LinkBudgetParams, "queue": QueueParams,
          "offload": OffloadConfig, "compare": CompareSection, "synth": SyntheticSpec}


def _coerce(cls, key: str, value: Any) -> Any:
    default = next(f for f in dataclasses.fields(cls) if f.name == key).default
    if default is dataclasses.MISSING:
        return value
    if isinstance(default, tuple):
        if not isinstance(value, (list, tuple)):
            value = [value]
        if default and isinstance(default[0], int):
            if not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
                raise ConfigError(f"{cls.__name__}.{key} expects a list of integers, got {value!r}")
            return tuple(value)
        return tuple(value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{cls.__name__}.{key} expects true/false, got {value!r}")
        return value
    if isinstance(default, (int, float)) and isinstance(value, str):
        # YAML 1.1 reads "5.9e9" (no exponent sign) as a string
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"{cls.__name__}.{key} expects a number, got {value!r}") from None
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{cls.__name__}.{key} expects an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{cls.__name__}.{key} expects a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        return str(value)
    return value


def _build(name: str, values: dict) -> Any:
    cls = _TYPES[name]
    values = dict(values or {})
    known = {f.name for f in dataclasses.fields(cls)}
    variant = values.pop("variant", None) if name == "evolver" else None
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")
    kwargs = {k: _coerce(cls, k, v) for k, v in values.items()}
    try:
        obj = dataclasses.replace(cls(), **kwargs)
        # the variant sets its switches last, so it also wins over a manifest's explicit ones
        if variant is not None:
            obj = obj.with_variant(str(variant))
        return obj
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{name}]: {exc}") from exc


def parse_override(text: str) -> tuple[str, str, Any]:
    """``"evolver.calibrate=false"`` -> ``("evolver", "calibrate", False)``; values parse as YAML scalars."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form section.key=value")
    path, raw = text.split("=", 1)
    if path.count(".") != 1:
        raise ConfigError(f"override key {path!r} is not of the form section.key")
    section, key = path.strip().split(".")
    try:
        value = yaml.safe_load(raw) if raw.strip() else ""
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse override value {raw!r}") from exc
    return section, key, value


def load_config_dict(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a mapping of sections")
    return data


def build_config(data: dict, overrides: list[str] = ()) -> RunConfig:
    for name, section in data.items():
        if section is not None and not isinstance(section, dict):
            raise ConfigError(f"section [{name}] must be a mapping")
    # "meta" holds informational fields written into manifests
    data = {k: dict(v or {}) for k, v in data.items() if k != "meta"}
    for text in overrides:
        section, key, value = parse_override(text)
        data.setdefault(section, {})[key] = value
    unknown = set(data) - set(_TYPES)
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    cfg = RunConfig(**{name: _build(name, data.get(name, {})) for name in _TYPES})
    if not cfg.run.seeds:
        raise ConfigError("run.seeds must not be empty")
    if cfg.run.workers < 1:
        raise ConfigError("run.workers must be >= 1")
    return cfg


def load_config(path=None, overrides: list[str] = ()) -> RunConfig:
    return build_config(load_config_dict(path) if path else {}, overrides)


def dump_manifest(cfg: RunConfig, path, extra: dict | None = None) -> None:
    """Write the resolved configuration as JSON; it loads back through :func:`load_config`."""
    data = cfg.to_dict()
    data["meta"] = {"variant": cfg.evolver.variant, **(extra or {})}
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
