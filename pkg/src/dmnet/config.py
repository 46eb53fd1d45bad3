"""YAML configuration documents.

A document has up to five top-level sections, ``stft``, ``simulate``,
``model``, ``train`` and ``evaluate``, whose keys are the field names of the
corresponding dataclasses. Missing keys take the dataclass defaults; unknown
keys are rejected with their dotted path. Resolved documents written next to a
command's outputs also carry a ``command`` section with the invocation's
arguments; it is ignored when the document is read back.
"""

from __future__ import annotations

import dataclasses
import types
import typing
from dataclasses import dataclass, field, fields, is_dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Any, TypeVar, Union

import yaml

from .errors import ConfigurationError
from .metrics.report import EvalConfig
from .model.config import ModelConfig
from .simulation.corpus import CorpusConfig
from .spectral import StftConfig
from .training.config import TrainConfig

T = TypeVar("T")

RESOLVED_CONFIG_NAME = "resolved_config.yaml"
COMMAND_SECTION = "command"


@dataclass(frozen=True)
class ProjectConfig:
    """All sections of a configuration document."""

    stft: StftConfig = field(default_factory=StftConfig)
    simulate: CorpusConfig = field(default_factory=CorpusConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    evaluate: EvalConfig = field(default_factory=EvalConfig)

    def to_dict(self) -> dict[str, Any]:
        """Plain mapping; the model's STFT settings live in the ``stft`` section."""
        out = to_plain(self)
        out["model"].pop("stft")
        return out

    def override(self, section: str, **values: Any) -> ProjectConfig:
        """Copy with fields of one section replaced; `None` values are ignored."""
        values = {k: v for k, v in values.items() if v is not None}
        if not values:
            return self
        try:
            updated = replace(getattr(self, section), **values)
        except TypeError as e:
            msg = f"cannot override {section}: {e}"
            raise ConfigurationError(msg) from e
        return replace(self, **{section: updated})


def to_plain(obj: Any) -> Any:
    """Dataclasses, enums and tuples as YAML-safe builtins."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, tuple | list):
        return [to_plain(v) for v in obj]
    if isinstance(obj, dict):
        return {k: to_plain(v) for k, v in obj.items()}
    return obj


def _coerce(tp: Any, value: Any, path: str) -> Any:
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin in {Union, types.UnionType}:
        if value is None and type(None) in args:
            return None
        (inner,) = (a for a in args if a is not type(None))
        return _coerce(inner, value, path)
    if isinstance(tp, type) and is_dataclass(tp):
        return build(tp, value, path)
    if isinstance(tp, type) and issubclass(tp, Enum):
        try:
            return tp(value)
        except ValueError as e:
            choices = ", ".join(str(m.value) for m in tp)
            msg = f"{path}: {value!r} is not one of {choices}"
            raise ConfigurationError(msg) from e
    if origin is tuple:
        if not isinstance(value, list | tuple):
            msg = f"{path}: expected a list, got {value!r}"
            raise ConfigurationError(msg)
        item_types = [args[0]] * len(value) if len(args) == 2 and args[1] is Ellipsis else list(args)
        if len(item_types) != len(value):
            msg = f"{path}: expected {len(item_types)} items, got {len(value)}"
            raise ConfigurationError(msg)
        return tuple(_coerce(t, v, f"{path}[{i}]") for i, (t, v) in enumerate(zip(item_types, value, strict=True)))
    if tp is bool:
        if not isinstance(value, bool):
            msg = f"{path}: expected true or false, got {value!r}"
            raise ConfigurationError(msg)
        return value
    if tp in {int, float}:
        if tp is float and isinstance(value, str):
            # YAML 1.1 reads exponents without a dot (5e-4) as strings
            try:
                return float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or not isinstance(value, int | float) or (tp is int and value != int(value)):
            msg = f"{path}: expected {tp.__name__}, got {value!r}"
            raise ConfigurationError(msg)
        return tp(value)
    return value


def build(cls: type[T], data: Any, path: str) -> T:
    """Instantiate dataclass `cls` from a mapping, rejecting unknown keys."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        msg = f"{path}: expected a mapping, got {type(data).__name__}"
        raise ConfigurationError(msg)
    assert dataclasses.is_dataclass(cls)
    hints = typing.get_type_hints(cls)
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        msg = f"unknown configuration key {path}.{unknown[0]}"
        raise ConfigurationError(msg)
    kwargs = {name: _coerce(hints[name], value, f"{path}.{name}") for name, value in data.items()}
    return cls(**kwargs)


def parse_config(document: dict[str, Any] | None) -> ProjectConfig:
    """Build a `ProjectConfig` from a parsed document."""
    document = document or {}
    if not isinstance(document, dict):
        msg = "configuration document must be a mapping of sections"
        raise ConfigurationError(msg)
    sections = {f.name for f in fields(ProjectConfig)}
    unknown = sorted(set(document) - sections - {COMMAND_SECTION})
    if unknown:
        msg = f"unknown configuration section {unknown[0]}, expected one of {sorted(sections)}"
        raise ConfigurationError(msg)
    model_section = dict(document.get("model") or {})
    if "stft" in model_section:
        msg = "model.stft is not a key; set STFT parameters in the top-level stft section"
        raise ConfigurationError(msg)
    stft = build(StftConfig, document.get("stft"), "stft")
    model = replace(build(ModelConfig, model_section, "model"), stft=stft)
    return ProjectConfig(
        stft=stft,
        simulate=build(CorpusConfig, document.get("simulate"), "simulate"),
        model=model,
        train=build(TrainConfig, document.get("train"), "train"),
        evaluate=build(EvalConfig, document.get("evaluate"), "evaluate"),
    )


def load_config(path: str | Path | None = None) -> ProjectConfig:
    """Read a YAML document; defaults for everything without a path."""
    if path is None:
        return ProjectConfig()
    path = Path(path)
    try:
        document = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as e:
        msg = f"{path}: cannot read configuration ({e})"
        raise ConfigurationError(msg) from e
    except yaml.YAMLError as e:
        msg = f"{path}: invalid YAML ({e})"
        raise ConfigurationError(msg) from e
    return parse_config(document)


def dump_config(cfg: ProjectConfig, out_dir: str | Path, command: dict[str, Any] | None = None) -> Path:
    """Write the resolved document next to a command's outputs.

    `command` holds the invocation's own arguments (paths and flags) and is
    written as the ``command`` section.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    document = cfg.to_dict()
    if command is not None:
        document[COMMAND_SECTION] = command
    path = out_dir / RESOLVED_CONFIG_NAME
    path.write_text(yaml.safe_dump(document, sort_keys=False), encoding="utf-8")
    return path
