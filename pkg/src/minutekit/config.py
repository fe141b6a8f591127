"""JSON configuration with strict validation, plus backend resolution."""

from __future__ import annotations

import importlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ConfigError
from .features import DEFAULT_ENTITY_TAGS

CONFIG_VERSION = 1


@dataclass
class SegmenterConfig:
    backend: str = "lexical"
    max_tokens: int = 4096
    stride: int = 1024
    window: int = 4
    k: float = 0.5


@dataclass
class SummarizerConfig:
    backend: str = "extractive"
    ratio: float = 0.25
    max_tokens: int = 1024


@dataclass
class ArgmineConfig:
    backend: str = "rules"


@dataclass
class FeaturesConfig:
    N: int = 4
    entity_tags: list = field(default_factory=lambda: list(DEFAULT_ENTITY_TAGS))


@dataclass
class LearnConfig:
    k: int = 10
    budget: int = 10
    seed: int = 0
    loss_kind: str = "logistic"
    epochs: int = 300


@dataclass
class PathsConfig:
    post_rules: str | None = None


@dataclass
class Config:
    version: int = CONFIG_VERSION
    segmenter: SegmenterConfig = field(default_factory=SegmenterConfig)
    summarizer: SummarizerConfig = field(default_factory=SummarizerConfig)
    argmine: ArgmineConfig = field(default_factory=ArgmineConfig)
    features: FeaturesConfig = field(default_factory=FeaturesConfig)
    learn: LearnConfig = field(default_factory=LearnConfig)
    paths: PathsConfig = field(default_factory=PathsConfig)

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> "Config":
        s, m, f, lr = self.segmenter, self.summarizer, self.features, self.learn
        checks = [
            (self.version == CONFIG_VERSION, f"unsupported config version {self.version}"),
            (0 < s.stride < s.max_tokens, "segmenter: need 0 < stride < max_tokens"),
            (s.window >= 1, "segmenter.window must be >= 1"),
            (s.k >= 0, "segmenter.k must be >= 0"),
            (0 < m.ratio <= 1, "summarizer.ratio must be in (0, 1]"),
            (m.max_tokens > 0, "summarizer.max_tokens must be positive"),
            (f.N >= 1, "features.N must be >= 1"),
            (all(isinstance(t, str) and t for t in f.entity_tags), "features.entity_tags must be strings"),
            (lr.k >= 2, "learn.k must be >= 2"),
            (lr.budget >= 1, "learn.budget must be >= 1"),
            (lr.epochs >= 1, "learn.epochs must be >= 1"),
            (lr.loss_kind in ("logistic", "hinge"), "learn.loss_kind must be logistic or hinge"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        return self


def _coerce(section: str, name: str, default, value):
    where = f"{section}.{name}" if section else name
    if isinstance(default, bool) or isinstance(value, bool):
        raise ConfigError(f"{where}: booleans are not accepted")
    if isinstance(default, int) and not isinstance(default, bool):
        if not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{where}: expected a list")
        return list(value)
    if default is None or isinstance(default, str):
        if value is not None and not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string")
        return value
    return value


def config_from_dict(data: dict) -> Config:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    cfg = Config()
    known = {f.name for f in fields(Config)}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        if key == "version":
            cfg.version = _coerce("", "version", 1, value)
            continue
        if not isinstance(value, dict):
            raise ConfigError(f"{key}: expected an object")
        section = getattr(cfg, key)
        names = {f.name for f in fields(section)}
        for name, v in value.items():
            if name not in names:
                raise ConfigError(f"unknown config key {key}.{name!r}")
            setattr(section, name, _coerce(key, name, getattr(section, name), v))
    return cfg.validate()


def load_config(path=None, seed: int | None = None) -> Config:
    if path is None:
        cfg = Config()
    else:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        cfg = config_from_dict(data)
    if seed is not None:
        cfg.learn.seed = seed
    return cfg.validate()


def resolve_backend(name: str, builtins: dict):
    """Built-in backend name, or ``package.module:attr`` for a plug-in.

    Classes are instantiated without arguments; other attributes are used as is.
    """
    if name in builtins:
        return builtins[name]()
    if ":" not in name:
        raise ConfigError(f"unknown backend {name!r}; expected one of {sorted(builtins)} or module:attr")
    module_name, _, attr = name.partition(":")
    try:
        obj = getattr(importlib.import_module(module_name), attr)
    except (ImportError, AttributeError) as exc:
        raise ConfigError(f"cannot load backend {name!r}: {exc}") from exc
    return obj() if isinstance(obj, type) else obj
