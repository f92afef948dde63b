"""Pipeline configuration: one TOML or JSON file plus ``key=value`` overrides."""

from __future__ import annotations

import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .gateway import BackendConfig
from .qgen import GenerationConfig
from .topics import TopicConfig

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


class ConfigError(ValueError):
    pass


@dataclass
class KeywordConfig:
    top_n: int = 20
    lam: float = 0.7
    target: int = 10


@dataclass
class Bm25Config:
    k1: float = 0.9
    b: float = 0.4
    stem: bool = True


@dataclass
class FusionConfig:
    alpha: float = 0.5
    n_t: int = 300
    n_q: int = 1000
    similarity: str = "inner_product"


@dataclass
class PipelineConfig:
    dataset_dir: str = ""
    split: str = "test"
    output_dir: str = "out"
    include_title: bool = True
    fewshot_path: str = ""
    search_depth: int = 1000
    embedding: BackendConfig = field(default_factory=lambda: BackendConfig(kind="stub", dimension=64))
    chat: BackendConfig = field(default_factory=lambda: BackendConfig(kind="stub"))
    topics: TopicConfig = field(default_factory=TopicConfig)
    keywords: KeywordConfig = field(default_factory=KeywordConfig)
    generation: GenerationConfig = field(default_factory=GenerationConfig)
    bm25: Bm25Config = field(default_factory=Bm25Config)
    fusion: FusionConfig = field(default_factory=FusionConfig)

    @property
    def out(self) -> Path:
        return Path(self.output_dir)

    def validate(self) -> None:
        try:
            self.embedding.validate()
            self.chat.validate()
            self.generation.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        checks = [
            (self.topics.min_cluster_size >= 1, "topics.min_cluster_size must be >= 1"),
            (self.topics.keywords_per_topic >= 1, "topics.keywords_per_topic must be >= 1"),
            (self.topics.representatives >= 1, "topics.representatives must be >= 1"),
            (self.keywords.top_n >= 1, "keywords.top_n must be >= 1"),
            (0.0 <= self.keywords.lam <= 1.0, "keywords.lam must lie in [0, 1]"),
            (self.keywords.target >= 1, "keywords.target must be >= 1"),
            (self.bm25.k1 >= 0, "bm25.k1 must be >= 0"),
            (0.0 <= self.bm25.b <= 1.0, "bm25.b must lie in [0, 1]"),
            (0.0 <= self.fusion.alpha <= 1.0, "fusion.alpha must lie in [0, 1]"),
            (self.fusion.n_t >= 1 and self.fusion.n_q >= 1, "fusion.n_t and fusion.n_q must be >= 1"),
            (self.fusion.similarity in ("inner_product", "cosine"), "fusion.similarity must be inner_product or cosine"),
            (self.search_depth >= 1, "search_depth must be >= 1"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)


def _apply(obj: Any, data: dict, where: str = "") -> None:
    names = {f.name: f for f in dataclasses.fields(obj)}
    for key, value in data.items():
        if key not in names:
            raise ConfigError(f"unknown config key {where}{key}")
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current):
            if not isinstance(value, dict):
                raise ConfigError(f"{where}{key} must be a table")
            _apply(current, value, f"{where}{key}.")
        else:
            setattr(obj, key, _coerce(current, value, f"{where}{key}"))


def _coerce(current: Any, value: Any, name: str) -> Any:
    if current is None or value is None:
        return value
    if isinstance(current, bool):
        if isinstance(value, str):
            if value.lower() in ("1", "true", "yes", "on"):
                return True
            if value.lower() in ("0", "false", "no", "off"):
                return False
            raise ConfigError(f"{name}: expected a boolean, got {value!r}")
        return bool(value)
    try:
        if isinstance(current, int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if isinstance(current, float):
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected {type(current).__name__}, got {value!r}") from None
    return str(value) if isinstance(current, str) else value


def parse_override(text: str) -> tuple[list[str], Any]:
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not key=value")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip().split("."), value


def load_config(path: str | None = None, overrides: list[str] = ()) -> PipelineConfig:
    cfg = PipelineConfig()
    if path:
        p = Path(path)
        try:
            raw = p.read_bytes()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from exc
        try:
            data = json.loads(raw) if p.suffix == ".json" else tomllib.loads(raw.decode("utf-8"))
        except (ValueError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot parse config {p}: {exc}") from exc
        _apply(cfg, data)
        base = p.parent
        for attr in ("dataset_dir", "output_dir", "fewshot_path"):
            value = getattr(cfg, attr)
            if value and not Path(value).is_absolute():
                setattr(cfg, attr, str(base / value))
    for item in overrides:
        keys, value = parse_override(item)
        nested: dict = {keys[-1]: value}
        for k in reversed(keys[:-1]):
            nested = {k: nested}
        _apply(cfg, nested)
    cfg.embedding.with_env("DOCEXPAND_EMBED")
    cfg.chat.with_env("DOCEXPAND_CHAT")
    cfg.validate()
    return cfg
