"""Run configuration: TOML key/value file with strict validation.

Defaults mirror the engine's documented constants (body length 20, edge
co-occurrence 3, conditional probability 0.15, one shared title word, and so
on). Unknown sections or keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .evaluate import SynthSpec


class ConfigError(Exception):
    """Invalid or unreadable run configuration."""


@dataclass
class RunConfig:
    # [corpus]
    min_len: int = 20
    period_days: float = 1.0
    slice_origin: int | None = None
    # [keywords]
    max_k: int = 15
    threshold: float = 0.30
    w_tfidf: float = 0.30
    w_title: float = 0.25
    w_coverage: float = 0.20
    w_textrank: float = 0.15
    w_early: float = 0.10
    tfidf_scale: float = 12.0
    textrank_scale: float = 2.0
    window: int = 5
    damping: float = 0.85
    iters: int = 30
    stopwords: str | None = None
    # [graph]
    min_cooccur: int = 3
    min_cond_prob: float = 0.15
    max_community_size: int = 40
    beta: float = 1.0
    min_community_size: int = 3
    # [events]
    min_sim: float = 0.05
    doc_max_size: int = 6
    doc_beta: float = 1.0
    decider_weights: list[float] = field(default_factory=lambda: [0.2, 0.2, 0.2, 0.2, 0.2])
    decider_bias: float = 0.0
    decider_threshold: float = 0.5
    decider_model: str | None = None
    # [forest]
    title_n: int = 1
    compat_threshold: float = 0.15
    strength_threshold: float = 0.25
    delta_per_day: float = 1.0
    history: int = 30
    include_root_edge: bool = True
    merge_scan_cap: int = 64
    # [run]
    seed: int = 42
    # [synth]
    synth: SynthSpec = field(default_factory=SynthSpec)

    def validate(self) -> None:
        checks = [
            (self.min_len >= 0, "corpus.min_len must be >= 0"),
            (self.period_days > 0, "corpus.period_days must be > 0"),
            (self.slice_origin is None or self.slice_origin > 0, "corpus.slice_origin must be > 0"),
            (self.max_k >= 1, "keywords.max_k must be >= 1"),
            (self.window >= 2, "keywords.window must be >= 2"),
            (0.0 < self.damping < 1.0, "keywords.damping must be in (0, 1)"),
            (self.iters >= 1, "keywords.iters must be >= 1"),
            (self.tfidf_scale > 0, "keywords.tfidf_scale must be > 0"),
            (self.textrank_scale > 0, "keywords.textrank_scale must be > 0"),
            (self.min_cooccur >= 1, "graph.min_cooccur must be >= 1"),
            (0.0 <= self.min_cond_prob <= 1.0, "graph.min_cond_prob must be in [0, 1]"),
            (self.max_community_size >= 2, "graph.max_community_size must be >= 2"),
            (self.beta > 0, "graph.beta must be > 0"),
            (self.min_community_size >= 1, "graph.min_community_size must be >= 1"),
            (0.0 <= self.min_sim <= 1.0, "events.min_sim must be in [0, 1]"),
            (self.doc_max_size >= 2, "events.doc_max_size must be >= 2"),
            (self.doc_beta > 0, "events.doc_beta must be > 0"),
            (len(self.decider_weights) == 5, "events.decider_weights needs exactly 5 values"),
            (self.title_n >= 1, "forest.title_n must be >= 1"),
            (0.0 <= self.compat_threshold <= 1.0, "forest.compat_threshold must be in [0, 1]"),
            (self.strength_threshold >= 0.0, "forest.strength_threshold must be >= 0"),
            (self.delta_per_day > 0, "forest.delta_per_day must be > 0"),
            (self.history >= 0, "forest.history must be >= 0"),
            (self.merge_scan_cap >= 1, "forest.merge_scan_cap must be >= 1"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)

    @property
    def period_seconds(self) -> int:
        return max(1, round(self.period_days * 86400))


_SECTIONS = {
    "corpus": ["min_len", "period_days", "slice_origin"],
    "keywords": [
        "max_k", "threshold", "w_tfidf", "w_title", "w_coverage", "w_textrank",
        "w_early", "tfidf_scale", "textrank_scale", "window", "damping", "iters",
        "stopwords",
    ],
    "graph": ["min_cooccur", "min_cond_prob", "max_community_size", "beta", "min_community_size"],
    "events": [
        "min_sim", "doc_max_size", "doc_beta", "decider_weights", "decider_bias",
        "decider_threshold", "decider_model",
    ],
    "forest": [
        "title_n", "compat_threshold", "strength_threshold", "delta_per_day",
        "history", "include_root_edge", "merge_scan_cap",
    ],
    "run": ["seed"],
}

_SYNTH_FIELDS = {f.name for f in fields(SynthSpec)}


def config_from_dict(raw: dict) -> RunConfig:
    cfg = RunConfig()
    for section, content in raw.items():
        if section == "synth":
            unknown = set(content) - _SYNTH_FIELDS
            if unknown:
                raise ConfigError(f"unknown keys in [synth]: {sorted(unknown)}")
            try:
                cfg.synth = SynthSpec(**content)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid [synth] section: {exc}") from exc
            continue
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(content, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, value in content.items():
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            setattr(cfg, key, value)
    if isinstance(cfg.decider_weights, list):
        cfg.decider_weights = [float(w) for w in cfg.decider_weights]
    cfg.validate()
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return config_from_dict(raw)
