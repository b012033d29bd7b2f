"""Application configuration: file, environment, and flag layering.

Precedence, lowest to highest: built-in defaults, JSON config file,
KG20Q_*-prefixed environment variables, explicit overrides (CLI flags).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .catalog import (
    Catalog,
    PreprocessOptions,
    load_catalog,
    load_reference_catalog,
    preprocess,
)
from .engine import GameConfig
from .kgraph import IndexPair, LearnedStats, build_indices, load_stats_or_empty
from .scoring import EstimatorConfig

ENV_PREFIX = "KG20Q_"


@dataclass
class AppConfig:
    """Gateway-level settings; field names double as config-file keys."""

    catalog_path: str | None = None  # None -> packaged reference catalog
    stats_path: str = "kg20q_stats.json"
    # Preprocessing applied when loading a catalog file. The packaged
    # reference catalog was curated for this bound.
    min_tag_fraction: float = 0.03
    # Estimator weights.
    alpha: float = 0.2
    beta: float = 1.0
    sigma: float = 10.0
    mean_offset: int = 20
    smoothing: float = 1.0
    # Session rules.
    max_questions: int = 20
    guess_size: int = 5
    guess_threshold: float = 0.5
    # Service.
    host: str = "127.0.0.1"
    port: int = 8000
    session_timeout_seconds: float = 1800.0

    def estimator_config(self) -> EstimatorConfig:
        return EstimatorConfig(
            alpha=self.alpha,
            beta=self.beta,
            sigma=self.sigma,
            mean_offset=self.mean_offset,
            smoothing=self.smoothing,
        )

    def game_config(self) -> GameConfig:
        return GameConfig(
            estimator=self.estimator_config(),
            max_questions=self.max_questions,
            guess_size=self.guess_size,
            guess_threshold=self.guess_threshold,
        )

    def preprocess_options(self) -> PreprocessOptions:
        return PreprocessOptions(min_tag_fraction=self.min_tag_fraction)


_INT_FIELDS = {"max_questions", "guess_size", "mean_offset", "port"}
_FLOAT_FIELDS = {
    "min_tag_fraction", "alpha", "beta", "sigma", "smoothing",
    "guess_threshold", "session_timeout_seconds",
}


def _coerce(name: str, value):
    if value is None:
        return None
    if name in _INT_FIELDS:
        return int(value)
    if name in _FLOAT_FIELDS:
        return float(value)
    return str(value)


def load_config(
    path: str | Path | None = None,
    env: dict | None = None,
    overrides: dict | None = None,
) -> AppConfig:
    """Build an AppConfig from a JSON file, environment, and overrides."""
    values: dict = {}
    known = {f.name for f in fields(AppConfig)}

    if path is not None:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(doc, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(doc)

    env = os.environ if env is None else env
    for name in known:
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            values[name] = env[env_key]

    for name, value in (overrides or {}).items():
        if name not in known:
            raise ValueError(f"unknown config override: {name}")
        if value is not None:
            values[name] = value

    values = {name: _coerce(name, value) for name, value in values.items()}
    config = AppConfig(**values)
    config.estimator_config()  # validate numeric ranges early
    return config


def load_runtime(config: AppConfig) -> tuple[Catalog, IndexPair, LearnedStats]:
    """Load and preprocess the catalog, build indices, read the stats store."""
    if config.catalog_path is None:
        catalog = load_reference_catalog(config.preprocess_options())
    else:
        catalog = preprocess(
            load_catalog(config.catalog_path), config.preprocess_options()
        )
    indices = build_indices(catalog)
    stats = load_stats_or_empty(config.stats_path)
    return catalog, indices, stats
