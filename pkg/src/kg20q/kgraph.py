"""Two-way inverted index over the catalog and cross-game learned weights.

The index pair is the edge structure of the bipartite knowledge graph:
forward maps a movie to its entities, backward maps an entity to the movies
carrying it. Learned weights are plain integer election counts per entity
(how many times the entity belonged to a user-confirmed movie); probabilities
are derived from them on demand by the scoring module, so persistence is
exact and order-independent.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

from .catalog import Catalog, Level

logger = logging.getLogger(__name__)


class StatsStoreError(RuntimeError):
    """The stats store is unreadable or structurally corrupt."""


@dataclass(frozen=True)
class Entity:
    """A (level, value) node of the knowledge graph."""

    level: Level
    value: str

    def __post_init__(self) -> None:
        if not self.value:
            raise ValueError("entity value must be non-empty")

    @property
    def sort_key(self) -> tuple[str, str]:
        return (self.level.value, self.value)

    def question_text(self) -> str:
        return self.level.question_text(self.value)

    def __str__(self) -> str:  # pragma: no cover - debugging aid
        return f"{self.level.value}:{self.value}"


@dataclass(frozen=True)
class IndexPair:
    """Forward (movie -> entities) and backward (entity -> movies) indices."""

    forward: dict[str, frozenset[Entity]]
    backward: dict[Entity, frozenset[str]]

    @property
    def n_movies(self) -> int:
        return len(self.forward)

    def entities_for(self, movie_id: str) -> frozenset[Entity]:
        return self.forward.get(movie_id, frozenset())

    def movies_for(self, entity: Entity) -> frozenset[str]:
        return self.backward.get(entity, frozenset())

    def coverage(self, entity: Entity) -> int:
        return len(self.backward.get(entity, frozenset()))

    def level_entities(self, level: Level) -> tuple[Entity, ...]:
        """All entities at a level, in deterministic (value-sorted) order."""
        return tuple(
            sorted((e for e in self.backward if e.level is level), key=lambda e: e.value)
        )

    def all_entities(self) -> tuple[Entity, ...]:
        return tuple(sorted(self.backward, key=lambda e: e.sort_key))


def build_indices(catalog: Catalog) -> IndexPair:
    """Build the two-way inverted index from a preprocessed catalog.

    Both directions are mutually consistent by construction: a movie id is in
    backward(e) exactly when e is in forward(movie).
    """
    forward: dict[str, frozenset[Entity]] = {}
    backward: dict[Entity, set[str]] = {}
    for movie in catalog.movies:
        entities = set()
        for level, values in movie.attributes.items():
            for value in values:
                entity = Entity(level, value)
                entities.add(entity)
                backward.setdefault(entity, set()).add(movie.id)
        forward[movie.id] = frozenset(entities)
    return IndexPair(
        forward=forward,
        backward={e: frozenset(ids) for e, ids in backward.items()},
    )


@dataclass
class LearnedStats:
    """Cross-game election counts, keyed by entity.

    Entities with a zero count are not stored; absence means zero. Coverage
    is never stored here — it is recomputed from the backward index.
    """

    elections: dict[Entity, int] = field(default_factory=dict)
    games_recorded: int = 0

    def election_count(self, entity: Entity) -> int:
        return self.elections.get(entity, 0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LearnedStats):
            return NotImplemented
        mine = {e: c for e, c in self.elections.items() if c}
        theirs = {e: c for e, c in other.elections.items() if c}
        return mine == theirs and self.games_recorded == other.games_recorded

    def copy(self) -> "LearnedStats":
        return LearnedStats(dict(self.elections), self.games_recorded)


def record_election(stats: LearnedStats, indices: IndexPair, movie_id: str) -> LearnedStats:
    """Record a user-confirmed movie: +1 election for each of its entities.

    Mutates and returns `stats`. Exactly len(forward(movie_id)) + 1 stored
    integers change. Writers must hold exclusive access (single-writer
    contract); concurrent readers of a stale snapshot are fine.
    """
    entities = indices.forward.get(movie_id)
    if entities is None:
        raise KeyError(f"unknown movie id {movie_id!r}")
    for entity in entities:
        stats.elections[entity] = stats.elections.get(entity, 0) + 1
    stats.games_recorded += 1
    return stats


def save_stats(stats: LearnedStats, sink: str | Path | IO) -> None:
    """Persist stats as JSON; entity rows are sorted for stable output."""
    doc = {
        "games_recorded": stats.games_recorded,
        "entities": [
            {"level": e.level.value, "value": e.value, "elections": count}
            for e, count in sorted(stats.elections.items(), key=lambda kv: kv[0].sort_key)
            if count
        ],
    }
    text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        Path(sink).write_text(text, encoding="utf-8")


def save_stats_atomic(stats: LearnedStats, path: str | Path) -> None:
    """Write-temp-then-rename persistence for crash safety."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    save_stats(stats, tmp)
    os.replace(tmp, path)


def load_stats(source: str | Path | IO) -> LearnedStats:
    """Load stats saved by save_stats. Raises StatsStoreError on corruption."""
    try:
        if hasattr(source, "read"):
            data = source.read()
            text = data.decode("utf-8") if isinstance(data, bytes) else data
        else:
            text = Path(source).read_text(encoding="utf-8")
    except OSError as exc:
        raise StatsStoreError(f"cannot read stats store: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StatsStoreError(f"corrupt stats store: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("entities"), list):
        raise StatsStoreError("corrupt stats store: missing entities array")
    games = doc.get("games_recorded", 0)
    if not isinstance(games, int) or games < 0:
        raise StatsStoreError("corrupt stats store: bad games_recorded")

    elections: dict[Entity, int] = {}
    for row in doc["entities"]:
        try:
            level = Level(row["level"])
            value = row["value"]
            count = row["elections"]
        except (TypeError, KeyError, ValueError) as exc:
            raise StatsStoreError(f"corrupt stats store: bad entity row {row!r}") from exc
        if not isinstance(value, str) or not value or not isinstance(count, int) or count < 0:
            raise StatsStoreError(f"corrupt stats store: bad entity row {row!r}")
        elections[Entity(level, value)] = count
    return LearnedStats(elections=elections, games_recorded=games)


def load_stats_or_empty(path: str | Path) -> LearnedStats:
    """Load a stats store, or return empty stats when the file is absent.

    A present-but-corrupt store still raises: silent resets would discard
    learned history.
    """
    path = Path(path)
    if not path.exists():
        return LearnedStats()
    return load_stats(path)
