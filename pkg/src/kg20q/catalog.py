"""Movie catalog loading, validation, and preprocessing.

The catalog is the answer space of the game: each movie carries a set of
attribute values on up to six levels (era, genre, subject, actor, director,
music composer). Raw catalog files never contain era values; eras are always
derived from the release year during preprocessing, which also applies manual
overrides, per-level allowlists, and frequency pruning of rare values.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import IO

logger = logging.getLogger(__name__)

MIN_RELEASE_YEAR = 1800


class CatalogError(ValueError):
    """Base class for catalog loading and preprocessing failures."""


class ParseError(CatalogError):
    """Malformed catalog document (carries line/column when known)."""


class ValidationError(CatalogError):
    """Structurally valid document with invalid content."""


class Level(Enum):
    """One of the six metadata aspects a question can target.

    Era, genre, and subject form the primary (broad) layer; actor, director,
    and music composer form the secondary (specific) layer. The partition is
    fixed. Each level carries a question template with a single value slot.
    """

    ERA = "era"
    GENRE = "genre"
    SUBJECT = "subject"
    ACTOR = "actor"
    DIRECTOR = "director"
    MUSIC_COMPOSER = "music_composer"

    @property
    def is_primary(self) -> bool:
        return self in PRIMARY_LEVELS

    @property
    def template(self) -> str:
        return _TEMPLATES[self]

    def question_text(self, value: str) -> str:
        """Render the level's question template for a concrete value."""
        return self.template.format(value=value)


PRIMARY_LEVELS = (Level.ERA, Level.GENRE, Level.SUBJECT)
SECONDARY_LEVELS = (Level.ACTOR, Level.DIRECTOR, Level.MUSIC_COMPOSER)

_TEMPLATES = {
    Level.ERA: "Is your movie from the {value} era?",
    Level.GENRE: "Is {value} the genre of your movie?",
    Level.SUBJECT: "Is {value} the subject of your movie?",
    Level.ACTOR: "Is {value} an actor of your movie?",
    Level.DIRECTOR: "Is {value} the director of your movie?",
    Level.MUSIC_COMPOSER: "Is {value} the music composer of the movie?",
}

# Attribute keys accepted in catalog files. Era is never supplied in input;
# it is always derived from release_year.
_INPUT_LEVELS = {lvl.value: lvl for lvl in Level if lvl is not Level.ERA}


@dataclass(frozen=True)
class MovieRecord:
    """A single movie with its level-tagged attribute values."""

    id: str
    title: str
    release_year: int | None
    attributes: dict[Level, frozenset[str]]

    def values(self, level: Level) -> frozenset[str]:
        return self.attributes.get(level, frozenset())

    def has(self, level: Level, value: str) -> bool:
        return value in self.attributes.get(level, frozenset())


@dataclass(frozen=True)
class Catalog:
    """An ordered collection of movies plus a provenance note."""

    movies: tuple[MovieRecord, ...]
    provenance: str = ""

    @cached_property
    def by_id(self) -> dict[str, MovieRecord]:
        return {m.id: m for m in self.movies}

    def movie(self, movie_id: str) -> MovieRecord:
        try:
            return self.by_id[movie_id]
        except KeyError:
            raise KeyError(f"unknown movie id {movie_id!r}") from None

    def __len__(self) -> int:
        return len(self.movies)


@dataclass(frozen=True)
class Override:
    """A manual attribute addition: extra values for one movie at one level."""

    movie_id: str
    level: Level
    values: tuple[str, ...]


@dataclass(frozen=True)
class PreprocessOptions:
    """Knobs for catalog preprocessing.

    min_tag_fraction: values present in strictly fewer than this fraction of
        movies are removed from every record.
    value_allowlists: per-level allowed-value sets; values outside the list
        are dropped before pruning. Levels without an entry are unrestricted.
    overrides: manual attribute additions applied before pruning.
    """

    min_tag_fraction: float = 0.10
    value_allowlists: dict[Level, frozenset[str]] = field(default_factory=dict)
    overrides: tuple[Override, ...] = ()

    def __post_init__(self) -> None:
        if not 0.0 <= self.min_tag_fraction <= 1.0:
            raise ValidationError(
                f"min_tag_fraction must be in [0, 1], got {self.min_tag_fraction}"
            )


def derive_era(release_year: int) -> str:
    """Map a release year to its decade label, e.g. 1994 -> "1990s"."""
    if not isinstance(release_year, int) or isinstance(release_year, bool):
        raise ValidationError(f"release year must be an integer, got {release_year!r}")
    if release_year < MIN_RELEASE_YEAR:
        raise ValidationError(
            f"release year {release_year} is before {MIN_RELEASE_YEAR}"
        )
    return f"{release_year // 10 * 10}s"


def era_start_year(era: str) -> int:
    """Inverse of derive_era: "1990s" -> 1990. Raises on malformed labels."""
    if (
        not isinstance(era, str)
        or len(era) != 5
        or not era.endswith("s")
        or not era[:4].isdigit()
    ):
        raise ValidationError(f"malformed era label {era!r}")
    start = int(era[:4])
    if start % 10 != 0 or start < MIN_RELEASE_YEAR:
        raise ValidationError(f"malformed era label {era!r}")
    return start


def _read_text(source: str | Path | IO) -> str:
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8") if isinstance(data, bytes) else data
    return Path(source).read_text(encoding="utf-8")


def load_catalog(source: str | Path | IO) -> Catalog:
    """Load and validate a catalog document.

    Args:
        source: Path to a catalog JSON file, or an open text/byte stream.

    Returns:
        A Catalog whose records satisfy the MovieRecord invariants. Unknown
        fields and unknown attribute levels are ignored (counted and logged).

    Raises:
        ParseError: The document is not valid JSON (message carries
            line/column) or the top-level shape is wrong.
        ValidationError: Duplicate or missing ids, empty titles, empty
            attribute values, or an empty movie list.
    """
    text = _read_text(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"invalid catalog JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc

    if not isinstance(doc, dict) or not isinstance(doc.get("movies"), list):
        raise ParseError('catalog document must be an object with a "movies" array')

    provenance = doc.get("provenance", "")
    if not isinstance(provenance, str):
        raise ValidationError("provenance must be a string")

    ignored = 0
    for key in doc:
        if key not in ("movies", "provenance"):
            ignored += 1
            logger.debug("ignoring unknown top-level field %r", key)

    movies: list[MovieRecord] = []
    seen_ids: set[str] = set()
    for pos, raw in enumerate(doc["movies"]):
        movie, skipped = _parse_movie(raw, pos)
        ignored += skipped
        if movie.id in seen_ids:
            raise ValidationError(f"duplicate movie id {movie.id!r}")
        seen_ids.add(movie.id)
        movies.append(movie)

    if not movies:
        raise ValidationError("empty catalog")
    if ignored:
        logger.warning("catalog load ignored %d unknown field(s)", ignored)
    return Catalog(movies=tuple(movies), provenance=provenance)


def _parse_movie(raw: object, pos: int) -> tuple[MovieRecord, int]:
    """Parse one movie object; returns the record and the ignored-field count."""
    if not isinstance(raw, dict):
        raise ParseError(f"movie at position {pos} is not an object")
    movie_id = raw.get("id")
    if not isinstance(movie_id, str) or not movie_id:
        raise ValidationError(f"movie at position {pos} has no usable id")
    title = raw.get("title")
    if not isinstance(title, str) or not title.strip():
        raise ValidationError(f"movie {movie_id!r} has an empty title")

    year = raw.get("release_year")
    if year is not None:
        if not isinstance(year, int) or isinstance(year, bool):
            raise ValidationError(f"movie {movie_id!r} has a non-integer release_year")
        if year < MIN_RELEASE_YEAR:
            raise ValidationError(
                f"movie {movie_id!r} release_year {year} is before {MIN_RELEASE_YEAR}"
            )

    ignored = 0
    attributes: dict[Level, frozenset[str]] = {}
    raw_attrs = raw.get("attributes", {})
    if not isinstance(raw_attrs, dict):
        raise ValidationError(f"movie {movie_id!r} attributes must be an object")
    for key, values in raw_attrs.items():
        level = _INPUT_LEVELS.get(key)
        if level is None:
            ignored += 1
            logger.debug("movie %r: ignoring attribute level %r", movie_id, key)
            continue
        if not isinstance(values, list):
            raise ValidationError(f"movie {movie_id!r} level {key!r} must be a list")
        cleaned = []
        for value in values:
            if not isinstance(value, str) or not value.strip():
                raise ValidationError(
                    f"movie {movie_id!r} has an empty value at level {key!r}"
                )
            cleaned.append(value.strip())
        if cleaned:
            attributes[level] = frozenset(cleaned)

    for key in raw:
        if key not in ("id", "title", "release_year", "attributes"):
            ignored += 1
            logger.debug("movie %r: ignoring unknown field %r", movie_id, key)

    return MovieRecord(movie_id, title.strip(), year, attributes), ignored


def load_overrides(source: str | Path | IO) -> tuple[Override, ...]:
    """Load manual overrides from a catalog-shaped JSON file.

    The file holds partial records merged by id: only id and attributes are
    consulted; every (movie, level, values) triple becomes one Override.
    """
    text = _read_text(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"invalid overrides JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("movies"), list):
        raise ParseError('overrides document must be an object with a "movies" array')

    overrides: list[Override] = []
    for pos, raw in enumerate(doc["movies"]):
        if not isinstance(raw, dict) or not isinstance(raw.get("id"), str):
            raise ValidationError(f"override at position {pos} has no usable id")
        raw_attrs = raw.get("attributes", {})
        if not isinstance(raw_attrs, dict):
            raise ValidationError(f"override for {raw['id']!r} attributes must be an object")
        for key, values in raw_attrs.items():
            level = _INPUT_LEVELS.get(key)
            if level is None:
                raise ValidationError(
                    f"override for {raw['id']!r} targets unsupported level {key!r}"
                )
            if not isinstance(values, list) or not all(
                isinstance(v, str) and v.strip() for v in values
            ):
                raise ValidationError(
                    f"override for {raw['id']!r} level {key!r} must be a list of values"
                )
            overrides.append(Override(raw["id"], level, tuple(v.strip() for v in values)))
    return tuple(overrides)


def preprocess(catalog: Catalog, options: PreprocessOptions | None = None) -> Catalog:
    """Normalize a catalog: overrides, era derivation, filtering, pruning.

    Steps, in order:
      1. Apply manual overrides (attribute additions keyed by movie id).
      2. Derive each movie's era from its release year (replacing any
         existing era value; era is never taken from input).
      3. Apply per-level allowlists.
      4. Remove every (level, value) pair present in strictly fewer than
         min_tag_fraction of the movies. A movie whose era value is pruned
         also loses its release year, so that era-iff-year keeps holding and
         preprocessing stays idempotent.
      5. Drop movies left with no attributes at all.

    The operation is idempotent: preprocessing an already-normalized catalog
    returns an equal catalog.

    Raises:
        ValidationError: An override names an unknown movie, or no movie
            survives preprocessing.
    """
    if options is None:
        options = PreprocessOptions()

    records: dict[str, dict[Level, set[str]]] = {}
    years: dict[str, int | None] = {}
    titles: dict[str, str] = {}
    for movie in catalog.movies:
        records[movie.id] = {
            lvl: set(vals) for lvl, vals in movie.attributes.items() if lvl is not Level.ERA
        }
        years[movie.id] = movie.release_year
        titles[movie.id] = movie.title

    for override in options.overrides:
        if override.movie_id not in records:
            raise ValidationError(
                f"override references unknown movie id {override.movie_id!r}"
            )
        if override.level is Level.ERA:
            raise ValidationError("overrides may not set era values directly")
        records[override.movie_id].setdefault(override.level, set()).update(
            override.values
        )

    for movie_id, year in years.items():
        if year is not None:
            records[movie_id][Level.ERA] = {derive_era(year)}

    for level, allowed in options.value_allowlists.items():
        for attrs in records.values():
            if level in attrs:
                attrs[level] &= set(allowed)
                if not attrs[level]:
                    del attrs[level]

    coverage: dict[tuple[Level, str], int] = {}
    for attrs in records.values():
        for level, vals in attrs.items():
            for value in vals:
                coverage[(level, value)] = coverage.get((level, value), 0) + 1

    threshold = options.min_tag_fraction * len(records)
    rare = {key for key, count in coverage.items() if count < threshold}
    for movie_id, attrs in records.items():
        for level in list(attrs):
            attrs[level] = {v for v in attrs[level] if (level, v) not in rare}
            if not attrs[level]:
                if level is Level.ERA:
                    years[movie_id] = None
                del attrs[level]

    survivors: list[MovieRecord] = []
    dropped = 0
    for movie in catalog.movies:
        attrs = records[movie.id]
        if not attrs:
            dropped += 1
            logger.debug("dropping movie %r: no attributes survived", movie.id)
            continue
        survivors.append(
            MovieRecord(
                id=movie.id,
                title=titles[movie.id],
                release_year=years[movie.id],
                attributes={lvl: frozenset(vals) for lvl, vals in attrs.items()},
            )
        )
    if dropped:
        logger.warning("preprocessing dropped %d movie(s) with no attributes", dropped)
    if not survivors:
        raise ValidationError("empty catalog after preprocessing")
    return Catalog(movies=tuple(survivors), provenance=catalog.provenance)


def write_catalog(catalog: Catalog, sink: str | Path | IO) -> None:
    """Write a catalog as JSON in the documented file format.

    Era values are not written: they are always re-derived from release_year
    on the next load, so the file stays in the canonical input shape.
    """
    doc = {
        "provenance": catalog.provenance,
        "movies": [
            {
                "id": m.id,
                "title": m.title,
                "release_year": m.release_year,
                "attributes": {
                    lvl.value: sorted(m.values(lvl))
                    for lvl in Level
                    if lvl is not Level.ERA and m.values(lvl)
                },
            }
            for m in catalog.movies
        ],
    }
    text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        Path(sink).write_text(text, encoding="utf-8")


# Options used to load the packaged reference catalog. The shipped data has
# only the six gameplay levels and was curated for value coverage, so it
# takes a lighter prune than the raw-dump default: 0.03 keeps a value when it
# appears on at least 6 of the 200 movies.
REFERENCE_OPTIONS = PreprocessOptions(min_tag_fraction=0.03)


def load_reference_catalog(options: PreprocessOptions | None = None) -> Catalog:
    """Load and preprocess the packaged 200-movie reference catalog."""
    ref = resources.files("kg20q.data").joinpath("movies.json")
    with ref.open("r", encoding="utf-8") as fh:
        raw = load_catalog(fh)
    return preprocess(raw, options or REFERENCE_OPTIONS)
