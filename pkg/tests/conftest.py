"""Shared fixtures: a tiny hand-built catalog and the packaged reference one."""

from __future__ import annotations

import io
import json

import pytest

from kg20q.catalog import Catalog, load_catalog, load_reference_catalog, preprocess
from kg20q.kgraph import IndexPair, build_indices


def catalog_from(movies: list[dict], provenance: str = "test") -> Catalog:
    """Build a catalog through the real parser from compact movie dicts."""
    doc = {"provenance": provenance, "movies": movies}
    return load_catalog(io.StringIO(json.dumps(doc)))


def movie(mid: str, title: str | None = None, year: int | None = None, **levels) -> dict:
    """Compact movie-record builder; levels are genre=[...], actor=[...], etc."""
    return {
        "id": mid,
        "title": title or mid.replace("-", " ").title(),
        "release_year": year,
        "attributes": {k: v for k, v in levels.items()},
    }


@pytest.fixture(scope="session")
def reference_catalog() -> Catalog:
    return load_reference_catalog()


@pytest.fixture(scope="session")
def reference_indices(reference_catalog) -> IndexPair:
    return build_indices(reference_catalog)


@pytest.fixture()
def small_catalog() -> Catalog:
    """Eight movies over two decades; no preprocessing applied."""
    raw = catalog_from(
        [
            movie("m1", year=1994, genre=["action"], actor=["A", "B"], director=["D1"]),
            movie("m2", year=1995, genre=["action"], actor=["A"], director=["D2"]),
            movie("m3", year=1996, genre=["romance"], actor=["B"], director=["D1"]),
            movie("m4", year=1997, genre=["romance"], actor=["C"], director=["D2"]),
            movie("m5", year=2003, genre=["action"], actor=["C"], director=["D1"]),
            movie("m6", year=2004, genre=["comedy"], actor=["A", "C"], director=["D2"]),
            movie("m7", year=2005, genre=["comedy"], actor=["B"], director=["D1"]),
            movie("m8", year=2006, genre=["romance"], actor=["A"], director=["D2"]),
        ]
    )
    from kg20q.catalog import PreprocessOptions

    return preprocess(raw, PreprocessOptions(min_tag_fraction=0.0))


@pytest.fixture()
def small_indices(small_catalog) -> IndexPair:
    return build_indices(small_catalog)
