"""Entity likelihood scoring.

An entity's score combines a static level probability (its coverage fraction)
with a learned history probability (smoothed election counts), plus two
optional additive terms: a birth-year era prior for era entities, and the
current-run belief mass under the entity for secondary-layer entities.
Scores are only ever compared within a single level (or within the secondary
layer), so the era prior being a log-likelihood while the rest are plain
probabilities is fine: it just reorders era entities among themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .belief import Belief
from .catalog import Level, era_start_year
from .kgraph import Entity, IndexPair, LearnedStats

ERA_YEARS = 10  # an era is one decade


@dataclass(frozen=True)
class EstimatorConfig:
    """Weights and constants of the likelihood estimator.

    alpha: weight of the level probability against the history probability.
    beta: weight of the current-run belief mass term (secondary layer).
    sigma: spread in years of the era prior.
    mean_offset: years added to the player's birth year to center the prior.
    smoothing: add-one style constant for the history probability, so that
        cold-start levels are uniform and never divide by zero.
    """

    alpha: float = 0.2
    beta: float = 1.0
    sigma: float = 10.0
    mean_offset: int = 20
    smoothing: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.smoothing <= 0:
            raise ValueError(f"smoothing must be > 0, got {self.smoothing}")


@dataclass(frozen=True)
class ScoreBreakdown:
    """A scored entity with each contributing term kept visible."""

    entity: Entity
    level_prob: float
    history_prob: float
    combined: float
    era_term: float = 0.0
    run_mass_term: float = 0.0

    @property
    def total(self) -> float:
        return self.combined + self.era_term + self.run_mass_term


def level_probability(entity: Entity, indices: IndexPair) -> float:
    """Fraction of movies carrying the entity; 0.0 for absent entities."""
    if indices.n_movies == 0:
        return 0.0
    return indices.coverage(entity) / indices.n_movies


def history_probability(
    entity: Entity,
    stats: LearnedStats,
    level_entities: Iterable[Entity],
    smoothing: float = 1.0,
) -> float:
    """Smoothed share of the entity's elections among its level's entities.

    Values over a level sum to exactly 1: each entity contributes
    (elections + smoothing) / sum over the level of the same quantity.
    """
    entities = list(level_entities)
    if not entities:
        raise ValueError("history_probability needs a non-empty entity set")
    if entity not in entities:
        raise ValueError(f"entity {entity} is not among its level's entities")
    if any(e.level is not entity.level for e in entities):
        raise ValueError("level_entities must all share the entity's level")
    denom = sum(stats.election_count(e) + smoothing for e in entities)
    return (stats.election_count(entity) + smoothing) / denom


def combined_score(level_prob: float, history_prob: float, config: EstimatorConfig) -> float:
    """Convex combination of level and history probabilities."""
    return config.alpha * level_prob + (1.0 - config.alpha) * history_prob


def era_log_likelihood(
    era: str, birth_year: int | None, config: EstimatorConfig
) -> float:
    """Log-likelihood of an era under a Gaussian prior on the player's taste.

    The prior is centered mean_offset years after the player's birth year
    with spread sigma; the returned value sums the log density over the
    era's ten calendar years. Returns 0.0 when no birth year is known.
    """
    start = era_start_year(era)  # validates the label
    if birth_year is None:
        return 0.0
    mu = birth_year + config.mean_offset
    const = math.log(1.0 / (config.sigma * math.sqrt(2.0 * math.pi)))
    two_sigma_sq = 2.0 * config.sigma * config.sigma
    return sum(
        const - (year - mu) ** 2 / two_sigma_sq
        for year in range(start, start + ERA_YEARS)
    )


def primary_score(
    entity: Entity,
    indices: IndexPair,
    stats: LearnedStats,
    birth_year: int | None,
    config: EstimatorConfig,
) -> ScoreBreakdown:
    """Score a primary-layer entity: combined probability plus era prior.

    The era term is nonzero only for era entities and only when a birth year
    is known; genre and subject entities score on the combined term alone.
    """
    if not entity.level.is_primary:
        raise ValueError(f"{entity} is not a primary-layer entity")
    lp = level_probability(entity, indices)
    hp = history_probability(
        entity, stats, indices.level_entities(entity.level), config.smoothing
    )
    era_term = 0.0
    if entity.level is Level.ERA and birth_year is not None:
        era_term = era_log_likelihood(entity.value, birth_year, config)
    return ScoreBreakdown(
        entity=entity,
        level_prob=lp,
        history_prob=hp,
        combined=combined_score(lp, hp, config),
        era_term=era_term,
    )


def secondary_score(
    entity: Entity,
    indices: IndexPair,
    stats: LearnedStats,
    belief: Belief,
    config: EstimatorConfig,
) -> ScoreBreakdown:
    """Score a secondary-layer entity: combined probability plus run mass.

    The run-mass term is beta times the total belief currently sitting on
    the movies covered by the entity, so questions chase where the
    probability mass has concentrated during this game.
    """
    if entity.level.is_primary:
        raise ValueError(f"{entity} is not a secondary-layer entity")
    lp = level_probability(entity, indices)
    hp = history_probability(
        entity, stats, indices.level_entities(entity.level), config.smoothing
    )
    covered = belief.mass_on(indices.movies_for(entity))
    return ScoreBreakdown(
        entity=entity,
        level_prob=lp,
        history_prob=hp,
        combined=combined_score(lp, hp, config),
        run_mass_term=config.beta * covered,
    )
