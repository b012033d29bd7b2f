"""Probability distribution over candidate movies.

Every operation returns a new distribution; snapshots can be shared freely.
Definitive answers reweight movies multiplicatively (exp(+a) for consistent
movies, exp(-a) for inconsistent ones) and renormalize, so a single wrong
answer shrinks a movie's probability without ever zeroing it. Only guess
rejection zeroes movies, redistributing their mass in equal additive shares
that preserve the pairwise differences of the survivors.

Summations run in the distribution's insertion order (catalog order), never
over hash-ordered sets, so results are bit-stable across processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

SUM_TOLERANCE = 1e-9


class AnswerKind(Enum):
    YES = "yes"
    NO = "no"
    MAYBE = "maybe"


@dataclass(frozen=True)
class AnswerSignal:
    """Which movies a definitive answer supports and which it contradicts.

    For yes/no answers the two sets are disjoint and cover the support; for
    maybe both are empty and the update is a no-op.
    """

    kind: AnswerKind
    yes_set: frozenset[str] = frozenset()
    no_set: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Belief:
    """Normalized probabilities keyed by movie id (insertion = catalog order)."""

    probs: dict[str, float]

    @property
    def support(self) -> tuple[str, ...]:
        return tuple(self.probs)

    def prob(self, movie_id: str) -> float:
        return self.probs[movie_id]

    def mass_on(self, movie_ids: Iterable[str]) -> float:
        # Sorted so the float accumulation order never depends on set order.
        return sum(self.probs[m] for m in sorted(movie_ids) if m in self.probs)

    def positive_ids(self) -> tuple[str, ...]:
        return tuple(m for m, p in self.probs.items() if p > 0.0)

    def __len__(self) -> int:
        return len(self.probs)


def init_uniform(movie_ids: Iterable[str]) -> Belief:
    """Equal probability for every movie."""
    ids = list(movie_ids)
    if not ids:
        raise ValueError("cannot build a belief over an empty movie set")
    p = 1.0 / len(ids)
    return Belief({m: p for m in ids})


def apply_answer(belief: Belief, signal: AnswerSignal, update_alpha: float = 1.0) -> Belief:
    """Reweight the distribution for one answer and renormalize.

    Maybe answers return the belief unchanged. For definitive answers every
    movie in the yes set is multiplied by exp(update_alpha) and every movie
    in the no set by exp(-update_alpha); zero-probability movies stay at
    exactly zero.
    """
    if update_alpha <= 0:
        raise ValueError(f"update_alpha must be positive, got {update_alpha}")
    if signal.kind is AnswerKind.MAYBE:
        return belief
    if signal.yes_set & signal.no_set:
        raise ValueError("yes_set and no_set overlap")

    up = math.exp(update_alpha)
    down = math.exp(-update_alpha)
    scaled: dict[str, float] = {}
    for movie_id, p in belief.probs.items():
        if p == 0.0:
            scaled[movie_id] = 0.0
        elif movie_id in signal.yes_set:
            scaled[movie_id] = p * up
        elif movie_id in signal.no_set:
            scaled[movie_id] = p * down
        else:
            scaled[movie_id] = p
    norm = sum(scaled.values())
    if norm <= 0.0:
        raise ValueError("answer update drove all probability mass to zero")
    return Belief({m: p / norm for m, p in scaled.items()})


def eliminate_and_redistribute(belief: Belief, rejected: Iterable[str]) -> Belief:
    """Zero the rejected movies and split their mass equally over the rest.

    The share is additive, so for any two surviving movies the difference of
    their probabilities is unchanged, and rejected movies can never reappear
    in a guess. Rejecting every positive-probability movie is an error.
    """
    rejected = frozenset(rejected)
    unknown = rejected - set(belief.probs)
    if unknown:
        raise ValueError(f"rejected ids not in support: {sorted(unknown)}")
    if not rejected:
        return belief

    # Movies already at zero were rejected earlier and stay at exactly zero:
    # shares go only to the still-live candidates.
    survivors = {m for m, p in belief.probs.items() if m not in rejected and p > 0.0}
    if not survivors:
        raise ValueError("cannot reject every movie with positive probability")

    freed = belief.mass_on(rejected)
    share = freed / len(survivors)
    out = {}
    for m, p in belief.probs.items():
        if m in survivors:
            out[m] = p + share
        elif m in rejected:
            out[m] = 0.0
        else:
            out[m] = p
    return Belief(out)


def top_k(belief: Belief, k: int) -> list[tuple[str, float]]:
    """The k highest-probability movies, descending; ties by ascending id."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    ranked = sorted(belief.probs.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:k]


def check_normalized(belief: Belief) -> bool:
    """True when all probabilities are >= 0 and they sum to 1 within 1e-9."""
    total = sum(belief.probs.values())
    return all(p >= 0.0 for p in belief.probs.values()) and abs(total - 1.0) <= SUM_TOLERANCE
