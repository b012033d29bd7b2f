"""Evaluation harness: simulated answerers, baseline strategies, batch runs.

Human answerers are replaced by simulators that answer from a target movie's
ground truth, optionally answering maybe or flipping a definitive answer.
Noise draws are keyed by (seed, target, repeat, entity) — never by question
order — so every strategy sees the same answer for the same query and
strategy comparisons are paired.

Two elimination baselines play the same budgeted protocol as the graph
engine: baseline 1 picks the question that splits the live candidate set
closest to half; baseline 2 ranks questions by learned popularity (plus a
birth-year era prior) and falls back to the halving criterion on ties. Both
eliminate candidates strictly, which is exactly the failure mode the
multiplicative engine avoids.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from .belief import AnswerKind
from .catalog import Catalog, Level
from .engine import (
    GameConfig,
    Phase,
    Question,
    make_guess,
    next_question,
    process_answer,
    process_guess_feedback,
    should_guess,
    start_session,
)
from .kgraph import Entity, IndexPair, LearnedStats, build_indices
from .scoring import (
    combined_score,
    era_log_likelihood,
    history_probability,
    level_probability,
)

STRATEGIES = ("baseline1", "baseline2", "kg20q")

BUCKET_LABELS = ("<10", "10-15", "15-20", "unsolved")

# Scale applied to the (max-shifted) era log-likelihoods when baseline 2
# folds them into its cross-level ranking.
ERA_PRIOR_SCALE = 0.01

# Baseline 2 skips questions that cannot meaningfully reduce the candidate
# set: an entity must cover at least this fraction of the live candidates.
B2_MIN_REDUCTION = 0.17


# ── simulated answerers ──────────────────────────────────────────────────────


@dataclass(frozen=True)
class SimAnswererConfig:
    """A simulated player: target movie, noise rates, optional birth year.

    A maybe is sampled first with maybe_rate; otherwise the remaining
    definitive answer is flipped with error_rate. The birth year is profile
    data the strategies may use (the era prior), never an answer input.
    """

    target_movie: str
    error_rate: float = 0.0
    maybe_rate: float = 0.0
    seed: int = 0
    birth_year: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.error_rate <= 1.0:
            raise ValueError(f"error_rate must be in [0, 1], got {self.error_rate}")
        if not 0.0 <= self.maybe_rate <= 1.0:
            raise ValueError(f"maybe_rate must be in [0, 1], got {self.maybe_rate}")


def _noise_draws(seed: int, entity: Entity) -> tuple[float, float]:
    """Two stable uniforms in [0, 1) keyed by seed and entity identity."""
    key = f"{seed}|{entity.level.value}|{entity.value}".encode("utf-8")
    digest = hashlib.sha256(key).digest()
    a = int.from_bytes(digest[:8], "big") / 2.0**64
    b = int.from_bytes(digest[8:16], "big") / 2.0**64
    return a, b


def simulate_answer(
    config: SimAnswererConfig, question: Question, indices: IndexPair
) -> AnswerKind:
    """Answer one question from the target movie's ground truth plus noise."""
    if config.target_movie not in indices.forward:
        raise KeyError(f"unknown target movie {config.target_movie!r}")
    truth = question.entity in indices.forward[config.target_movie]
    u_maybe, u_flip = _noise_draws(config.seed, question.entity)
    if u_maybe < config.maybe_rate:
        return AnswerKind.MAYBE
    if u_flip < config.error_rate:
        truth = not truth
    return AnswerKind.YES if truth else AnswerKind.NO


class SimulatedAnswerer:
    """Callable answerer over one target movie; accepts guesses truthfully."""

    def __init__(self, config: SimAnswererConfig, indices: IndexPair) -> None:
        if config.target_movie not in indices.forward:
            raise KeyError(f"unknown target movie {config.target_movie!r}")
        self.config = config
        self.indices = indices

    @property
    def target(self) -> str:
        return self.config.target_movie

    def answer(self, question: Question) -> AnswerKind:
        return simulate_answer(self.config, question, self.indices)

    def accepts(self, guessed_ids: list[str]) -> str | None:
        """The confirmed movie id when the target is among the guesses."""
        return self.target if self.target in guessed_ids else None


class FlipFirstYesAnswerer(SimulatedAnswerer):
    """Truthful except for one forced error.

    The first question whose ground truth is yes (an entity covering the
    target) is answered no; everything else is answered truthfully. Whether
    the flip actually fired is recorded, since a game may end before any
    covering question is asked.
    """

    def __init__(self, target_movie: str, indices: IndexPair) -> None:
        super().__init__(SimAnswererConfig(target_movie), indices)
        self.flipped = False

    def answer(self, question: Question) -> AnswerKind:
        truth = question.entity in self.indices.forward[self.target]
        if truth and not self.flipped:
            self.flipped = True
            return AnswerKind.NO
        return AnswerKind.YES if truth else AnswerKind.NO


# ── per-game records ─────────────────────────────────────────────────────────


@dataclass(frozen=True)
class GameRecord:
    """Outcome of one simulated game.

    questions_to_solve counts questions only; guess attempts consume budget
    (tracked in budget_used) but are evaluated as attempts, not questions.
    """

    strategy: str
    target: str
    solved: bool
    budget_used: int
    questions_to_solve: int | None
    first_attempt_rank: int | None
    final_target_prob: float | None = None  # kg20q only
    target_eliminated: bool | None = None  # baselines only

    def bucket(self) -> str:
        if not self.solved:
            return "unsolved"
        assert self.questions_to_solve is not None
        if self.questions_to_solve < 10:
            return "<10"
        if self.questions_to_solve <= 15:
            return "10-15"
        return "15-20"


def _first_attempt_rank(first_guess: list[str] | None, target: str) -> int | None:
    if first_guess is None or target not in first_guess:
        return None
    return first_guess.index(target) + 1


# ── graph-engine strategy ────────────────────────────────────────────────────


def play_kg20q(
    catalog: Catalog,
    indices: IndexPair,
    stats: LearnedStats,
    answerer: SimulatedAnswerer,
    config: GameConfig | None = None,
    birth_year: int | None = None,
    learn: bool = False,
) -> GameRecord:
    """Play one full engine game against an answerer.

    With learn=False the shared stats are read but never written (batch games
    run on an immutable snapshot); with learn=True a confirmed solve records
    an election into `stats`.
    """
    config = config or GameConfig()
    write_stats = stats if learn else stats.copy()
    state = start_session(catalog, indices, stats, config, birth_year)
    first_guess: list[str] | None = None
    questions_asked = 0

    while state.phase is Phase.ASKING:
        if should_guess(state, indices, stats):
            state, guesses = make_guess(state)
            guessed_ids = [g.movie_id for g in guesses]
            if first_guess is None:
                first_guess = guessed_ids
            confirmed = answerer.accepts(guessed_ids)
            state = process_guess_feedback(
                state, confirmed is not None, confirmed, write_stats, indices
            )
        else:
            question = next_question(state, indices, stats)
            state = process_answer(state, question, answerer.answer(question), indices)
            questions_asked += 1

    solved = state.phase is Phase.SOLVED
    return GameRecord(
        strategy="kg20q",
        target=answerer.target,
        solved=solved,
        budget_used=state.questions_used,
        questions_to_solve=questions_asked if solved else None,
        first_attempt_rank=_first_attempt_rank(first_guess, answerer.target),
        final_target_prob=state.belief.prob(answerer.target),
    )


# ── elimination baselines ────────────────────────────────────────────────────


def _coverage_in(entity: Entity, candidates: set[str], indices: IndexPair) -> int:
    return len(indices.movies_for(entity) & candidates)


def baseline1_select(
    candidates: set[str], indices: IndexPair, asked: set[Entity]
) -> Entity | None:
    """The unasked entity splitting the candidates closest to half.

    Only entities that actually discriminate (cover some but not all of the
    candidates) qualify. Ties prefer the larger split, then the
    lexicographically first entity. Returns None when nothing discriminates.
    """
    half = len(candidates) / 2.0
    best_key: tuple[float, int, tuple[str, str]] | None = None
    best: Entity | None = None
    for entity in indices.all_entities():
        if entity in asked:
            continue
        cov = _coverage_in(entity, candidates, indices)
        if cov == 0 or cov == len(candidates):
            continue
        key = (abs(cov - half), -cov, entity.sort_key)
        if best_key is None or key < best_key:
            best_key, best = key, entity
    return best


def _global_history_shares(
    indices: IndexPair, stats: LearnedStats, smoothing: float
) -> dict[Entity, float]:
    """Election shares normalized over every entity in the graph.

    Per-level shares are not comparable across levels (a level with few
    values hands each of them a big share by construction), so rankings that
    mix levels use this global normalization instead.
    """
    entities = indices.all_entities()
    denom = sum(stats.election_count(e) + smoothing for e in entities)
    return {e: (stats.election_count(e) + smoothing) / denom for e in entities}


def baseline2_select(
    candidates: set[str],
    indices: IndexPair,
    stats: LearnedStats,
    birth_year: int | None,
    asked: set[Entity],
    config: GameConfig,
) -> Entity | None:
    """The unasked discriminating entity with the best learned score.

    Entities rank by the combined level probability and global election
    share, plus the birth-year era prior for era entities; ties fall back to
    the halving criterion and then lexicographic order.
    """
    est = config.estimator
    shares = _global_history_shares(indices, stats, est.smoothing)
    # The era prior is a log-likelihood on a different scale than the
    # probabilities, so it is shifted by its maximum and scaled down: the
    # player's most plausible decade competes on its plain score, neighbours
    # are discouraged but still askable. Mixing the raw values in would bury
    # every era question outright.
    era_prior: dict[Entity, float] = {}
    if birth_year is not None:
        eras = indices.level_entities(Level.ERA)
        lls = {e: era_log_likelihood(e.value, birth_year, est) for e in eras}
        top = max(lls.values(), default=0.0)
        era_prior = {e: ERA_PRIOR_SCALE * (ll - top) for e, ll in lls.items()}

    half = len(candidates) / 2.0
    floor = max(1, int(B2_MIN_REDUCTION * len(candidates)))
    best_key: tuple[float, float, int, tuple[str, str]] | None = None
    best: Entity | None = None
    for entity in indices.all_entities():
        if entity in asked:
            continue
        cov = _coverage_in(entity, candidates, indices)
        if cov < floor or cov == len(candidates):
            continue
        score = combined_score(
            level_probability(entity, indices), shares[entity], est
        )
        score += era_prior.get(entity, 0.0)
        key = (-score, abs(cov - half), -cov, entity.sort_key)
        if best_key is None or key < best_key:
            best_key, best = key, entity
    return best


def eliminate_candidates(
    candidates: set[str], entity: Entity, answer: AnswerKind, indices: IndexPair
) -> set[str]:
    """Strict binary elimination; maybe leaves the set unchanged."""
    if answer is AnswerKind.MAYBE:
        return candidates
    covered = indices.movies_for(entity)
    if answer is AnswerKind.YES:
        return candidates & covered
    return candidates - covered


def _popularity(movie_id: str, indices: IndexPair) -> int:
    return sum(indices.coverage(e) for e in indices.forward[movie_id])


def _baseline_guess_ranking(
    candidates: set[str],
    indices: IndexPair,
    stats: LearnedStats | None,
    config: GameConfig,
) -> list[str]:
    """Rank candidates for guessing: coverage popularity (baseline 1) or
    learned combined scores (baseline 2, when stats are given)."""
    if stats is None:
        return sorted(candidates, key=lambda m: (-_popularity(m, indices), m))
    est = config.estimator
    shares = _global_history_shares(indices, stats, est.smoothing)

    def learned_score(movie_id: str) -> float:
        total = 0.0
        for entity in sorted(indices.forward[movie_id], key=lambda e: e.sort_key):
            total += combined_score(
                level_probability(entity, indices), shares[entity], est
            )
        return total

    return sorted(candidates, key=lambda m: (-learned_score(m), m))


def play_baseline(
    variant: str,
    catalog: Catalog,
    indices: IndexPair,
    stats: LearnedStats,
    answerer: SimulatedAnswerer,
    config: GameConfig | None = None,
    birth_year: int | None = None,
) -> GameRecord:
    """Play one elimination-baseline game under the shared budget protocol.

    Questions and guesses each consume one of the max_questions budget units,
    and the final unit is always a guess. The game is unsolved once the
    candidate set no longer contains the target (strict elimination has no
    recovery) or the budget runs out.
    """
    if variant not in ("baseline1", "baseline2"):
        raise ValueError(f"unknown baseline variant {variant!r}")
    config = config or GameConfig()
    candidates: set[str] = set(indices.forward)
    asked: set[Entity] = set()
    units = 0
    questions_asked = 0
    first_guess: list[str] | None = None
    solved = False

    while units < config.max_questions and candidates:
        entity: Entity | None = None
        if len(candidates) > config.guess_size and units < config.max_questions - 1:
            if variant == "baseline1":
                entity = baseline1_select(candidates, indices, asked)
            else:
                entity = baseline2_select(
                    candidates, indices, stats, birth_year, asked, config
                )
        if entity is None:
            ranked = _baseline_guess_ranking(
                candidates,
                indices,
                stats if variant == "baseline2" else None,
                config,
            )
            guessed = ranked[: config.guess_size]
            units += 1
            if first_guess is None:
                first_guess = guessed
            confirmed = answerer.accepts(guessed)
            if confirmed is not None:
                solved = True
                break
            candidates -= set(guessed)
        else:
            question = Question(
                entity=entity,
                layer="primary" if entity.level.is_primary else "secondary",
                text=entity.question_text(),
                ordinal=units + 1,
            )
            units += 1
            questions_asked += 1
            asked.add(entity)
            answer = answerer.answer(question)
            candidates = eliminate_candidates(candidates, entity, answer, indices)

    return GameRecord(
        strategy=variant,
        target=answerer.target,
        solved=solved,
        budget_used=units,
        questions_to_solve=questions_asked if solved else None,
        first_attempt_rank=_first_attempt_rank(first_guess, answerer.target),
        target_eliminated=answerer.target not in candidates,
    )


def play_game(
    strategy: str,
    catalog: Catalog,
    indices: IndexPair,
    stats: LearnedStats,
    answerer: SimulatedAnswerer,
    config: GameConfig | None = None,
    birth_year: int | None = None,
    learn: bool = False,
) -> GameRecord:
    """Play one game of any strategy through the shared answerer interface."""
    if strategy == "kg20q":
        return play_kg20q(
            catalog, indices, stats, answerer, config, birth_year, learn=learn
        )
    return play_baseline(
        strategy, catalog, indices, stats, answerer, config, birth_year
    )


# ── warmup and batches ───────────────────────────────────────────────────────


def warmup(
    stats: LearnedStats,
    catalog: Catalog,
    indices: IndexPair,
    n_games: int,
    seed: int,
    config: GameConfig | None = None,
) -> LearnedStats:
    """Pre-train stats by playing zero-error engine games on random movies.

    Targets are sampled uniformly with the given seed; each solved game
    records an election, so the stats evolve across the warmup exactly as
    they would across real games.
    """
    if n_games < 0:
        raise ValueError(f"n_games must be >= 0, got {n_games}")
    rng = random.Random(seed)
    ids = [m.id for m in catalog.movies]
    for _ in range(n_games):
        target = rng.choice(ids)
        answerer = SimulatedAnswerer(SimAnswererConfig(target_movie=target), indices)
        play_kg20q(catalog, indices, stats, answerer, config, learn=True)
    return stats


def popularity_weights(
    catalog: Catalog, indices: IndexPair, zipf_exponent: float = 2.0
) -> dict[str, float]:
    """Target-draw weights standing in for human movie choice.

    Movies are ranked by how widely shared their attribute values are (total
    coverage of their entities) and weighted Zipf-style by rank: real players
    overwhelmingly think of the same few famous movies, not a uniform draw.
    """
    ranked = sorted(
        catalog.movies, key=lambda m: (-_popularity(m.id, indices), m.id)
    )
    return {
        m.id: 1.0 / (rank + 1) ** zipf_exponent for rank, m in enumerate(ranked)
    }


def sample_targets(
    catalog: Catalog,
    indices: IndexPair,
    n_movies: int,
    rng: random.Random,
    popularity_biased: bool = True,
) -> list[str]:
    """Sample distinct target movies, by default popularity-weighted."""
    if n_movies > len(catalog.movies):
        raise ValueError(
            f"cannot sample {n_movies} targets from {len(catalog.movies)} movies"
        )
    pool = [m.id for m in catalog.movies]
    if not popularity_biased:
        return rng.sample(pool, n_movies)
    weights = popularity_weights(catalog, indices)
    chosen: list[str] = []
    remaining = list(pool)
    for _ in range(n_movies):
        total = sum(weights[m] for m in remaining)
        x = rng.random() * total
        acc = 0.0
        pick = remaining[-1]
        for m in remaining:
            acc += weights[m]
            if x < acc:
                pick = m
                break
        chosen.append(pick)
        remaining.remove(pick)
    return chosen


def _game_noise_seed(seed: int, target: str, repeat: int) -> int:
    digest = hashlib.sha256(f"{seed}|{target}|{repeat}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _simulated_birth_year(
    catalog: Catalog, target: str, noise_seed: int
) -> int | None:
    """A player birth year consistent with their chosen movie.

    People overwhelmingly pick movies from their late teens and twenties,
    which is exactly the assumption behind the era prior, so the simulated
    player is born about twenty years before the target's release, give or
    take a few years.
    """
    year = catalog.movie(target).release_year
    if year is None:
        return None
    jitter = noise_seed % 9 - 4  # deterministic in [-4, 4]
    return year - 20 + jitter


@dataclass
class RunMetrics:
    """Per-game records plus Table-3/Table-4 style aggregates."""

    strategies: tuple[str, ...]
    games: list[GameRecord]
    settings: dict = field(default_factory=dict)

    def records_for(self, strategy: str) -> list[GameRecord]:
        return [g for g in self.games if g.strategy == strategy]

    def buckets(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for strategy in self.strategies:
            counts = {label: 0 for label in BUCKET_LABELS}
            for record in self.records_for(strategy):
                counts[record.bucket()] += 1
            out[strategy] = counts
        return out

    def rank_cumulative(self) -> dict[str, list[float]]:
        """P(correct in first attempt within rank n), n = 1..5."""
        out: dict[str, list[float]] = {}
        for strategy in self.strategies:
            records = self.records_for(strategy)
            total = len(records)
            curve = []
            for rank in range(1, 6):
                hits = sum(
                    1
                    for r in records
                    if r.first_attempt_rank is not None and r.first_attempt_rank <= rank
                )
                curve.append(hits / total if total else 0.0)
            out[strategy] = curve
        return out

    def to_dict(self) -> dict:
        return {
            "settings": self.settings,
            "strategies": list(self.strategies),
            "buckets": self.buckets(),
            "rank_cumulative": self.rank_cumulative(),
            "games": [
                {
                    "strategy": g.strategy,
                    "target": g.target,
                    "solved": g.solved,
                    "budget_used": g.budget_used,
                    "questions_to_solve": g.questions_to_solve,
                    "first_attempt_rank": g.first_attempt_rank,
                }
                for g in self.games
            ],
        }


def run_batch(
    strategies: list[str],
    catalog: Catalog,
    n_movies: int,
    repeats: int,
    error_rate: float,
    maybe_rate: float,
    seed: int,
    stats: LearnedStats | None = None,
    config: GameConfig | None = None,
    popularity_biased: bool = True,
) -> RunMetrics:
    """Run a paired batch: every strategy plays the same games.

    Targets are sampled once; each (target, repeat) pair defines one noise
    realization shared by all strategies. Stats are treated as an immutable
    snapshot: batch games never learn.
    """
    for strategy in strategies:
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}")
    config = config or GameConfig()
    stats = stats if stats is not None else LearnedStats()
    indices = build_indices(catalog)

    rng = random.Random(seed)
    targets = sample_targets(catalog, indices, n_movies, rng, popularity_biased)

    games: list[GameRecord] = []
    for target in targets:
        for repeat in range(repeats):
            noise_seed = _game_noise_seed(seed, target, repeat)
            birth_year = _simulated_birth_year(catalog, target, noise_seed)
            for strategy in strategies:
                answerer = SimulatedAnswerer(
                    SimAnswererConfig(
                        target_movie=target,
                        error_rate=error_rate,
                        maybe_rate=maybe_rate,
                        seed=noise_seed,
                        birth_year=birth_year,
                    ),
                    indices,
                )
                games.append(
                    play_game(
                        strategy,
                        catalog,
                        indices,
                        stats,
                        answerer,
                        config,
                        birth_year=birth_year,
                    )
                )
    return RunMetrics(
        strategies=tuple(strategies),
        games=games,
        settings={
            "n_movies": n_movies,
            "repeats": repeats,
            "error_rate": error_rate,
            "maybe_rate": maybe_rate,
            "seed": seed,
            "popularity_biased": popularity_biased,
            "games_per_strategy": n_movies * repeats,
        },
    )


# ── fault-tolerance experiment ───────────────────────────────────────────────


@dataclass(frozen=True)
class FlipExperimentResult:
    strategy: str
    games: int
    target_retained: int  # kg20q: final target probability > 0
    target_eliminated: int  # baselines: target outside final candidates


def forced_flip_experiment(
    strategy: str,
    catalog: Catalog,
    indices: IndexPair,
    stats: LearnedStats,
    n_games: int,
    seed: int,
    config: GameConfig | None = None,
) -> FlipExperimentResult:
    """Games with exactly one flipped answer on an entity covering the target.

    Each game uses an answerer that answers the first covering question with
    no and everything else truthfully. Games that finish before any covering
    question is asked are discarded (the forced error never happened), and
    new targets are drawn until n_games qualifying games are collected.
    """
    rng = random.Random(seed)
    ids = [m.id for m in catalog.movies]
    retained = 0
    eliminated = 0
    qualifying = 0
    attempts = 0
    max_attempts = max(20 * n_games, 100)
    while qualifying < n_games and attempts < max_attempts:
        attempts += 1
        target = rng.choice(ids)
        answerer = FlipFirstYesAnswerer(target, indices)
        record = play_game(strategy, catalog, indices, stats, answerer, config)
        if not answerer.flipped:
            continue
        qualifying += 1
        if record.final_target_prob is not None and record.final_target_prob > 0.0:
            retained += 1
        if record.target_eliminated:
            eliminated += 1
    return FlipExperimentResult(
        strategy=strategy,
        games=qualifying,
        target_retained=retained,
        target_eliminated=eliminated,
    )
