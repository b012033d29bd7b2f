"""Simulated answerers, elimination baselines, warmup, and batch metrics."""

import pytest

from kg20q.arena import (
    FlipFirstYesAnswerer,
    GameRecord,
    SimAnswererConfig,
    SimulatedAnswerer,
    baseline1_select,
    baseline2_select,
    eliminate_candidates,
    forced_flip_experiment,
    play_baseline,
    play_game,
    popularity_weights,
    run_batch,
    sample_targets,
    simulate_answer,
    warmup,
)
from kg20q.belief import AnswerKind
from kg20q.catalog import Level, PreprocessOptions, preprocess
from kg20q.engine import GameConfig, Question
from kg20q.kgraph import Entity, LearnedStats, build_indices
from tests.conftest import catalog_from, movie


def ask(entity: Entity, ordinal: int = 1) -> Question:
    return Question(entity, "primary" if entity.level.is_primary else "secondary",
                    entity.question_text(), ordinal)


@pytest.fixture()
def era_catalog():
    """Twenty movies, five per decade, with spread genres and actors."""
    rows = []
    years = {1980: "a", 1990: "b", 2000: "c", 2010: "d"}
    i = 0
    for year, tag in years.items():
        for j in range(5):
            rows.append(
                movie(
                    f"m{i:02d}",
                    year=year + j,
                    genre=[f"genre-{tag}{j % 2}"],
                    actor=[f"actor-{j}"],
                )
            )
            i += 1
    return preprocess(catalog_from(rows), PreprocessOptions(min_tag_fraction=0.0))


class TestSimulateAnswer:
    def test_truthful_yes(self, small_indices):
        config = SimAnswererConfig(target_movie="m1")
        q = ask(Entity(Level.ACTOR, "A"))
        assert simulate_answer(config, q, small_indices) is AnswerKind.YES

    def test_truthful_no(self, small_indices):
        config = SimAnswererConfig(target_movie="m1")
        q = ask(Entity(Level.ACTOR, "C"))
        assert simulate_answer(config, q, small_indices) is AnswerKind.NO

    def test_certain_flip(self, small_indices):
        config = SimAnswererConfig(target_movie="m1", error_rate=1.0)
        q = ask(Entity(Level.ACTOR, "A"))
        assert simulate_answer(config, q, small_indices) is AnswerKind.NO

    def test_certain_maybe(self, small_indices):
        config = SimAnswererConfig(target_movie="m1", maybe_rate=1.0, error_rate=1.0)
        q = ask(Entity(Level.ACTOR, "A"))
        assert simulate_answer(config, q, small_indices) is AnswerKind.MAYBE

    def test_unknown_target_rejected(self, small_indices):
        with pytest.raises(KeyError):
            simulate_answer(
                SimAnswererConfig(target_movie="zz"), ask(Entity(Level.ACTOR, "A")),
                small_indices,
            )

    def test_noise_keyed_by_entity_not_order(self, small_indices):
        """The paired-design invariant: one answer per (seed, entity)."""
        config = SimAnswererConfig(target_movie="m1", error_rate=0.5, maybe_rate=0.2, seed=3)
        entities = [Entity(Level.ACTOR, v) for v in "ABC"] + [
            Entity(Level.GENRE, "action"), Entity(Level.ERA, "1990s")
        ]
        first = {e: simulate_answer(config, ask(e, 1), small_indices) for e in entities}
        for ordinal, e in enumerate(reversed(entities), start=1):
            assert simulate_answer(config, ask(e, ordinal), small_indices) is first[e]

    def test_invalid_rates_rejected(self):
        with pytest.raises(ValueError):
            SimAnswererConfig(target_movie="m", error_rate=1.5)
        with pytest.raises(ValueError):
            SimAnswererConfig(target_movie="m", maybe_rate=-0.1)


class TestBaseline1Selection:
    def test_halving_prefers_even_split(self):
        rows = [
            movie(f"m{i}", genre=(["even"] if i < 4 else []) + (["skew"] if i < 6 else []))
            for i in range(8)
        ]
        rows[7]["attributes"]["genre"] = ["filler"]
        catalog = preprocess(catalog_from(rows), PreprocessOptions(min_tag_fraction=0.0))
        indices = build_indices(catalog)
        chosen = baseline1_select(set(indices.forward), indices, set())
        assert chosen == Entity(Level.GENRE, "even")

    def test_tie_prefers_larger_coverage(self):
        rows = [
            movie(
                f"m{i}",
                genre=(["three"] if i < 3 else [])
                + (["five"] if i < 5 else [])
                + ["filler"],
            )
            for i in range(8)
        ]
        catalog = preprocess(catalog_from(rows), PreprocessOptions(min_tag_fraction=0.0))
        indices = build_indices(catalog)
        chosen = baseline1_select(set(indices.forward), indices, set())
        assert chosen == Entity(Level.GENRE, "five")

    def test_elimination_is_strict(self, small_indices):
        candidates = set(small_indices.forward)
        entity = Entity(Level.ACTOR, "A")
        yes = eliminate_candidates(candidates, entity, AnswerKind.YES, small_indices)
        no = eliminate_candidates(candidates, entity, AnswerKind.NO, small_indices)
        assert yes == small_indices.movies_for(entity)
        assert no == candidates - small_indices.movies_for(entity)

    def test_maybe_keeps_candidates(self, small_indices):
        candidates = set(small_indices.forward)
        entity = Entity(Level.ACTOR, "A")
        assert eliminate_candidates(candidates, entity, AnswerKind.MAYBE, small_indices) == candidates

    def test_flip_covering_target_is_unrecoverable(self, small_catalog, small_indices):
        answerer = FlipFirstYesAnswerer("m1", small_indices)
        record = play_baseline("baseline1", small_catalog, small_indices,
                               LearnedStats(), answerer)
        assert answerer.flipped
        assert record.target_eliminated
        assert not record.solved


class TestBaseline2Selection:
    def test_cold_start_reduces_to_coverage_ranking(self, era_catalog):
        indices = build_indices(era_catalog)
        chosen = baseline2_select(
            set(indices.forward), indices, LearnedStats(), None, set(), GameConfig()
        )
        assert chosen is not None
        best_cov = max(indices.coverage(e) for e in indices.all_entities())
        assert indices.coverage(chosen) == best_cov

    def test_birth_year_targets_matching_era_first(self, era_catalog):
        indices = build_indices(era_catalog)
        config = GameConfig()
        asked: set[Entity] = set()
        candidates = set(indices.forward)
        stats = LearnedStats()
        first_era = None
        for _ in range(10):
            entity = baseline2_select(candidates, indices, stats, 1975, asked, config)
            if entity is None:
                break
            if entity.level is Level.ERA:
                first_era = entity
                break
            asked.add(entity)
        assert first_era == Entity(Level.ERA, "1990s")


class TestWarmup:
    def test_zero_games_is_identity(self, small_catalog, small_indices):
        stats = LearnedStats()
        warmup(stats, small_catalog, small_indices, 0, seed=1)
        assert stats == LearnedStats()

    def test_records_at_most_n_games(self, reference_catalog, reference_indices):
        stats = warmup(LearnedStats(), reference_catalog, reference_indices, 10, seed=5)
        assert 0 < stats.games_recorded <= 10

    def test_same_seed_same_stats(self, reference_catalog, reference_indices):
        a = warmup(LearnedStats(), reference_catalog, reference_indices, 8, seed=3)
        b = warmup(LearnedStats(), reference_catalog, reference_indices, 8, seed=3)
        assert a == b


class TestRunBatch:
    def test_games_per_strategy(self, reference_catalog):
        metrics = run_batch(
            ["baseline1", "kg20q"], reference_catalog,
            n_movies=4, repeats=2, error_rate=0.0, maybe_rate=0.0, seed=3,
        )
        assert len(metrics.records_for("baseline1")) == 8
        assert len(metrics.records_for("kg20q")) == 8
        assert metrics.settings["games_per_strategy"] == 8

    def test_bucket_counts_partition_games(self, reference_catalog):
        metrics = run_batch(
            ["kg20q"], reference_catalog, 5, 2, 0.1, 0.05, seed=9,
        )
        buckets = metrics.buckets()["kg20q"]
        assert sum(buckets.values()) == 10

    def test_rank_cumulative_nondecreasing(self, reference_catalog):
        metrics = run_batch(
            ["baseline1", "baseline2", "kg20q"], reference_catalog,
            5, 2, 0.1, 0.05, seed=9,
        )
        for curve in metrics.rank_cumulative().values():
            assert curve == sorted(curve)

    def test_deterministic_reports(self, reference_catalog):
        import json

        a = run_batch(["baseline1", "kg20q"], reference_catalog, 4, 2, 0.1, 0.05, seed=31)
        b = run_batch(["baseline1", "kg20q"], reference_catalog, 4, 2, 0.1, 0.05, seed=31)
        assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)

    def test_aggregates_recomputable_from_records(self, reference_catalog):
        metrics = run_batch(["kg20q"], reference_catalog, 5, 2, 0.1, 0.05, seed=9)
        counts = {"<10": 0, "10-15": 0, "15-20": 0, "unsolved": 0}
        for record in metrics.records_for("kg20q"):
            if not record.solved:
                counts["unsolved"] += 1
            elif record.questions_to_solve < 10:
                counts["<10"] += 1
            elif record.questions_to_solve <= 15:
                counts["10-15"] += 1
            else:
                counts["15-20"] += 1
        assert metrics.buckets()["kg20q"] == counts

    def test_unknown_strategy_rejected(self, reference_catalog):
        with pytest.raises(ValueError):
            run_batch(["nope"], reference_catalog, 2, 1, 0.0, 0.0, seed=1)


class TestSampling:
    def test_popularity_weights_follow_rank(self, reference_catalog, reference_indices):
        weights = popularity_weights(reference_catalog, reference_indices)
        assert len(weights) == 200
        assert max(weights.values()) == 1.0
        assert min(weights.values()) > 0.0

    def test_sample_is_deterministic_and_distinct(self, reference_catalog, reference_indices):
        import random

        a = sample_targets(reference_catalog, reference_indices, 20, random.Random(5))
        b = sample_targets(reference_catalog, reference_indices, 20, random.Random(5))
        assert a == b
        assert len(set(a)) == 20


class TestForcedFlip:
    def test_kg_retains_baselines_eliminate(self, reference_catalog, reference_indices):
        stats = warmup(LearnedStats(), reference_catalog, reference_indices, 10, seed=5)
        kg = forced_flip_experiment(
            "kg20q", reference_catalog, reference_indices, stats, 25, seed=1
        )
        assert kg.games == 25
        assert kg.target_retained == 25
        for variant in ("baseline1", "baseline2"):
            res = forced_flip_experiment(
                variant, reference_catalog, reference_indices, stats, 25, seed=1
            )
            assert res.games == 25
            assert res.target_eliminated == 25


class TestBuckets:
    @pytest.mark.parametrize(
        "questions,expected",
        [(5, "<10"), (9, "<10"), (10, "10-15"), (15, "10-15"), (16, "15-20"), (20, "15-20")],
    )
    def test_bucket_edges(self, questions, expected):
        record = GameRecord(
            strategy="kg20q", target="m", solved=True, budget_used=questions,
            questions_to_solve=questions, first_attempt_rank=1,
        )
        assert record.bucket() == expected

    def test_unsolved_bucket(self):
        record = GameRecord(
            strategy="kg20q", target="m", solved=False, budget_used=20,
            questions_to_solve=None, first_attempt_rank=None,
        )
        assert record.bucket() == "unsolved"
