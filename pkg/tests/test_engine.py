"""Session state machine: selection policy, updates, guesses, tracing."""

import dataclasses
import math
import random

import pytest

from kg20q.belief import Belief
from kg20q.catalog import Level, PreprocessOptions, preprocess
from kg20q.engine import (
    GameConfig,
    GuessEvent,
    NoAskableEntityError,
    Phase,
    Question,
    QuestionEvent,
    SessionError,
    make_guess,
    next_question,
    process_answer,
    process_guess_feedback,
    should_guess,
    start_session,
    trace,
)
from kg20q.kgraph import Entity, LearnedStats, build_indices
from tests.conftest import catalog_from, movie

E2 = math.exp(2.0)


def era_skewed_catalog():
    """200 movies with era coverages 80/60/40/20 and a shared genre/subject."""
    rows = []
    for i in range(200):
        if i < 80:
            year = 1995
        elif i < 140:
            year = 2005
        elif i < 180:
            year = 1985
        else:
            year = 1975
        rows.append(
            movie(f"m{i:03d}", year=year, genre=["drama"], subject=["love story"])
        )
    raw = catalog_from(rows)
    return preprocess(raw, PreprocessOptions(min_tag_fraction=0.0))


def fresh(catalog, indices, **kwargs):
    return start_session(catalog, indices, LearnedStats(), **kwargs)


class TestStartSession:
    def test_uniform_belief_at_200(self, reference_catalog, reference_indices):
        state = fresh(reference_catalog, reference_indices)
        assert state.phase is Phase.ASKING
        assert state.questions_used == 0
        assert state.belief.prob(reference_catalog.movies[0].id) == pytest.approx(0.005)

    def test_birth_year_recorded(self, small_catalog, small_indices):
        state = fresh(small_catalog, small_indices, birth_year=1975)
        assert state.birth_year == 1975

    def test_sessions_are_independent(self, small_catalog, small_indices):
        a = fresh(small_catalog, small_indices)
        b = fresh(small_catalog, small_indices)
        q = next_question(a, small_indices, LearnedStats())
        a2 = process_answer(a, q, "yes", small_indices)
        assert b.questions_used == 0
        assert b.belief.probs == a.belief.probs
        assert a2 is not a


class TestQuestionSelection:
    def test_cold_start_asks_biggest_era(self):
        catalog = era_skewed_catalog()
        indices = build_indices(catalog)
        state = fresh(catalog, indices)
        q = next_question(state, indices, LearnedStats())
        assert q.text == "Is your movie from the 1990s era?"
        assert q.layer == "primary"
        assert q.ordinal == 1

    def test_primary_levels_lead_and_resolve_in_order(
        self, reference_catalog, reference_indices
    ):
        """Era questions come first and repeat until the decade loses mass,
        then the later primary levels; never backwards."""
        state = fresh(reference_catalog, reference_indices)
        stats = LearnedStats()
        levels = []
        while not should_guess(state, reference_indices, stats) and len(levels) < 12:
            q = next_question(state, reference_indices, stats)
            levels.append(q.entity.level)
            state = process_answer(state, q, "no", reference_indices)
        assert levels[0] is Level.ERA
        primary = [lvl for lvl in levels if lvl.is_primary]
        # Broad-to-specific: era visits precede genre visits precede subject.
        assert primary == sorted(primary, key=list(Level).index)

    def test_asked_entity_never_returned(self, reference_catalog, reference_indices):
        state = fresh(reference_catalog, reference_indices)
        stats = LearnedStats()
        seen = set()
        while not should_guess(state, reference_indices, stats) and len(seen) < 12:
            q = next_question(state, reference_indices, stats)
            assert q.entity not in seen
            seen.add(q.entity)
            state = process_answer(state, q, "no", reference_indices)
        assert len(seen) >= 5

    def test_secondary_chases_belief_mass(self):
        rows = [
            movie(f"kj{i}", year=1995, director=["Karan Johar"]) for i in range(5)
        ] + [
            movie(f"nc{i}", year=2005, director=["Nobody Cares"]) for i in range(5)
        ]
        catalog = preprocess(catalog_from(rows), PreprocessOptions(min_tag_fraction=0.0))
        indices = build_indices(catalog)
        state = fresh(catalog, indices)
        q1 = next_question(state, indices, LearnedStats())
        assert q1.entity.level is Level.ERA
        answer = "yes" if q1.entity.value == "1990s" else "no"
        state = process_answer(state, q1, answer, indices)
        assert state.belief.mass_on([f"kj{i}" for i in range(5)]) > 0.6
        q2 = next_question(state, indices, LearnedStats())
        assert q2.layer == "secondary"
        assert q2.entity == Entity(Level.DIRECTOR, "Karan Johar")

    def test_switch_to_secondary_is_permanent(self, reference_catalog, reference_indices):
        state = fresh(reference_catalog, reference_indices)
        stats = LearnedStats()
        layers = []
        while not should_guess(state, reference_indices, stats) and len(layers) < 14:
            q = next_question(state, reference_indices, stats)
            layers.append(q.layer)
            state = process_answer(state, q, "no", reference_indices)
        assert "secondary" in layers
        first_secondary = layers.index("secondary")
        assert all(layer == "secondary" for layer in layers[first_secondary:])


class TestProcessAnswer:
    def test_maybe_keeps_belief_spends_budget(self, small_catalog, small_indices):
        state = fresh(small_catalog, small_indices)
        q = next_question(state, small_indices, LearnedStats())
        state2 = process_answer(state, q, "maybe", small_indices)
        assert state2.belief.probs == state.belief.probs
        assert state2.questions_used == 1
        assert state2.asked == frozenset({q.entity})

    def test_yes_boosts_covered_by_e_squared(self, small_catalog, small_indices):
        state = fresh(small_catalog, small_indices)
        q = next_question(state, small_indices, LearnedStats())
        covered = small_indices.movies_for(q.entity)
        inside = next(iter(covered))
        outside = next(m for m in state.belief.probs if m not in covered)
        state2 = process_answer(state, q, "yes", small_indices)
        ratio_before = state.belief.prob(inside) / state.belief.prob(outside)
        ratio_after = state2.belief.prob(inside) / state2.belief.prob(outside)
        assert ratio_after == pytest.approx(ratio_before * E2)

    def test_no_keeps_covered_positive(self, small_catalog, small_indices):
        state = fresh(small_catalog, small_indices)
        q = next_question(state, small_indices, LearnedStats())
        covered = sorted(small_indices.movies_for(q.entity))
        state2 = process_answer(state, q, "no", small_indices)
        assert all(state2.belief.prob(m) > 0.0 for m in covered)

    def test_stale_question_rejected(self, small_catalog, small_indices):
        state = fresh(small_catalog, small_indices)
        q = next_question(state, small_indices, LearnedStats())
        state2 = process_answer(state, q, "yes", small_indices)
        with pytest.raises(SessionError, match="stale"):
            process_answer(state2, q, "yes", small_indices)


class TestGuessing:
    def test_should_guess_above_threshold(self, small_catalog, small_indices):
        state = fresh(small_catalog, small_indices)
        state = dataclasses.replace(
            state,
            belief=Belief({"m1": 0.51, **{f"m{i}": 0.49 / 7 for i in range(2, 9)}}),
        )
        assert should_guess(state, small_indices, LearnedStats())

    def test_below_threshold_keeps_asking(self, reference_catalog, reference_indices):
        state = fresh(reference_catalog, reference_indices)
        state = dataclasses.replace(state, questions_used=7)
        ranked_mass = sum(sorted(state.belief.probs.values(), reverse=True)[:5])
        assert ranked_mass < 0.5
        assert not should_guess(state, reference_indices, LearnedStats())

    def test_budget_forces_guess(self, reference_catalog, reference_indices):
        state = fresh(reference_catalog, reference_indices)
        for used in (19, 20):
            forced = dataclasses.replace(state, questions_used=used)
            assert should_guess(forced, reference_indices, LearnedStats())

    def test_no_askable_entity_forces_guess(self):
        rows = [movie(f"m{i}", year=1995) for i in range(4)]
        catalog = preprocess(catalog_from(rows), PreprocessOptions(min_tag_fraction=0.0))
        indices = build_indices(catalog)
        state = fresh(catalog, indices)
        q = next_question(state, indices, LearnedStats())
        state = process_answer(state, q, "maybe", indices)  # only era entity used up
        assert should_guess(state, indices, LearnedStats())
        with pytest.raises(NoAskableEntityError):
            next_question(state, indices, LearnedStats())

    def test_make_guess_returns_top5(self, small_catalog, small_indices):
        state = fresh(small_catalog, small_indices)
        state = dataclasses.replace(
            state,
            belief=Belief(
                {
                    "m1": 0.3, "m2": 0.25, "m3": 0.2, "m4": 0.15,
                    "m5": 0.1, "m6": 0.0, "m7": 0.0, "m8": 0.0,
                }
            ),
        )
        state2, guesses = make_guess(state)
        assert [g.movie_id for g in guesses] == ["m1", "m2", "m3", "m4", "m5"]
        assert state2.phase is Phase.AWAITING_GUESS_FEEDBACK
        assert state2.questions_used == 1

    def test_guess_truncated_to_positive(self, small_catalog, small_indices):
        state = fresh(small_catalog, small_indices)
        probs = {m.id: 0.0 for m in small_catalog.movies}
        probs.update({"m1": 0.5, "m2": 0.3, "m3": 0.2})
        state = dataclasses.replace(state, belief=Belief(probs))
        _, guesses = make_guess(state)
        assert len(guesses) == 3

    def test_accept_solves_and_records_election(self, small_catalog, small_indices):
        stats = LearnedStats()
        state = fresh(small_catalog, small_indices)
        state, guesses = make_guess(state)
        confirmed = guesses[0].movie_id
        state = process_guess_feedback(state, True, confirmed, stats, small_indices)
        assert state.phase is Phase.SOLVED
        assert stats.games_recorded == 1
        for entity in small_indices.forward[confirmed]:
            assert stats.election_count(entity) == 1

    def test_accept_requires_guessed_movie(self, small_catalog, small_indices):
        state, guesses = make_guess(fresh(small_catalog, small_indices))
        outside = next(
            m.id for m in small_catalog.movies
            if m.id not in [g.movie_id for g in guesses]
        )
        with pytest.raises(SessionError):
            process_guess_feedback(state, True, outside, LearnedStats(), small_indices)
        with pytest.raises(SessionError):
            process_guess_feedback(state, True, None, LearnedStats(), small_indices)

    def test_reject_zeroes_and_redistributes(self, small_catalog, small_indices):
        state = fresh(small_catalog, small_indices)
        state, guesses = make_guess(state)
        rejected = [g.movie_id for g in guesses]
        state = process_guess_feedback(state, False, None, LearnedStats(), small_indices)
        assert state.phase is Phase.ASKING
        assert all(state.belief.prob(m) == 0.0 for m in rejected)
        assert sum(state.belief.probs.values()) == pytest.approx(1.0)

    def test_rejected_movies_never_guessed_again(self, small_catalog, small_indices):
        state = fresh(small_catalog, small_indices)
        state, first = make_guess(state)
        state = process_guess_feedback(state, False, None, LearnedStats(), small_indices)
        state, second = make_guess(state)
        assert not set(g.movie_id for g in first) & set(g.movie_id for g in second)

    def test_reject_at_budget_exhausts(self, small_catalog, small_indices):
        state = fresh(small_catalog, small_indices)
        state = dataclasses.replace(state, questions_used=19)
        state, _ = make_guess(state)
        assert state.questions_used == 20
        state = process_guess_feedback(state, False, None, LearnedStats(), small_indices)
        assert state.phase is Phase.EXHAUSTED

    def test_rejecting_every_live_movie_exhausts(self, small_catalog, small_indices):
        state = fresh(small_catalog, small_indices)
        probs = {m.id: 0.0 for m in small_catalog.movies}
        probs.update({"m1": 0.6, "m2": 0.4})
        state = dataclasses.replace(state, belief=Belief(probs))
        state, guesses = make_guess(state)
        assert len(guesses) == 2
        state = process_guess_feedback(state, False, None, LearnedStats(), small_indices)
        assert state.phase is Phase.EXHAUSTED


class TestStateMachine:
    def test_random_walks_respect_transitions(self, small_catalog, small_indices):
        rng = random.Random(42)
        stats = LearnedStats()
        for _ in range(50):
            state = fresh(small_catalog, small_indices)
            while state.phase in (Phase.ASKING, Phase.AWAITING_GUESS_FEEDBACK):
                assert state.questions_used <= state.config.max_questions
                if state.phase is Phase.ASKING:
                    if should_guess(state, small_indices, stats):
                        state, _ = make_guess(state)
                    else:
                        q = next_question(state, small_indices, stats)
                        answer = rng.choice(["yes", "no", "maybe"])
                        state = process_answer(state, q, answer, small_indices)
                else:
                    event = state.events[-1]
                    assert isinstance(event, GuessEvent)
                    if rng.random() < 0.25:
                        confirmed = rng.choice(event.guesses).movie_id
                        state = process_guess_feedback(
                            state, True, confirmed, stats, small_indices
                        )
                        assert state.phase is Phase.SOLVED
                    else:
                        state = process_guess_feedback(
                            state, False, None, stats, small_indices
                        )
            assert state.phase in (Phase.SOLVED, Phase.EXHAUSTED)
            assert state.questions_used <= state.config.max_questions

    def test_wrong_phase_calls_rejected(self, small_catalog, small_indices):
        state = fresh(small_catalog, small_indices)
        with pytest.raises(SessionError):
            process_guess_feedback(state, False, None, LearnedStats(), small_indices)
        state, _ = make_guess(state)
        stats = LearnedStats()
        with pytest.raises(SessionError):
            next_question(state, small_indices, stats)
        with pytest.raises(SessionError):
            make_guess(state)
        q = Question(Entity(Level.GENRE, "action"), "primary", "?", 2)
        with pytest.raises(SessionError):
            process_answer(state, q, "yes", small_indices)

    def test_determinism(self, reference_catalog, reference_indices):
        def play(answers):
            stats = LearnedStats()
            state = fresh(reference_catalog, reference_indices)
            it = iter(answers)
            while state.phase is Phase.ASKING:
                if should_guess(state, reference_indices, stats):
                    state, _ = make_guess(state)
                    state = process_guess_feedback(
                        state, False, None, stats, reference_indices
                    )
                    if state.phase is not Phase.ASKING:
                        break
                else:
                    q = next_question(state, reference_indices, stats)
                    state = process_answer(state, q, next(it), reference_indices)
            return state.events

        answers = ["yes", "no", "maybe", "no", "yes"] * 6
        assert play(answers) == play(answers)

    def test_true_movie_never_loses_mass_with_honest_answers(
        self, reference_catalog, reference_indices
    ):
        stats = LearnedStats()
        for target in ("sholay", "3-idiots", "dilwale-dulhania-le-jayenge"):
            truth = reference_indices.forward[target]
            state = fresh(reference_catalog, reference_indices)
            for _ in range(8):
                if should_guess(state, reference_indices, stats):
                    break
                q = next_question(state, reference_indices, stats)
                answer = "yes" if q.entity in truth else "no"
                before = state.belief.prob(target)
                state = process_answer(state, q, answer, reference_indices)
                assert state.belief.prob(target) >= before


class TestTrace:
    def _finished_state(self, catalog, indices, answers):
        state = fresh(catalog, indices)
        stats = LearnedStats()
        for answer in answers:
            q = next_question(state, indices, stats)
            state = process_answer(state, q, answer, indices)
        return state

    def test_mismatch_flagged(self, reference_catalog, reference_indices):
        state = fresh(reference_catalog, reference_indices)
        q = Question(Entity(Level.ACTOR, "Aamir Khan"), "secondary",
                     Entity(Level.ACTOR, "Aamir Khan").question_text(), 1)
        state = process_answer(state, q, "no", reference_indices)
        report = trace(state, "3-idiots", reference_catalog)
        assert report.rows[0].fact == "yes"
        assert report.rows[0].verdict == "MISMATCH"
        assert "Is Aamir Khan an actor of your movie?" in report.render()

    def test_consistent_answers_have_no_mismatch(self, reference_catalog, reference_indices):
        target = "sholay"
        truth = reference_indices.forward[target]
        state = fresh(reference_catalog, reference_indices)
        for _ in range(6):
            q = next_question(state, reference_indices, LearnedStats())
            state = process_answer(
                state, q, "yes" if q.entity in truth else "no", reference_indices
            )
        report = trace(state, target, reference_catalog)
        assert report.mismatch_count() == 0
        assert len(report.rows) == 6

    def test_without_revealed_movie_only_answers(self, small_catalog, small_indices):
        state = self._finished_state(small_catalog, small_indices, ["yes", "no"])
        report = trace(state, None, small_catalog)
        assert len(report.rows) == state.questions_used == 2
        assert all(row.fact is None for row in report.rows)

    def test_unknown_revealed_movie_noted(self, small_catalog, small_indices):
        state = self._finished_state(small_catalog, small_indices, ["yes"])
        report = trace(state, "not-a-movie", small_catalog)
        assert report.note is not None and "not in the catalog" in report.note
        assert all(row.fact is None for row in report.rows)

    def test_maybe_rows_never_flagged(self, small_catalog, small_indices):
        state = self._finished_state(small_catalog, small_indices, ["maybe"])
        report = trace(state, "m1", small_catalog)
        assert report.rows[0].verdict == "-"
