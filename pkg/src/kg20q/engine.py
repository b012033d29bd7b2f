"""Game session state machine.

A session walks Asking -> AwaitingGuessFeedback -> Solved/Exhausted, spending
a budget of 20 units where both questions and guesses cost one unit each.
Question selection is layered: play opens on the broad primary levels (era,
genre, subject), visiting each level while it still has an unasked value
covering substantial belief mass and asking the highest-scoring value there;
once no primary level is left unresolved (or earlier, when the effective
candidate set narrows) the session switches permanently to the secondary
layer and picks the best actor/director/composer question across all three
levels, skipping entities that cover almost no belief mass.

States are immutable: every operation returns a new SessionState, so two
sessions built from the same inputs never interfere. All tie-breaks are
lexicographic, making a session a deterministic function of its inputs and
the answer sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .belief import (
    AnswerKind,
    AnswerSignal,
    Belief,
    apply_answer,
    eliminate_and_redistribute,
    init_uniform,
    top_k,
)
from .catalog import Catalog, Level, PRIMARY_LEVELS, SECONDARY_LEVELS
from .kgraph import Entity, IndexPair, LearnedStats, record_election
from .scoring import EstimatorConfig, primary_score, secondary_score


class SessionError(RuntimeError):
    """An operation was applied in the wrong phase or with stale inputs."""


class NoAskableEntityError(SessionError):
    """No unasked entity is eligible at the current layer: guess now."""


class Phase(Enum):
    ASKING = "asking"
    AWAITING_GUESS_FEEDBACK = "awaiting_guess_feedback"
    SOLVED = "solved"
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class GameConfig:
    """Session-level knobs; estimator weights live in EstimatorConfig."""

    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    max_questions: int = 20
    guess_size: int = 5
    guess_threshold: float = 0.5
    update_alpha: float = 1.0
    # Layer-switch policy: move to the secondary layer early when the number
    # of movies holding more than 1/(effective_prob_factor * N) probability
    # drops to narrow_candidate_limit or fewer.
    narrow_candidate_limit: int = 30
    effective_prob_factor: float = 10.0
    # A primary level stays worth visiting while some unasked value there
    # still covers at least this much belief (the level is unresolved).
    primary_min_mass: float = 0.2
    # Secondary entities covering less belief mass than this are skipped.
    secondary_min_mass: float = 0.1


@dataclass(frozen=True)
class Question:
    entity: Entity
    layer: str  # "primary" | "secondary"
    text: str
    ordinal: int  # 1-based position in the budget


@dataclass(frozen=True)
class GuessItem:
    movie_id: str
    title: str
    probability: float


GuessList = tuple[GuessItem, ...]


@dataclass(frozen=True)
class QuestionEvent:
    question: Question
    answer: AnswerKind


@dataclass(frozen=True)
class GuessEvent:
    guesses: GuessList
    ordinal: int
    outcome: str = "pending"  # pending | accepted | rejected
    confirmed_movie: str | None = None


TranscriptEvent = QuestionEvent | GuessEvent


@dataclass(frozen=True)
class SessionState:
    phase: Phase
    belief: Belief
    events: tuple[TranscriptEvent, ...]
    asked: frozenset[Entity]
    questions_used: int
    birth_year: int | None
    seed: int
    titles: dict[str, str]
    config: GameConfig

    @property
    def questions(self) -> tuple[QuestionEvent, ...]:
        return tuple(e for e in self.events if isinstance(e, QuestionEvent))

    @property
    def guesses(self) -> tuple[GuessEvent, ...]:
        return tuple(e for e in self.events if isinstance(e, GuessEvent))

    def rejected_ids(self) -> frozenset[str]:
        out: set[str] = set()
        for event in self.events:
            if isinstance(event, GuessEvent) and event.outcome == "rejected":
                out.update(item.movie_id for item in event.guesses)
        return frozenset(out)


def start_session(
    catalog: Catalog,
    indices: IndexPair,
    stats: LearnedStats,
    config: GameConfig | None = None,
    birth_year: int | None = None,
    seed: int = 0,
) -> SessionState:
    """Open a session: uniform belief, empty transcript, phase Asking."""
    del stats  # snapshot taken per operation; nothing to record at start
    if not catalog.movies:
        raise ValueError("cannot start a session on an empty catalog")
    if set(indices.forward) != {m.id for m in catalog.movies}:
        raise ValueError("indices do not match the catalog")
    return SessionState(
        phase=Phase.ASKING,
        belief=init_uniform([m.id for m in catalog.movies]),
        events=(),
        asked=frozenset(),
        questions_used=0,
        birth_year=birth_year,
        seed=seed,
        titles={m.id: m.title for m in catalog.movies},
        config=config or GameConfig(),
    )


# ── question selection ───────────────────────────────────────────────────────


def _effective_candidates(state: SessionState) -> int:
    bar = 1.0 / (state.config.effective_prob_factor * len(state.belief))
    return sum(1 for p in state.belief.probs.values() if p > bar)


def _next_primary_level(state: SessionState, indices: IndexPair) -> Level | None:
    """First primary level that is still broadly unresolved.

    A level is worth another visit while some unasked value there covers at
    least primary_min_mass of the belief; once every plausible value has been
    asked (or lost its mass), the level is done. Scanning Era, Genre, Subject
    in order keeps the broadest dimensions first.
    """
    bar = state.config.primary_min_mass
    for level in PRIMARY_LEVELS:
        for entity in indices.level_entities(level):
            if entity in state.asked:
                continue
            if state.belief.mass_on(indices.movies_for(entity)) >= bar:
                return level
    return None


def _in_secondary_layer(state: SessionState, indices: IndexPair) -> bool:
    if any(not e.question.entity.level.is_primary for e in state.questions):
        return True  # the switch is permanent
    if _next_primary_level(state, indices) is None:
        return True
    # Early switch once the candidate set has actually narrowed; the strict
    # drop below the support size keeps tiny catalogs in the primary layer.
    effective = _effective_candidates(state)
    return (
        effective <= state.config.narrow_candidate_limit
        and effective < len(state.belief)
    )


def _select_entity(
    state: SessionState, indices: IndexPair, stats: LearnedStats
) -> tuple[Entity, str] | None:
    cfg = state.config
    if not _in_secondary_layer(state, indices):
        level = _next_primary_level(state, indices)
        assert level is not None
        best: tuple[float, str] | None = None
        best_entity: Entity | None = None
        for entity in indices.level_entities(level):
            if entity in state.asked:
                continue
            score = primary_score(
                entity, indices, stats, state.birth_year, cfg.estimator
            ).total
            key = (-score, entity.value)
            if best is None or key < best:
                best, best_entity = key, entity
        assert best_entity is not None
        return best_entity, "primary"

    best = None
    best_entity = None
    for level in SECONDARY_LEVELS:
        for entity in indices.level_entities(level):
            if entity in state.asked:
                continue
            covered = state.belief.mass_on(indices.movies_for(entity))
            if covered < cfg.secondary_min_mass:
                continue
            score = secondary_score(
                entity, indices, stats, state.belief, cfg.estimator
            ).total
            key = (-score, entity.sort_key)
            if best is None or key < best:
                best, best_entity = key, entity
    if best_entity is None:
        return None
    return best_entity, "secondary"


def next_question(
    state: SessionState, indices: IndexPair, stats: LearnedStats
) -> Question:
    """The highest-scoring unasked entity under the layer policy.

    Selection does not change the state; the question is marked as asked only
    when its answer is processed.

    Raises:
        NoAskableEntityError: Nothing is left to ask — the session must guess.
        SessionError: Wrong phase or exhausted budget.
    """
    if state.phase is not Phase.ASKING:
        raise SessionError(f"cannot ask in phase {state.phase.value}")
    if state.questions_used >= state.config.max_questions:
        raise SessionError("question budget exhausted")
    selected = _select_entity(state, indices, stats)
    if selected is None:
        raise NoAskableEntityError("no askable entity remains; must guess now")
    entity, layer = selected
    return Question(
        entity=entity,
        layer=layer,
        text=entity.question_text(),
        ordinal=state.questions_used + 1,
    )


def process_answer(
    state: SessionState,
    question: Question,
    answer: AnswerKind | str,
    indices: IndexPair,
) -> SessionState:
    """Fold one answer into the session.

    Maybe answers leave the belief untouched but still consume one budget
    unit. Definitive answers reweight the belief: movies carrying the asked
    entity form the yes side, all others the no side.
    """
    if state.phase is not Phase.ASKING:
        raise SessionError(f"cannot answer in phase {state.phase.value}")
    if question.ordinal != state.questions_used + 1:
        raise SessionError(
            f"stale question: ordinal {question.ordinal}, "
            f"expected {state.questions_used + 1}"
        )
    if question.entity in state.asked:
        raise SessionError(f"entity {question.entity} was already asked")
    answer = AnswerKind(answer) if isinstance(answer, str) else answer

    if answer is AnswerKind.MAYBE:
        signal = AnswerSignal(kind=AnswerKind.MAYBE)
    else:
        support = frozenset(state.belief.probs)
        covered = indices.movies_for(question.entity) & support
        consistent = covered if answer is AnswerKind.YES else support - covered
        signal = AnswerSignal(
            kind=answer, yes_set=consistent, no_set=support - consistent
        )

    return replace(
        state,
        belief=apply_answer(state.belief, signal, state.config.update_alpha),
        events=state.events + (QuestionEvent(question, answer),),
        asked=state.asked | {question.entity},
        questions_used=state.questions_used + 1,
    )


def should_guess(
    state: SessionState, indices: IndexPair, stats: LearnedStats
) -> bool:
    """Guess now instead of asking?

    True as soon as the top five movies hold at least guess_threshold of the
    probability mass, when only one budget unit remains (the final unit must
    be a guess — asking would leave no room to answer), or when no askable
    entity remains.
    """
    if state.phase is not Phase.ASKING:
        raise SessionError(f"should_guess undefined in phase {state.phase.value}")
    ranked = top_k(state.belief, state.config.guess_size)
    if sum(p for _, p in ranked) >= state.config.guess_threshold:
        return True
    if state.questions_used >= state.config.max_questions - 1:
        return True
    return _select_entity(state, indices, stats) is None


def make_guess(state: SessionState) -> tuple[SessionState, GuessList]:
    """Present the top movies; consumes one budget unit.

    Only positive-probability movies are guessed, so previously rejected
    movies can never reappear.
    """
    if state.phase is not Phase.ASKING:
        raise SessionError(f"cannot guess in phase {state.phase.value}")
    ranked = [
        (movie_id, p)
        for movie_id, p in top_k(state.belief, state.config.guess_size)
        if p > 0.0
    ]
    if not ranked:
        raise SessionError("no positive-probability movie to guess")
    guesses: GuessList = tuple(
        GuessItem(movie_id, state.titles.get(movie_id, movie_id), p)
        for movie_id, p in ranked
    )
    event = GuessEvent(guesses=guesses, ordinal=state.questions_used + 1)
    new_state = replace(
        state,
        phase=Phase.AWAITING_GUESS_FEEDBACK,
        events=state.events + (event,),
        questions_used=state.questions_used + 1,
    )
    return new_state, guesses


def process_guess_feedback(
    state: SessionState,
    accepted: bool,
    confirmed_movie: str | None,
    stats: LearnedStats,
    indices: IndexPair,
) -> SessionState:
    """Resolve a pending guess.

    Accepted guesses solve the session and record an election for the
    confirmed movie (the only learning moment). Rejected guesses zero the
    guessed movies, redistribute their mass, and return to Asking, or end
    the session when the budget is spent or nothing remains to reject into.
    """
    if state.phase is not Phase.AWAITING_GUESS_FEEDBACK:
        raise SessionError(f"no guess pending in phase {state.phase.value}")
    event = state.events[-1]
    assert isinstance(event, GuessEvent) and event.outcome == "pending"
    guessed_ids = [item.movie_id for item in event.guesses]

    if accepted:
        if confirmed_movie is None or confirmed_movie not in guessed_ids:
            raise SessionError(
                f"accepted guess must name one of the guessed movies, "
                f"got {confirmed_movie!r}"
            )
        record_election(stats, indices, confirmed_movie)
        done = replace(event, outcome="accepted", confirmed_movie=confirmed_movie)
        return replace(
            state, phase=Phase.SOLVED, events=state.events[:-1] + (done,)
        )

    done = replace(event, outcome="rejected")
    positive = set(state.belief.positive_ids())
    if positive <= set(guessed_ids):
        # The user rejected every movie still holding probability: the answer
        # cannot be in the catalog anymore, so the session ends.
        return replace(
            state, phase=Phase.EXHAUSTED, events=state.events[:-1] + (done,)
        )
    belief = eliminate_and_redistribute(state.belief, guessed_ids)
    phase = (
        Phase.ASKING
        if state.questions_used < state.config.max_questions
        else Phase.EXHAUSTED
    )
    return replace(
        state, phase=phase, belief=belief, events=state.events[:-1] + (done,)
    )


# ── answer tracing ───────────────────────────────────────────────────────────


@dataclass(frozen=True)
class TraceRow:
    ordinal: int
    question: str
    answer: str
    fact: str | None  # "yes"/"no" for the revealed movie, None when unknown
    verdict: str  # MATCH | MISMATCH | "-"


@dataclass(frozen=True)
class TraceReport:
    rows: tuple[TraceRow, ...]
    questions_used: int
    phase: str
    note: str | None = None

    def mismatch_count(self) -> int:
        return sum(1 for row in self.rows if row.verdict == "MISMATCH")

    def render(self) -> str:
        """Plain-text table: question | your answer | fact | verdict."""
        headers = ("#", "question", "your answer", "fact", "verdict")
        table = [headers]
        for row in self.rows:
            table.append(
                (
                    str(row.ordinal),
                    row.question,
                    row.answer,
                    row.fact if row.fact is not None else "-",
                    row.verdict,
                )
            )
        widths = [max(len(r[i]) for r in table) for i in range(len(headers))]
        lines = []
        for i, row in enumerate(table):
            lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
            if i == 0:
                lines.append("  ".join("-" * w for w in widths))
        if self.note:
            lines.append(f"note: {self.note}")
        return "\n".join(lines)


def trace(
    state: SessionState,
    revealed_movie: str | None,
    catalog: Catalog,
) -> TraceReport:
    """Compare the player's answers against a revealed movie's facts.

    Without a revealed movie (or with an unknown one) the report lists the
    answers alone; otherwise each definitive answer is flagged MATCH or
    MISMATCH against the movie's actual attributes. Maybe answers carry no
    commitment and are never flagged.
    """
    movie = None
    note = None
    if revealed_movie is not None:
        movie = catalog.by_id.get(revealed_movie)
        if movie is None:
            note = f"movie {revealed_movie!r} is not in the catalog"

    rows = []
    for event in state.questions:
        entity = event.question.entity
        answer = event.answer.value
        fact = None
        verdict = "-"
        if movie is not None:
            fact = "yes" if movie.has(entity.level, entity.value) else "no"
            if event.answer is not AnswerKind.MAYBE:
                verdict = "MATCH" if answer == fact else "MISMATCH"
        rows.append(
            TraceRow(
                ordinal=event.question.ordinal,
                question=event.question.text,
                answer=answer,
                fact=fact,
                verdict=verdict,
            )
        )
    return TraceReport(
        rows=tuple(rows),
        questions_used=state.questions_used,
        phase=state.phase.value,
        note=note,
    )
