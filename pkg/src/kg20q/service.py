"""HTTP session API over the game engine.

Sessions live in memory with idle expiry; each session's operations are
serialized by a per-game lock, the catalog and indices are shared read-only,
and election recording plus stats persistence happen under a single global
writer lock, at most once per game. Every response body carries exactly one
of {question, guess, final}.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import engine
from .catalog import Catalog
from .config import AppConfig, load_runtime
from .engine import GameConfig, GuessList, Phase, Question, SessionState
from .kgraph import IndexPair, LearnedStats, save_stats_atomic


class CreateGameRequest(BaseModel):
    birth_year: int | None = Field(default=None, ge=1800, le=2100)


class AnswerRequest(BaseModel):
    answer: str = Field(pattern="^(yes|no|maybe)$")


class GuessFeedbackRequest(BaseModel):
    accepted: bool
    movie_id: str | None = None


class RevealRequest(BaseModel):
    title: str


@dataclass
class GameSessionHandle:
    game_id: str
    state: SessionState
    created_at: float
    last_access: float
    pending_question: Question | None = None
    pending_guesses: GuessList | None = None
    learned: bool = False
    lock: threading.Lock = field(default_factory=threading.Lock)


class GameService:
    """Session registry plus the engine-driving logic shared by endpoints."""

    def __init__(
        self,
        catalog: Catalog,
        indices: IndexPair,
        stats: LearnedStats,
        config: AppConfig,
    ) -> None:
        self.catalog = catalog
        self.indices = indices
        self.stats = stats
        self.config = config
        self.game_config: GameConfig = config.game_config()
        self.sessions: dict[str, GameSessionHandle] = {}
        self._registry_lock = threading.Lock()
        self._stats_lock = threading.Lock()

    # ── session registry ─────────────────────────────────────────────

    def create_session(self, birth_year: int | None) -> GameSessionHandle:
        state = engine.start_session(
            self.catalog,
            self.indices,
            self.stats,
            self.game_config,
            birth_year=birth_year,
        )
        handle = GameSessionHandle(
            game_id=uuid.uuid4().hex,
            state=state,
            created_at=time.time(),
            last_access=time.time(),
        )
        with self._registry_lock:
            self._sweep_expired()
            self.sessions[handle.game_id] = handle
        return handle

    def get_session(self, game_id: str) -> GameSessionHandle:
        with self._registry_lock:
            self._sweep_expired()
            handle = self.sessions.get(game_id)
        if handle is None:
            raise HTTPException(status_code=404, detail=f"unknown game {game_id!r}")
        handle.last_access = time.time()
        return handle

    def _sweep_expired(self) -> None:
        deadline = time.time() - self.config.session_timeout_seconds
        for game_id in [
            gid for gid, h in self.sessions.items() if h.last_access < deadline
        ]:
            del self.sessions[game_id]

    # ── engine driving ───────────────────────────────────────────────

    def advance(self, handle: GameSessionHandle) -> dict:
        """Ensure a pending item exists and build the response payload."""
        state = handle.state
        if state.phase is Phase.ASKING:
            if engine.should_guess(state, self.indices, self.stats):
                state, guesses = engine.make_guess(state)
                handle.state = state
                handle.pending_question = None
                handle.pending_guesses = guesses
            else:
                handle.pending_question = engine.next_question(
                    state, self.indices, self.stats
                )
                handle.pending_guesses = None
        return self.payload(handle)

    def payload(self, handle: GameSessionHandle) -> dict:
        state = handle.state
        base = {
            "game_id": handle.game_id,
            "questions_used": state.questions_used,
            "max_questions": state.config.max_questions,
        }
        if state.phase is Phase.SOLVED:
            event = state.guesses[-1]
            movie = self.catalog.by_id.get(event.confirmed_movie or "")
            base["final"] = {
                "status": "solved",
                "movie_id": event.confirmed_movie,
                "title": movie.title if movie else event.confirmed_movie,
                "questions_used": state.questions_used,
            }
        elif state.phase is Phase.EXHAUSTED:
            report = engine.trace(state, None, self.catalog)
            base["final"] = {
                "status": "exhausted",
                "questions_used": state.questions_used,
                "trace": _trace_dict(report),
            }
        elif handle.pending_guesses is not None:
            base["guess"] = {
                "movies": [
                    {
                        "movie_id": item.movie_id,
                        "title": item.title,
                        "probability": item.probability,
                    }
                    for item in handle.pending_guesses
                ]
            }
        else:
            question = handle.pending_question
            assert question is not None
            base["question"] = {
                "text": question.text,
                "ordinal": question.ordinal,
                "level": question.entity.level.value,
                "value": question.entity.value,
                "layer": question.layer,
            }
        return base

    def submit_answer(self, handle: GameSessionHandle, answer: str) -> dict:
        with handle.lock:
            if handle.state.phase is not Phase.ASKING:
                raise HTTPException(status_code=409, detail="game is finished")
            if handle.pending_question is None:
                raise HTTPException(
                    status_code=409, detail="a guess is pending, not a question"
                )
            handle.state = engine.process_answer(
                handle.state, handle.pending_question, answer, self.indices
            )
            handle.pending_question = None
            return self.advance(handle)

    def submit_guess_feedback(
        self, handle: GameSessionHandle, accepted: bool, movie_id: str | None
    ) -> dict:
        with handle.lock:
            if handle.state.phase is not Phase.AWAITING_GUESS_FEEDBACK:
                raise HTTPException(status_code=409, detail="no guess is pending")
            guessed = [item.movie_id for item in handle.pending_guesses or ()]
            if accepted and (movie_id is None or movie_id not in guessed):
                raise HTTPException(
                    status_code=422,
                    detail="accepted feedback must name one of the guessed movies",
                )
            if accepted and not handle.learned:
                with self._stats_lock:
                    handle.state = engine.process_guess_feedback(
                        handle.state, True, movie_id, self.stats, self.indices
                    )
                    save_stats_atomic(self.stats, self.config.stats_path)
                handle.learned = True
            else:
                # Rejections never learn; retried accepts must not double-count.
                stats = self.stats if not accepted else self.stats.copy()
                handle.state = engine.process_guess_feedback(
                    handle.state, accepted, movie_id, stats, self.indices
                )
            handle.pending_guesses = None
            return self.advance(handle)

    def reveal(self, handle: GameSessionHandle, title: str) -> dict:
        with handle.lock:
            movie_id = None
            wanted = title.strip().lower()
            for movie in self.catalog.movies:
                if movie.title.lower() == wanted:
                    movie_id = movie.id
                    break
            report = engine.trace(
                handle.state, movie_id if movie_id else title, self.catalog
            )
            payload = self.payload(handle)
            payload["final"] = {
                "status": handle.state.phase.value,
                "questions_used": handle.state.questions_used,
                "trace": _trace_dict(report),
            }
            payload.pop("question", None)
            payload.pop("guess", None)
            return payload


def _trace_dict(report: engine.TraceReport) -> dict:
    return {
        "rows": [
            {
                "ordinal": row.ordinal,
                "question": row.question,
                "answer": row.answer,
                "fact": row.fact,
                "verdict": row.verdict,
            }
            for row in report.rows
        ],
        "note": report.note,
        "questions_used": report.questions_used,
        "rendered": report.render(),
    }


def create_app(config: AppConfig | None = None) -> FastAPI:
    """Build the FastAPI app with a loaded catalog and stats store."""
    config = config or AppConfig()
    catalog, indices, stats = load_runtime(config)
    service = GameService(catalog, indices, stats, config)

    app = FastAPI(title="kg20q", version="0.1.0")
    app.state.service = service

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok", "movies": len(service.catalog)}

    @app.post("/api/games", status_code=201)
    def create_game(body: CreateGameRequest) -> dict:
        handle = service.create_session(body.birth_year)
        with handle.lock:
            return service.advance(handle)

    @app.get("/api/games/{game_id}")
    def get_game(game_id: str) -> dict:
        handle = service.get_session(game_id)
        with handle.lock:
            return service.payload(handle)

    @app.post("/api/games/{game_id}/answer")
    def submit_answer(game_id: str, body: AnswerRequest) -> dict:
        handle = service.get_session(game_id)
        return service.submit_answer(handle, body.answer)

    @app.post("/api/games/{game_id}/guess")
    def submit_guess(game_id: str, body: GuessFeedbackRequest) -> dict:
        handle = service.get_session(game_id)
        return service.submit_guess_feedback(handle, body.accepted, body.movie_id)

    @app.post("/api/games/{game_id}/reveal")
    def reveal(game_id: str, body: RevealRequest) -> dict:
        handle = service.get_session(game_id)
        return service.reveal(handle, body.title)

    return app
