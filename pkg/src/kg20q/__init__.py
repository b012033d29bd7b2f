"""kg20q: a knowledge-graph 20 Questions engine for Bollywood movies."""

from .belief import (
    AnswerKind,
    AnswerSignal,
    Belief,
    apply_answer,
    eliminate_and_redistribute,
    init_uniform,
    top_k,
)
from .catalog import (
    Catalog,
    CatalogError,
    Level,
    MovieRecord,
    ParseError,
    PreprocessOptions,
    ValidationError,
    derive_era,
    load_catalog,
    load_reference_catalog,
    preprocess,
)
from .engine import (
    GameConfig,
    Phase,
    Question,
    SessionState,
    make_guess,
    next_question,
    process_answer,
    process_guess_feedback,
    should_guess,
    start_session,
    trace,
)
from .kgraph import (
    Entity,
    IndexPair,
    LearnedStats,
    build_indices,
    load_stats,
    record_election,
    save_stats,
)
from .scoring import EstimatorConfig, ScoreBreakdown

__version__ = "0.1.0"

__all__ = [
    "AnswerKind",
    "AnswerSignal",
    "Belief",
    "Catalog",
    "CatalogError",
    "Entity",
    "EstimatorConfig",
    "GameConfig",
    "IndexPair",
    "LearnedStats",
    "Level",
    "MovieRecord",
    "ParseError",
    "Phase",
    "PreprocessOptions",
    "Question",
    "ScoreBreakdown",
    "SessionState",
    "ValidationError",
    "apply_answer",
    "build_indices",
    "derive_era",
    "eliminate_and_redistribute",
    "init_uniform",
    "load_catalog",
    "load_reference_catalog",
    "load_stats",
    "make_guess",
    "next_question",
    "preprocess",
    "process_answer",
    "process_guess_feedback",
    "record_election",
    "save_stats",
    "should_guess",
    "start_session",
    "top_k",
    "trace",
]
