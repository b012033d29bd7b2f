"""Command-line entry points: play, serve, ingest, warmup, bench."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import engine
from .arena import STRATEGIES, run_batch, warmup
from .catalog import (
    CatalogError,
    Level,
    PreprocessOptions,
    load_catalog,
    load_overrides,
    preprocess,
    write_catalog,
)
from .config import AppConfig, load_config, load_runtime
from .engine import Phase
from .kgraph import LearnedStats, save_stats_atomic
from .report import render_tables, write_report


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="JSON config file")
    parser.add_argument("--catalog", dest="catalog_path", default=None,
                        help="catalog JSON (default: packaged reference catalog)")
    parser.add_argument("--stats", dest="stats_path", default=None,
                        help="stats store path (default: kg20q_stats.json)")
    parser.add_argument("--min-tag-fraction", dest="min_tag_fraction", type=float,
                        default=None, help="prune values rarer than this fraction")


def _config_from(args: argparse.Namespace, extra: dict | None = None) -> AppConfig:
    overrides = {
        "catalog_path": getattr(args, "catalog_path", None),
        "stats_path": getattr(args, "stats_path", None),
        "min_tag_fraction": getattr(args, "min_tag_fraction", None),
    }
    overrides.update(extra or {})
    return load_config(args.config, overrides=overrides)


# ── play ─────────────────────────────────────────────────────────────────────


def _prompt(text: str, allowed: set[str]) -> str | None:
    """Read one of the allowed answers; None means the player quit."""
    while True:
        try:
            raw = input(text).strip().lower()
        except EOFError:
            return None
        if raw in ("q", "quit", "exit"):
            return None
        if raw in allowed:
            return raw
        print(f"  please answer one of: {', '.join(sorted(allowed))} (or q to quit)")


def cmd_play(args: argparse.Namespace) -> int:
    config = _config_from(args)
    catalog, indices, stats = load_runtime(config)
    state = engine.start_session(
        catalog, indices, stats, config.game_config(), birth_year=args.birth_year
    )
    print(f"Think of one of {len(catalog)} Bollywood movies. I get "
          f"{state.config.max_questions} questions and guesses to find it.")

    while state.phase is Phase.ASKING:
        if engine.should_guess(state, indices, stats):
            state, guesses = engine.make_guess(state)
            print(f"\nMy guesses (attempt at {state.questions_used}/"
                  f"{state.config.max_questions}):")
            for i, item in enumerate(guesses, start=1):
                print(f"  {i}. {item.title}  ({item.probability:.1%})")
            answer = _prompt("Is your movie one of these? [y/n] ", {"y", "n", "yes", "no"})
            if answer is None:
                print("Session aborted; nothing was recorded.")
                return 0
            if answer.startswith("y"):
                pick = _prompt(f"Which one? [1-{len(guesses)}] ",
                               {str(i) for i in range(1, len(guesses) + 1)})
                if pick is None:
                    print("Session aborted; nothing was recorded.")
                    return 0
                confirmed = guesses[int(pick) - 1].movie_id
                state = engine.process_guess_feedback(
                    state, True, confirmed, stats, indices
                )
                save_stats_atomic(stats, config.stats_path)
                print(f"\nGot it: {catalog.movie(confirmed).title} "
                      f"in {state.questions_used} questions. Thanks for playing!")
            else:
                state = engine.process_guess_feedback(state, False, None, stats, indices)
        else:
            question = engine.next_question(state, indices, stats)
            answer = _prompt(
                f"\nQuestion {question.ordinal} of {state.config.max_questions}: "
                f"{question.text} [y/n/m] ",
                {"y", "n", "m", "yes", "no", "maybe"},
            )
            if answer is None:
                print("Session aborted; nothing was recorded.")
                return 0
            kind = {"y": "yes", "n": "no", "m": "maybe"}.get(answer, answer)
            state = engine.process_answer(state, question, kind, indices)

    if state.phase is Phase.EXHAUSTED:
        print("\nYou win! I could not find your movie. Here is what you told me:")
        print(engine.trace(state, None, catalog).render())
        try:
            title = input("\nWhich movie was it? (enter to skip) ").strip()
        except EOFError:
            title = ""
        if title:
            movie_id = next(
                (m.id for m in catalog.movies if m.title.lower() == title.lower()),
                title,
            )
            print(engine.trace(state, movie_id, catalog).render())
    if args.verbose:
        print("\nFull transcript:")
        print(engine.trace(state, None, catalog).render())
    return 0


# ── serve ────────────────────────────────────────────────────────────────────


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    config = _config_from(
        args, {"host": args.host, "port": args.port}
    )
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


# ── ingest ───────────────────────────────────────────────────────────────────


def cmd_ingest(args: argparse.Namespace) -> int:
    options_kwargs: dict = {}
    if args.min_tag_fraction is not None:
        options_kwargs["min_tag_fraction"] = args.min_tag_fraction
    if args.overrides:
        options_kwargs["overrides"] = load_overrides(args.overrides)
    if args.allowlists:
        import json

        doc = json.loads(Path(args.allowlists).read_text(encoding="utf-8"))
        options_kwargs["value_allowlists"] = {
            Level(key): frozenset(values) for key, values in doc.items()
        }
    try:
        catalog = load_catalog(args.input)
        normalized = preprocess(catalog, PreprocessOptions(**options_kwargs))
    except CatalogError as exc:
        print(f"ingest failed: {exc}", file=sys.stderr)
        return 1
    write_catalog(normalized, args.output)
    print(f"wrote {len(normalized)} movies to {args.output}")
    return 0


# ── warmup ───────────────────────────────────────────────────────────────────


def cmd_warmup(args: argparse.Namespace) -> int:
    config = _config_from(args)
    catalog, indices, stats = load_runtime(config)
    before = stats.games_recorded
    warmup(stats, catalog, indices, args.games, args.seed, config.game_config())
    save_stats_atomic(stats, config.stats_path)
    print(
        f"played {args.games} warmup games ({stats.games_recorded - before} solved); "
        f"stats saved to {config.stats_path}"
    )
    return 0


# ── bench ────────────────────────────────────────────────────────────────────


def cmd_bench(args: argparse.Namespace) -> int:
    config = _config_from(args)
    catalog, indices, stats = load_runtime(config)
    if args.fresh_stats:
        stats = LearnedStats()
    if args.warmup_games:
        warmup(stats, catalog, indices, args.warmup_games, args.seed, config.game_config())
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    metrics = run_batch(
        strategies,
        catalog,
        n_movies=args.movies,
        repeats=args.repeats,
        error_rate=args.error_rate,
        maybe_rate=args.maybe_rate,
        seed=args.seed,
        stats=stats,
        config=config.game_config(),
    )
    print(render_tables(metrics))
    if args.out:
        outputs = write_report(metrics, args.out)
        for name, path in outputs.items():
            print(f"  wrote {name}: {path}")
    return 0


# ── parser ───────────────────────────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kg20q",
        description="A 20 Questions engine over a Bollywood movie knowledge graph.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("play", help="play an interactive terminal game")
    _add_config_flags(p)
    p.add_argument("--birth-year", type=int, default=None)
    p.add_argument("--verbose", action="store_true", help="print the full transcript")
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("serve", help="run the HTTP session API")
    _add_config_flags(p)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("ingest", help="validate, preprocess, and write a catalog")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--output", required=True, type=Path)
    p.add_argument("--min-tag-fraction", type=float, default=None)
    p.add_argument("--overrides", type=Path, default=None,
                   help="catalog-shaped JSON with manual attribute additions")
    p.add_argument("--allowlists", type=Path, default=None,
                   help='JSON object {"genre": [...], ...} of allowed values')
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("warmup", help="pre-train the stats store with simulated games")
    _add_config_flags(p)
    p.add_argument("--games", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_warmup)

    p = sub.add_parser("bench", help="run the strategy benchmark")
    _add_config_flags(p)
    p.add_argument("--strategies", default=",".join(STRATEGIES))
    p.add_argument("--movies", type=int, default=50)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--error-rate", type=float, default=0.1)
    p.add_argument("--maybe-rate", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=11)
    p.add_argument("--warmup-games", type=int, default=50)
    p.add_argument("--fresh-stats", action="store_true", default=True,
                   help="start from empty stats instead of the stats store")
    p.add_argument("--stored-stats", dest="fresh_stats", action="store_false",
                   help="warm up on top of the loaded stats store")
    p.add_argument("--out", type=Path, default=None,
                   help="directory for report.json, games.csv, and figures")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
