"""Benchmark reporting: text tables, delimited/JSON output, and figures.

The bench report mirrors the two classic result tables of this task — a
question-count bucket table and a first-attempt rank-cumulative table — and
prints the 250-game human-study reference values next to the simulated ones
for orientation. Figures are rendered to files with matplotlib's Agg
backend, alongside the delimited per-game output.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .arena import BUCKET_LABELS, RunMetrics

# Reference values from the original 250-game human evaluation that this
# harness replays in simulation. Reported for context, never asserted.
HUMAN_STUDY_BUCKETS = {
    "baseline1": {"<10": 37, "10-15": 38, "15-20": 109, "unsolved": 66},
    "baseline2": {"<10": 72, "10-15": 93, "15-20": 39, "unsolved": 46},
    "kg20q": {"<10": 127, "10-15": 62, "15-20": 38, "unsolved": 23},
}
HUMAN_STUDY_RANK_CUMULATIVE = {
    "baseline1": [0.032, 0.052, 0.064, 0.096, 0.108],
    "baseline2": [0.104, 0.148, 0.196, 0.232, 0.256],
    "kg20q": [0.564, 0.712, 0.788, 0.828, 0.860],
}

_STRATEGY_TITLES = {
    "baseline1": "Baseline 1",
    "baseline2": "Baseline 2",
    "kg20q": "KG20Q",
}


def _format_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [
        max(len(str(cell)) for cell in column)
        for column in zip(headers, *rows)
    ]
    lines = [
        "  ".join(str(cell).ljust(w) for cell, w in zip(headers, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append(
            "  ".join(str(cell).ljust(w) for cell, w in zip(row, widths)).rstrip()
        )
    return "\n".join(lines)


def render_tables(metrics: RunMetrics) -> str:
    """Plain-text bucket and rank-cumulative tables for the bench output."""
    buckets = metrics.buckets()
    headers = ["questions"] + [
        _STRATEGY_TITLES.get(s, s) for s in metrics.strategies
    ] + ["(human study)"]
    rows = []
    for label in BUCKET_LABELS:
        human = "/".join(
            str(HUMAN_STUDY_BUCKETS[s][label])
            for s in metrics.strategies
            if s in HUMAN_STUDY_BUCKETS
        )
        rows.append([label] + [buckets[s][label] for s in metrics.strategies] + [human])
    bucket_table = _format_table(headers, rows)

    curves = metrics.rank_cumulative()
    headers = ["rank"] + [
        _STRATEGY_TITLES.get(s, s) for s in metrics.strategies
    ] + ["(human study)"]
    rows = []
    for rank in range(1, 6):
        human = "/".join(
            f"{HUMAN_STUDY_RANK_CUMULATIVE[s][rank - 1]:.3f}"
            for s in metrics.strategies
            if s in HUMAN_STUDY_RANK_CUMULATIVE
        )
        rows.append(
            [rank]
            + [f"{curves[s][rank - 1]:.3f}" for s in metrics.strategies]
            + [human]
        )
    rank_table = _format_table(headers, rows)

    games = metrics.settings.get("games_per_strategy", "?")
    return (
        f"Questions asked to solve ({games} games per strategy)\n"
        f"{bucket_table}\n\n"
        f"Cumulative probability of solving within rank n on the first attempt\n"
        f"{rank_table}\n"
    )


def write_json(metrics: RunMetrics, path: str | Path) -> Path:
    """Deterministic JSON dump: same metrics, byte-identical file."""
    path = Path(path)
    path.write_text(
        json.dumps(metrics.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return path


def write_csv(metrics: RunMetrics, path: str | Path) -> Path:
    """Per-game rows as delimited output for spreadsheet digestion."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "strategy",
                "target",
                "solved",
                "questions_to_solve",
                "budget_used",
                "first_attempt_rank",
            ]
        )
        for g in metrics.games:
            writer.writerow(
                [
                    g.strategy,
                    g.target,
                    int(g.solved),
                    g.questions_to_solve if g.questions_to_solve is not None else "",
                    g.budget_used,
                    g.first_attempt_rank if g.first_attempt_rank is not None else "",
                ]
            )
    return path


def write_figures(metrics: RunMetrics, out_dir: str | Path) -> list[Path]:
    """Render the bucket bar chart and rank-cumulative curves to PNG files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []

    buckets = metrics.buckets()
    fig, ax = plt.subplots(figsize=(7, 4))
    n = len(metrics.strategies)
    width = 0.8 / n
    for i, strategy in enumerate(metrics.strategies):
        xs = [j + (i - (n - 1) / 2) * width for j in range(len(BUCKET_LABELS))]
        ys = [buckets[strategy][label] for label in BUCKET_LABELS]
        ax.bar(xs, ys, width=width, label=_STRATEGY_TITLES.get(strategy, strategy))
    ax.set_xticks(range(len(BUCKET_LABELS)))
    ax.set_xticklabels(BUCKET_LABELS)
    ax.set_xlabel("questions asked to solve")
    ax.set_ylabel("games")
    ax.set_title("Questions needed per strategy")
    ax.legend()
    fig.tight_layout()
    bucket_path = out_dir / "buckets.png"
    fig.savefig(bucket_path, dpi=120)
    plt.close(fig)
    paths.append(bucket_path)

    curves = metrics.rank_cumulative()
    fig, ax = plt.subplots(figsize=(7, 4))
    ranks = list(range(1, 6))
    for strategy in metrics.strategies:
        ax.plot(
            ranks,
            curves[strategy],
            marker="o",
            label=_STRATEGY_TITLES.get(strategy, strategy),
        )
    ax.set_xticks(ranks)
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("rank n")
    ax.set_ylabel("P(correct within rank n, first attempt)")
    ax.set_title("Rank-cumulative success")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    rank_path = out_dir / "rank_cumulative.png"
    fig.savefig(rank_path, dpi=120)
    plt.close(fig)
    paths.append(rank_path)

    return paths


def write_report(metrics: RunMetrics, out_dir: str | Path) -> dict[str, Path]:
    """Write the full bench report bundle: JSON, CSV, figures, text tables."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {
        "json": write_json(metrics, out_dir / "report.json"),
        "csv": write_csv(metrics, out_dir / "games.csv"),
    }
    for path in write_figures(metrics, out_dir):
        outputs[path.stem] = path
    text = render_tables(metrics)
    text_path = out_dir / "report.txt"
    text_path.write_text(text, encoding="utf-8")
    outputs["text"] = text_path
    return outputs
