"""Render a leaderboard and score table as JSON, markdown or a CSV bundle.

Markdown emits one leaderboard table per source dataset with the column order
Text Sim., CLIPScore, METEOR, ROUGE-L, BERTScore F1 (then TFS / EFS when
present), best score per column in bold.  The CSV bundle is plot-ready data:
per-clip scores, per-model similarity distributions and caption-length stats.
No plots are rendered.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path

from .harness import Leaderboard, LeaderboardRow, ScoreTable, aggregate

_COLUMN_ORDER = ["textsim", "clipscore", "meteor", "rougeL", "bertscore", "tfs", "efs"]
_COLUMN_TITLES = {
    "textsim": "Text Sim.",
    "clipscore": "CLIPScore",
    "meteor": "METEOR",
    "rougeL": "ROUGE-L",
    "bertscore": "BERTScore F1",
    "tfs": "TFS",
    "efs": "EFS",
}


def leaderboard_to_dict(board: Leaderboard) -> dict:
    return {
        "per_metric": {
            metric: [asdict(row) for row in rows]
            for metric, rows in sorted(board.per_metric.items())
        },
        "best": dict(sorted(board.best.items())),
        "caption_stats": dict(sorted(board.caption_stats.items())),
        "tfs_excluding_empty": {
            model: asdict(row)
            for model, row in sorted(board.tfs_excluding_empty.items())
        },
    }


def _dataset_tables(table: ScoreTable) -> dict[str, ScoreTable]:
    """Split a table by clip source dataset; single 'all' group if unknown."""
    sources = set(table.clip_sources.values())
    if not sources:
        return {"all": table}
    out = {}
    for source in sorted(sources):
        clip_ids = {c for c, s in table.clip_sources.items() if s == source}
        cells = {k: v for k, v in table.cells.items() if k[0] in clip_ids}
        if not cells:
            continue
        out[source] = ScoreTable(
            cells=cells,
            provenance=table.provenance,
            tfs_both_empty=[p for p in table.tfs_both_empty if p[0] in clip_ids],
            caption_stats=table.caption_stats,
            clip_sources={c: s for c, s in table.clip_sources.items() if s == source},
        )
    return out


def _markdown_table(board: Leaderboard) -> str:
    metrics = [m for m in _COLUMN_ORDER if m in board.per_metric]
    metrics += [m for m in sorted(board.per_metric) if m not in metrics]
    models = sorted({row.model_id for rows in board.per_metric.values() for row in rows})
    means = {
        (metric, row.model_id): row.mean
        for metric, rows in board.per_metric.items()
        for row in rows
    }
    lines = ["| Model | " + " | ".join(_COLUMN_TITLES.get(m, m) for m in metrics) + " |"]
    lines.append("|" + "---|" * (len(metrics) + 1))
    for model in models:
        row = [model]
        for metric in metrics:
            mean = means.get((metric, model))
            if mean is None:
                row.append("-")
            elif board.best.get(metric) == model:
                row.append(f"**{mean:.4f}**")
            else:
                row.append(f"{mean:.4f}")
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines)


def render_markdown(board: Leaderboard, table: ScoreTable) -> str:
    parts = ["# Leaderboard", ""]
    for source, sub in _dataset_tables(table).items():
        sub_board = aggregate(sub)
        parts.append(f"## {source}")
        parts.append("")
        parts.append(_markdown_table(sub_board))
        parts.append("")
    if board.caption_stats:
        parts.append("## Mean caption length (words)")
        parts.append("")
        parts.append("| Model | Mean words |")
        parts.append("|---|---|")
        for model, mean in sorted(board.caption_stats.items()):
            parts.append(f"| {model} | {mean:.2f} |")
        parts.append("")
    return "\n".join(parts)


def render_json(board: Leaderboard, table: ScoreTable) -> str:
    payload = {
        "leaderboard": leaderboard_to_dict(board),
        "table": json.loads(table.to_json()),
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def render_csv_bundle(board: Leaderboard, table: ScoreTable, out_dir: Path, tag: str) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    path = out_dir / f"per_clip_scores-{tag}.csv"
    _write_csv(
        path,
        ["clip_id", "model_id", "metric", "value", "excluded", "error"],
        [
            [c, m, k, "" if cell.value is None else repr(cell.value),
             int(cell.excluded), cell.error or ""]
            for (c, m, k), cell in sorted(table.cells.items())
        ],
    )
    written.append(path)

    path = out_dir / f"leaderboard-{tag}.csv"
    _write_csv(
        path,
        ["metric", "model_id", "mean", "n_evaluated", "n_excluded", "best"],
        [
            [metric, row.model_id,
             "" if row.mean is None else repr(row.mean),
             row.n_evaluated, row.n_excluded,
             int(board.best.get(metric) == row.model_id)]
            for metric, rows in sorted(board.per_metric.items())
            for row in rows
        ],
    )
    written.append(path)

    # per-model similarity distributions (plot-ready for shuffle-style figures)
    models = sorted({m for _, m, k in table.cells if k == "textsim"})
    for model in models:
        path = out_dir / f"textsim_distribution-{model}-{tag}.csv"
        _write_csv(
            path,
            ["clip_id", "similarity"],
            [
                [c, repr(cell.value)]
                for (c, m, k), cell in sorted(table.cells.items())
                if k == "textsim" and m == model and cell.value is not None
            ],
        )
        written.append(path)

    if board.caption_stats:
        path = out_dir / f"caption_lengths-{tag}.csv"
        _write_csv(
            path,
            ["model_id", "mean_words"],
            [[m, repr(v)] for m, v in sorted(board.caption_stats.items())],
        )
        written.append(path)

    if board.tfs_excluding_empty:
        path = out_dir / f"tfs_excluding_empty-{tag}.csv"
        _write_csv(
            path,
            ["model_id", "mean", "n_evaluated", "n_excluded"],
            [
                [m, "" if r.mean is None else repr(r.mean), r.n_evaluated, r.n_excluded]
                for m, r in sorted(board.tfs_excluding_empty.items())
            ],
        )
        written.append(path)
    return written


def report(
    board: Leaderboard,
    table: ScoreTable,
    fmt: str,
    out_dir: str | Path,
) -> list[Path]:
    """Write report files; filenames embed the run's config hash and seed."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tag = "{}-s{}".format(
        str(table.provenance.get("config_hash", "nohash"))[:8],
        table.provenance.get("seed", 0),
    )
    if fmt == "json":
        path = out_dir / f"report-{tag}.json"
        path.write_text(render_json(board, table), encoding="utf-8")
        return [path]
    if fmt == "markdown":
        path = out_dir / f"leaderboard-{tag}.md"
        path.write_text(render_markdown(board, table), encoding="utf-8")
        return [path]
    if fmt == "csv-bundle":
        return render_csv_bundle(board, table, out_dir, tag)
    raise ValueError(f"unknown report format {fmt!r}")
