"""End-to-end evaluation orchestration.

``evaluate`` fills a sparse (clip, model, metric) score table with per-cell
error isolation; ``aggregate`` turns a table into a leaderboard; ``report``
renders leaderboard and table as JSON / markdown / CSV bundle.

Determinism contract: identical inputs, seed and fixtures produce a
bit-identical serialized table regardless of worker count.  All reductions
run over sorted keys.
"""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import embedding, fidelity, lexical
from .backends import fnv1a_hex
from .corpus import CaptionRecord, ClipRecord
from .errors import EmptyTable
from .fidelity import EXCLUDED

METRICS = ("rougeL", "meteor", "textsim", "bertscore", "clipscore", "tfs", "efs")

# backend kind required per metric (None = pure lexical)
_METRIC_NEEDS = {
    "rougeL": (),
    "meteor": (),
    "textsim": ("sentence",),
    "bertscore": ("tokens",),
    "clipscore": ("visual",),
    "tfs": ("nli",),
    "efs": ("ner",),
}


@dataclass
class RunConfig:
    metrics: tuple[str, ...]
    backends: dict = field(default_factory=dict)   # kind name -> backend object
    tau: float = fidelity.DEFAULT_TAU
    theta: float = fidelity.DEFAULT_THETA
    frame_budget: int = embedding.DEFAULT_FRAME_BUDGET
    seed: int = 0
    workers: int = 1
    frames: dict[str, list] = field(default_factory=dict)  # clip_id -> frame vectors
    match_resources: lexical.MatchResources = field(default_factory=lexical.MatchResources)

    def __post_init__(self):
        unknown = [m for m in self.metrics if m not in METRICS]
        if unknown:
            raise ValueError(f"unknown metrics: {unknown}")
        for metric in self.metrics:
            for kind in _METRIC_NEEDS[metric]:
                if kind not in self.backends:
                    raise ValueError(f"metric {metric!r} requires a {kind!r} backend")

    def fingerprint(self) -> str:
        desc = {
            "metrics": sorted(self.metrics),
            "tau": self.tau,
            "theta": self.theta,
            "frame_budget": self.frame_budget,
            "seed": self.seed,
            "backends": {
                k: getattr(b, "identity", str(type(b).__name__))
                for k, b in sorted(self.backends.items())
            },
        }
        return fnv1a_hex(json.dumps(desc, sort_keys=True))


@dataclass(frozen=True)
class Cell:
    value: float | None
    excluded: bool = False
    error: str | None = None


@dataclass
class ScoreTable:
    cells: dict[tuple[str, str, str], Cell]
    provenance: dict
    tfs_both_empty: list[tuple[str, str]] = field(default_factory=list)
    caption_stats: dict[str, float] = field(default_factory=dict)  # model -> mean words
    clip_sources: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "provenance": self.provenance,
            "cells": [
                {
                    "clip_id": c,
                    "model_id": m,
                    "metric": k,
                    "value": cell.value,
                    "excluded": cell.excluded,
                    "error": cell.error,
                }
                for (c, m, k), cell in sorted(self.cells.items())
            ],
            "tfs_both_empty": sorted(list(p) for p in self.tfs_both_empty),
            "caption_stats": dict(sorted(self.caption_stats.items())),
            "clip_sources": dict(sorted(self.clip_sources.items())),
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "ScoreTable":
        data = json.loads(text)
        cells = {
            (rec["clip_id"], rec["model_id"], rec["metric"]): Cell(
                value=rec["value"], excluded=rec["excluded"], error=rec["error"]
            )
            for rec in data["cells"]
        }
        return cls(
            cells=cells,
            provenance=data.get("provenance", {}),
            tfs_both_empty=[tuple(p) for p in data.get("tfs_both_empty", [])],
            caption_stats=data.get("caption_stats", {}),
            clip_sources=data.get("clip_sources", {}),
        )


@dataclass
class LeaderboardRow:
    model_id: str
    mean: float | None
    n_evaluated: int
    n_excluded: int


@dataclass
class Leaderboard:
    per_metric: dict[str, list[LeaderboardRow]]
    best: dict[str, str]
    caption_stats: dict[str, float]
    tfs_excluding_empty: dict[str, LeaderboardRow] = field(default_factory=dict)


class _PartialWriter:
    """Single-owner append-only writer for resumable runs."""

    def __init__(self, path: Path | None):
        self.path = path
        self._lock = threading.Lock()
        self._fh = path.open("a", encoding="utf-8") if path else None

    def write(self, key, cell: Cell, both_empty: bool = False):
        if self._fh is None:
            return
        rec = {
            "clip_id": key[0],
            "model_id": key[1],
            "metric": key[2],
            "value": cell.value,
            "excluded": cell.excluded,
            "error": cell.error,
        }
        if both_empty:
            rec["tfs_both_empty"] = True
        with self._lock:
            self._fh.write(json.dumps(rec, sort_keys=True) + "\n")
            self._fh.flush()

    def close(self):
        if self._fh:
            self._fh.close()


def load_partial(
    path: str | Path,
) -> tuple[dict[tuple[str, str, str], Cell], set[tuple[str, str]]]:
    path = Path(path)
    cells: dict[tuple[str, str, str], Cell] = {}
    both_empty: set[tuple[str, str]] = set()
    if not path.exists():
        return cells, both_empty
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        cells[(rec["clip_id"], rec["model_id"], rec["metric"])] = Cell(
            value=rec["value"], excluded=rec["excluded"], error=rec["error"]
        )
        if rec.get("tfs_both_empty"):
            both_empty.add((rec["clip_id"], rec["model_id"]))
    return cells, both_empty


def _caption_word_stats(captions: list[CaptionRecord]) -> dict[str, float]:
    words: dict[str, list[int]] = {}
    for cap in captions:
        words.setdefault(cap.model_id, []).append(len(cap.caption_text.split()))
    return {
        m: sum(counts) / len(counts) for m, counts in sorted(words.items())
    }


def evaluate(
    clips: list[ClipRecord],
    captions: list[CaptionRecord],
    config: RunConfig,
    partial_path: str | Path | None = None,
) -> ScoreTable:
    """Compute every selected metric for every (clip, model) pair.

    Per-cell failures are recorded in the cell's error slot, never raised.
    Clips a model did not caption get Excluded cells.  When ``partial_path``
    is given, previously computed cells are reused and new ones appended, so
    an interrupted run can resume.
    """
    clip_by_id = {c.clip_id: c for c in clips}
    caption_by_key = {(c.clip_id, c.model_id): c for c in captions}
    models = sorted({c.model_id for c in captions})
    clip_ids = sorted(clip_by_id)

    done, both_empty_done = (
        load_partial(partial_path) if partial_path else ({}, set())
    )
    writer = _PartialWriter(Path(partial_path) if partial_path else None)

    labels = fidelity.theme_labels()
    theme_config = fidelity.ThemeClassifierConfig(tau=config.tau)
    match_config = fidelity.EntityMatchConfig(theta=config.theta)

    # reference-side theme vectors and entity sets are shared across models
    ref_lock = threading.Lock()
    ref_themes: dict[str, tuple] = {}
    ref_entities: dict[str, frozenset] = {}

    def reference_themes(clip: ClipRecord):
        with ref_lock:
            if clip.clip_id in ref_themes:
                return ref_themes[clip.clip_id]
        vec = fidelity.classify_themes(
            clip.reference_description, labels, config.backends["nli"], theme_config
        )
        with ref_lock:
            ref_themes[clip.clip_id] = vec
        return vec

    def reference_entities(clip: ClipRecord):
        with ref_lock:
            if clip.clip_id in ref_entities:
                return ref_entities[clip.clip_id]
        ents = fidelity.extract_entities(clip.reference_description, config.backends["ner"])
        with ref_lock:
            ref_entities[clip.clip_id] = ents
        return ents

    both_empty: set[tuple[str, str]] = set(both_empty_done)

    def compute_cell(clip: ClipRecord, model_id: str, metric: str) -> Cell:
        caption = caption_by_key.get((clip.clip_id, model_id))
        if caption is None:
            return Cell(value=None, excluded=True)
        text = caption.caption_text
        reference = clip.reference_description
        if metric == "rougeL":
            res = lexical.rouge_l(lexical.tokenize(text), lexical.tokenize(reference))
            return Cell(value=res.f1)
        if metric == "meteor":
            res = lexical.meteor(
                lexical.tokenize(text), lexical.tokenize(reference), config.match_resources
            )
            return Cell(value=res.score)
        if metric == "textsim":
            return Cell(
                value=embedding.text_similarity(text, reference, config.backends["sentence"])
            )
        if metric == "bertscore":
            res = embedding.bert_score(text, reference, config.backends["tokens"])
            return Cell(value=res.f1)
        if metric == "clipscore":
            frames = config.frames.get(clip.clip_id)
            if not frames:
                return Cell(value=None, error=f"no frame embeddings for clip {clip.clip_id}")
            return Cell(
                value=embedding.clip_score(
                    text, frames, config.backends["visual"], config.frame_budget
                )
            )
        if metric == "tfs":
            gt_vec = reference_themes(clip)
            pred_vec = fidelity.classify_themes(
                text, labels, config.backends["nli"], theme_config
            )
            if not any(gt_vec) and not any(pred_vec):
                with ref_lock:
                    both_empty.add((clip.clip_id, model_id))
            return Cell(value=fidelity.tfs(gt_vec, pred_vec))
        if metric == "efs":
            gt_ents = reference_entities(clip)
            model_ents = fidelity.extract_entities(text, config.backends["ner"])
            res = fidelity.efs(gt_ents, model_ents, match_config)
            if res.value == EXCLUDED:
                return Cell(value=None, excluded=True)
            return Cell(value=res.value)
        raise ValueError(f"unknown metric {metric!r}")

    def work(key):
        clip_id, model_id, metric = key
        if key in done:
            return key, done[key]
        try:
            cell = compute_cell(clip_by_id[clip_id], model_id, metric)
        except Exception as exc:  # per-cell isolation
            cell = Cell(value=None, error=f"{type(exc).__name__}: {exc}")
        writer.write(
            key, cell, both_empty=(metric == "tfs" and (clip_id, model_id) in both_empty)
        )
        return key, cell

    keys = [
        (clip_id, model_id, metric)
        for clip_id in clip_ids
        for model_id in models
        for metric in sorted(config.metrics)
    ]
    cells: dict[tuple[str, str, str], Cell] = {}
    try:
        if config.workers <= 1:
            for key in keys:
                key, cell = work(key)
                cells[key] = cell
        else:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                for key, cell in pool.map(work, keys):
                    cells[key] = cell
    finally:
        writer.close()

    provenance = {
        "config_hash": config.fingerprint(),
        "seed": config.seed,
        "metrics": sorted(config.metrics),
        "tau": config.tau,
        "theta": config.theta,
        "frame_budget": config.frame_budget,
        "backends": {
            k: getattr(b, "identity", type(b).__name__)
            for k, b in sorted(config.backends.items())
        },
        "n_clips": len(clip_ids),
        "n_models": len(models),
    }
    return ScoreTable(
        cells=cells,
        provenance=provenance,
        tfs_both_empty=sorted(both_empty),
        caption_stats=_caption_word_stats(captions),
        clip_sources={c.clip_id: c.source_dataset for c in clips},
    )


def aggregate(table: ScoreTable) -> Leaderboard:
    """Per-metric per-model arithmetic mean over non-Excluded, error-free
    cells, reduced in sorted key order.  TFS is additionally reported with
    both-empty theme clips excluded.
    """
    if not table.cells:
        raise EmptyTable("cannot aggregate an empty score table")
    metrics = sorted({k[2] for k in table.cells})
    models = sorted({k[1] for k in table.cells})
    both_empty = {tuple(p) for p in table.tfs_both_empty}

    per_metric: dict[str, list[LeaderboardRow]] = {}
    best: dict[str, str] = {}
    tfs_excl: dict[str, LeaderboardRow] = {}

    for metric in metrics:
        rows = []
        for model in models:
            values = []
            n_excluded = 0
            excl_values = []
            for (clip_id, model_id, m), cell in sorted(table.cells.items()):
                if m != metric or model_id != model:
                    continue
                if cell.excluded:
                    n_excluded += 1
                    continue
                if cell.error is not None or cell.value is None:
                    continue
                values.append(cell.value)
                if metric == "tfs" and (clip_id, model_id) not in both_empty:
                    excl_values.append(cell.value)
            mean = sum(values) / len(values) if values else None
            rows.append(
                LeaderboardRow(
                    model_id=model, mean=mean, n_evaluated=len(values), n_excluded=n_excluded
                )
            )
            if metric == "tfs":
                tfs_excl[model] = LeaderboardRow(
                    model_id=model,
                    mean=sum(excl_values) / len(excl_values) if excl_values else None,
                    n_evaluated=len(excl_values),
                    n_excluded=n_excluded + (len(values) - len(excl_values)),
                )
        rows.sort(key=lambda r: (-(r.mean if r.mean is not None else float("-inf")), r.model_id))
        per_metric[metric] = rows
        scored = [r for r in rows if r.mean is not None]
        if scored:
            best[metric] = scored[0].model_id
    return Leaderboard(
        per_metric=per_metric,
        best=best,
        caption_stats=table.caption_stats,
        tfs_excluding_empty=tfs_excl,
    )
