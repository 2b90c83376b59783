"""newscap command-line interface.

Exit codes: 0 success, 2 config error, 3 unrecoverable backend error,
4 validation failure.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from . import backends as be
from . import corpus as corpus_mod
from . import embedding, harness
from .report import report as write_report
from .errors import BackendError, MalformedFile, NewscapError

EXIT_CONFIG = 2
EXIT_BACKEND = 3
EXIT_VALIDATION = 4

_BACKEND_KINDS = ("sentence", "tokens", "visual", "nli", "ner")


def _build_backend(kind: str, spec: str):
    family, _, arg = spec.partition(":")
    if family == "fixture":
        store = be.FixtureStore.load(arg)
        return {
            "sentence": be.FixtureSentenceEmbedder,
            "tokens": be.FixtureTokenEmbedder,
            "visual": be.FixtureVisualTextEmbedder,
            "nli": be.FixtureNliScorer,
            "ner": be.FixtureEntityExtractor,
        }[kind](store)
    if family == "http":
        client = be.RemoteClient(arg)
        return {
            "sentence": be.RemoteSentenceEmbedder,
            "tokens": be.RemoteTokenEmbedder,
            "visual": be.RemoteVisualTextEmbedder,
            "nli": be.RemoteNliScorer,
            "ner": be.RemoteEntityExtractor,
        }[kind](client, identity=f"remote:{arg}")
    if family == "stub":
        seed = int(arg) if arg else 0
        return {
            "sentence": lambda: be.HashStubSentenceEmbedder(seed=seed),
            "tokens": lambda: be.HashStubTokenEmbedder(seed=seed),
            "visual": lambda: be.HashStubVisualTextEmbedder(seed=seed),
            "nli": lambda: be.HashStubNliScorer(seed=seed),
        }[kind]()
    if family == "gazetteer" and kind == "ner":
        return be.GazetteerEntityExtractor.from_file(arg)
    raise click.UsageError(f"unknown backend spec {spec!r} for kind {kind!r}")


def _parse_backends(specs: tuple[str, ...]) -> dict:
    bound = {}
    for spec in specs:
        kind, sep, rest = spec.partition("=")
        if not sep or kind not in _BACKEND_KINDS:
            raise click.UsageError(
                f"backend binding must be KIND=FAMILY:ARG with KIND in {_BACKEND_KINDS}"
            )
        bound[kind] = _build_backend(kind, rest)
    return bound


def _load_bundle(path: str) -> tuple[list, list]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read corpus bundle {path}: {exc}")
    clips = [
        corpus_mod.ClipRecord(
            clip_id=c["clip_id"],
            duration_s=c["duration_s"],
            title=c.get("title", ""),
            reference_description=c["description"],
            thematic_descriptors=tuple(c.get("descriptors", [])),
            source_dataset=c.get("source", "other"),
        )
        for c in data["clips"]
    ]
    captions = [
        corpus_mod.CaptionRecord(
            clip_id=c["clip_id"], model_id=c["model_id"], caption_text=c["caption"]
        )
        for c in data["captions"]
    ]
    return clips, captions


def _load_frames(path: str) -> dict:
    frames = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        frames[rec["clip_id"]] = rec["frames"]
    return frames


@click.group()
def main():
    """Benchmark harness for news-video caption evaluation."""


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path())
@click.option("--manifest-format", type=click.Choice(["json-lines", "json-array"]),
              default="json-lines", show_default=True)
@click.option("--captions", "caption_paths", multiple=True, required=True, type=click.Path())
@click.option("--tag-dict", "tag_dict_path", type=click.Path(), default=None)
@click.option("--min-s", default=corpus_mod.DEFAULT_MIN_DURATION_S, show_default=True)
@click.option("--max-s", default=corpus_mod.DEFAULT_MAX_DURATION_S, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def ingest(manifest_path, manifest_format, caption_paths, tag_dict_path, min_s, max_s, out_path):
    """Load, validate, filter and bundle manifest + caption sets."""
    try:
        manifest = corpus_mod.load_manifest(manifest_path, manifest_format)
        caption_records = []
        caption_errors = []
        for path in caption_paths:
            loaded = corpus_mod.load_captions(path)
            caption_records.extend(loaded.records)
            caption_errors.extend(loaded.errors)
        kept, dropped = corpus_mod.filter_clips(manifest.records, min_s, max_s)
        unmapped_all: list[str] = []
        if tag_dict_path:
            tag_dict = corpus_mod.load_tag_dictionary(tag_dict_path)
            translated_clips = []
            for clip in kept:
                tags, unmapped = corpus_mod.translate_tags(
                    list(clip.thematic_descriptors), tag_dict
                )
                unmapped_all.extend(unmapped)
                translated_clips.append(
                    corpus_mod.ClipRecord(
                        clip_id=clip.clip_id,
                        duration_s=clip.duration_s,
                        title=clip.title,
                        reference_description=clip.reference_description,
                        thematic_descriptors=tuple(tags),
                        source_dataset=clip.source_dataset,
                    )
                )
            kept = translated_clips
    except MalformedFile as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except NewscapError as exc:
        click.echo(f"validation error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)

    bundle = {
        "clips": [
            {
                "clip_id": c.clip_id,
                "duration_s": c.duration_s,
                "title": c.title,
                "description": c.reference_description,
                "descriptors": list(c.thematic_descriptors),
                "source": c.source_dataset,
            }
            for c in kept
        ],
        "captions": [
            {"clip_id": c.clip_id, "model_id": c.model_id, "caption": c.caption_text}
            for c in caption_records
        ],
        "meta": {
            "dropped_clips": dropped,
            "record_errors": [str(e) for e in manifest.errors + caption_errors],
            "unmapped_tags": sorted(set(unmapped_all)),
            "duration_bounds": [min_s, max_s],
        },
    }
    Path(out_path).write_text(
        json.dumps(bundle, sort_keys=True, separators=(",", ":")), encoding="utf-8"
    )
    click.echo(
        f"bundled {len(kept)} clips ({dropped} dropped), "
        f"{len(caption_records)} captions, "
        f"{len(manifest.errors) + len(caption_errors)} record errors"
    )


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--metrics", default="rougeL,meteor", show_default=True)
@click.option("--backend", "backend_specs", multiple=True)
@click.option("--tau", default=0.5, show_default=True)
@click.option("--theta", default=85.0, show_default=True)
@click.option("--frames", "frame_budget", default=embedding.DEFAULT_FRAME_BUDGET, show_default=True)
@click.option("--frames-file", type=click.Path(), default=None,
              help="JSON-lines frame embeddings for clipscore")
@click.option("--seed", default=0, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--synonyms", "synonym_path", type=click.Path(), default=None,
              help="JSON synonym table enabling the METEOR synonym stage")
@click.option("--resume", "resume_path", type=click.Path(), default=None,
              help="partial-table file for resumable runs")
@click.option("--out", "out_path", required=True, type=click.Path())
def evaluate(corpus_path, metrics, backend_specs, tau, theta, frame_budget,
             frames_file, seed, workers, synonym_path, resume_path, out_path):
    """Compute the per-clip score table for the selected metrics."""
    clips, captions = _load_bundle(corpus_path)
    from .lexical import MatchResources

    resources = (
        MatchResources.from_synonym_file(synonym_path) if synonym_path else MatchResources()
    )
    try:
        config = harness.RunConfig(
            metrics=tuple(m.strip() for m in metrics.split(",") if m.strip()),
            backends=_parse_backends(backend_specs),
            tau=tau,
            theta=theta,
            frame_budget=frame_budget,
            seed=seed,
            workers=workers,
            frames=_load_frames(frames_file) if frames_file else {},
            match_resources=resources,
        )
    except ValueError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        table = harness.evaluate(clips, captions, config, partial_path=resume_path)
    except BackendError as exc:
        click.echo(f"backend error: {exc}", err=True)
        sys.exit(EXIT_BACKEND)
    Path(out_path).write_text(table.to_json(), encoding="utf-8")
    errors = sum(1 for c in table.cells.values() if c.error)
    click.echo(f"wrote {len(table.cells)} cells ({errors} cell errors) to {out_path}")


@main.command()
@click.option("--table", "table_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
def rank(table_path, out_path):
    """Per-model MRR from the table's text-similarity cells.

    Restricted to the complete clip subset on which every model has a
    similarity (MRR is undefined with missing competitors).
    """
    table = harness.ScoreTable.from_json(Path(table_path).read_text(encoding="utf-8"))
    sims = {
        (c, m): cell.value
        for (c, m, k), cell in table.cells.items()
        if k == "textsim" and cell.value is not None
    }
    if not sims:
        click.echo("no textsim cells in table", err=True)
        sys.exit(EXIT_VALIDATION)
    models = sorted({m for _, m in sims})
    complete_clips = sorted(
        {c for c, _ in sims if all((c, m) in sims for m in models)}
    )
    sims = {(c, m): v for (c, m), v in sims.items() if c in complete_clips}
    result = embedding.mrr(sims)
    payload = {
        "per_model_mrr": dict(sorted(result.per_model_mrr.items())),
        "per_clip_ranks": [
            {"clip_id": c, "model_id": m, "rank": r}
            for (c, m), r in sorted(result.per_clip_ranks.items())
        ],
        "n_clips": len(complete_clips),
    }
    Path(out_path).write_text(
        json.dumps(payload, sort_keys=True, separators=(",", ":")), encoding="utf-8"
    )
    click.echo(f"MRR over {len(complete_clips)} clips x {len(models)} models -> {out_path}")


@main.command("shuffle-test")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--model", "model_id", required=True)
@click.option("--backend", "backend_specs", multiple=True, required=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def shuffle_test(corpus_path, model_id, backend_specs, seed, out_path):
    """Shuffled-pairs validation of text similarity for one model."""
    clips, captions = _load_bundle(corpus_path)
    bound = _parse_backends(backend_specs)
    if "sentence" not in bound:
        click.echo("config error: shuffle-test needs a sentence backend", err=True)
        sys.exit(EXIT_CONFIG)
    captions_by_clip = {
        c.clip_id: c.caption_text for c in captions if c.model_id == model_id
    }
    try:
        result = embedding.shuffled_pairs_test(
            clips, captions_by_clip, bound["sentence"], seed
        )
    except BackendError as exc:
        click.echo(f"backend error: {exc}", err=True)
        sys.exit(EXIT_BACKEND)
    except NewscapError as exc:
        click.echo(f"validation error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    with Path(out_path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "original_similarity", "shuffled_similarity"])
        for i, (orig, shuf) in enumerate(
            zip(result.original_similarities, result.shuffled_similarities)
        ):
            writer.writerow([i, repr(orig), repr(shuf)])
    click.echo(
        f"model={model_id} n={len(result.original_similarities)} "
        f"mean_gap={result.mean_gap:.6f} effect_size={result.effect_size:.4f} seed={seed}"
    )


@main.command("report")
@click.option("--table", "table_path", required=True, type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["json", "markdown", "csv-bundle"]),
              default="markdown", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def report_cmd(table_path, fmt, out_dir):
    """Render leaderboard and distributions from a score table."""
    table = harness.ScoreTable.from_json(Path(table_path).read_text(encoding="utf-8"))
    board = harness.aggregate(table)
    written = write_report(board, table, fmt, out_dir)
    for path in written:
        click.echo(str(path))


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
def validate(corpus_path):
    """Alignment check plus corpus statistics; exit 4 on misalignment."""
    clips, captions = _load_bundle(corpus_path)
    alignment = corpus_mod.validate_alignment(clips, captions)
    stats = corpus_mod.descriptive_stats(clips)
    click.echo(f"clips: {len(clips)}  captions: {len(captions)}  models: {len(alignment.models)}")
    click.echo(f"complete clip subset: {len(alignment.complete_clip_ids)}")
    for model, missing in sorted(alignment.missing.items()):
        click.echo(f"  model {model} missing {len(missing)} clips: {missing[:5]}")
    if alignment.orphans:
        click.echo(f"  orphan caption clip_ids: {alignment.orphans[:10]}")
    click.echo(f"duration histogram: {stats.duration_histogram}")
    click.echo(f"description words histogram: {stats.description_word_count_histogram}")
    top = sorted(stats.descriptor_frequency.items(), key=lambda kv: -kv[1])[:10]
    click.echo(f"top descriptors: {top}")
    if alignment.missing or alignment.orphans:
        sys.exit(EXIT_VALIDATION)


if __name__ == "__main__":
    main()
