import json

import numpy as np
import pytest

from newscap import backends as be
from newscap.report import report as write_report
from newscap.corpus import CaptionRecord, ClipRecord
from newscap.errors import EmptyTable
from newscap.harness import (
    Cell,
    RunConfig,
    ScoreTable,
    aggregate,
    evaluate,
)


def make_corpus(n_clips=4, models=("m1", "m2")):
    clips = [
        ClipRecord(
            clip_id=f"c{i:03d}",
            duration_s=30 + i,
            title=f"clip {i}",
            reference_description=f"reference description number {i} about topic {i % 3}",
            source_dataset="BBC" if i % 2 else "ChTV",
        )
        for i in range(n_clips)
    ]
    captions = [
        CaptionRecord(
            clip_id=c.clip_id,
            model_id=m,
            caption_text=f"{m} caption for {c.clip_id} about topic {i % 3}",
        )
        for i, c in enumerate(clips)
        for m in models
    ]
    return clips, captions


def stub_backends(seed=0):
    return {
        "sentence": be.HashStubSentenceEmbedder(dim=32, seed=seed),
        "tokens": be.HashStubTokenEmbedder(dim=16, seed=seed),
        "visual": be.HashStubVisualTextEmbedder(dim=16, seed=seed),
        "nli": be.HashStubNliScorer(seed=seed),
        "ner": be.GazetteerEntityExtractor({"topic 0": "ORG", "topic 1": "ORG"}),
    }


def stub_frames(clips, dim=16, seed=0):
    rng = np.random.default_rng(seed)
    return {c.clip_id: rng.standard_normal((3, dim)).tolist() for c in clips}


class TestEvaluate:
    def test_cell_cardinality(self):
        clips, captions = make_corpus(2, ("m1", "m2"))
        config = RunConfig(metrics=("rougeL",))
        table = evaluate(clips, captions, config)
        assert len(table.cells) == 4

    def test_efs_exclusion_for_entity_free_reference(self):
        clips = [ClipRecord("c1", 30, "", "no named things here at all")]
        captions = [CaptionRecord("c1", "m1", "caption without entities")]
        config = RunConfig(
            metrics=("efs",), backends={"ner": be.GazetteerEntityExtractor({})}
        )
        table = evaluate(clips, captions, config)
        cell = table.cells[("c1", "m1", "efs")]
        assert cell.excluded and cell.value is None

    def test_missing_caption_is_excluded_cell(self):
        clips, captions = make_corpus(2, ("m1", "m2"))
        captions = [c for c in captions if not (c.clip_id == "c001" and c.model_id == "m2")]
        config = RunConfig(metrics=("rougeL",))
        table = evaluate(clips, captions, config)
        assert table.cells[("c001", "m2", "rougeL")].excluded

    def test_per_cell_error_isolation(self):
        class ExplodingEmbedder:
            identity = "exploding"

            def sentence_embed(self, text):
                raise RuntimeError("backend down")

        clips, captions = make_corpus(1, ("m1",))
        config = RunConfig(
            metrics=("rougeL", "textsim"), backends={"sentence": ExplodingEmbedder()}
        )
        table = evaluate(clips, captions, config)
        assert table.cells[("c000", "m1", "rougeL")].value is not None
        bad = table.cells[("c000", "m1", "textsim")]
        assert bad.error and "backend down" in bad.error

    def test_bit_identical_rerun(self):
        clips, captions = make_corpus(6)
        config = RunConfig(metrics=("rougeL", "textsim", "tfs"), backends=stub_backends())
        first = evaluate(clips, captions, config).to_json()
        second = evaluate(clips, captions, config).to_json()
        assert first == second

    def test_worker_invariance(self):
        clips, captions = make_corpus(10, ("m1", "m2", "m3"))
        tables = []
        for workers in (1, 8):
            config = RunConfig(
                metrics=("rougeL", "meteor", "textsim", "bertscore", "tfs", "efs"),
                backends=stub_backends(),
                workers=workers,
            )
            tables.append(evaluate(clips, captions, config).to_json())
        assert tables[0] == tables[1]

    def test_resume_equals_uninterrupted(self, tmp_path):
        clips, captions = make_corpus(5)
        config = RunConfig(metrics=("rougeL", "textsim"), backends=stub_backends())
        full = evaluate(clips, captions, config)

        # simulate a killed run: only half the cells were committed
        partial = tmp_path / "partial.jsonl"
        keys = sorted(full.cells)[: len(full.cells) // 2]
        with partial.open("w") as fh:
            for c, m, k in keys:
                cell = full.cells[(c, m, k)]
                fh.write(json.dumps({
                    "clip_id": c, "model_id": m, "metric": k,
                    "value": cell.value, "excluded": cell.excluded, "error": cell.error,
                }) + "\n")
        resumed = evaluate(clips, captions, config, partial_path=partial)
        assert resumed.to_json() == full.to_json()

    def test_config_requires_backends(self):
        with pytest.raises(ValueError):
            RunConfig(metrics=("textsim",))

    def test_unknown_metric_rejected(self):
        with pytest.raises(ValueError):
            RunConfig(metrics=("bleu",))

    def test_clipscore_uses_frames(self):
        clips, captions = make_corpus(3, ("m1",))
        config = RunConfig(
            metrics=("clipscore",),
            backends=stub_backends(),
            frames=stub_frames(clips),
        )
        table = evaluate(clips, captions, config)
        for key, cell in table.cells.items():
            assert cell.value is not None and -1.0 <= cell.value <= 1.0


class TestAggregate:
    def test_simple_mean(self):
        table = ScoreTable(
            cells={
                ("c1", "m1", "textsim"): Cell(0.2),
                ("c2", "m1", "textsim"): Cell(0.4),
            },
            provenance={},
        )
        board = aggregate(table)
        row = board.per_metric["textsim"][0]
        assert row.mean == pytest.approx(0.3)
        assert row.n_evaluated == 2

    def test_exclusion_skipped_and_counted(self):
        table = ScoreTable(
            cells={
                ("c1", "m1", "efs"): Cell(None, excluded=True),
                ("c2", "m1", "efs"): Cell(0.5),
            },
            provenance={},
        )
        row = aggregate(table).per_metric["efs"][0]
        assert row.mean == pytest.approx(0.5)
        assert row.n_excluded == 1

    def test_empty_table(self):
        with pytest.raises(EmptyTable):
            aggregate(ScoreTable(cells={}, provenance={}))

    def test_best_marker(self):
        table = ScoreTable(
            cells={
                ("c1", "m1", "rougeL"): Cell(0.9),
                ("c1", "m2", "rougeL"): Cell(0.3),
            },
            provenance={},
        )
        assert aggregate(table).best["rougeL"] == "m1"

    def test_tfs_reported_with_and_without_both_empty(self):
        table = ScoreTable(
            cells={
                ("c1", "m1", "tfs"): Cell(1.0),   # both-empty agreement
                ("c2", "m1", "tfs"): Cell(0.5),
            },
            provenance={},
            tfs_both_empty=[("c1", "m1")],
        )
        board = aggregate(table)
        assert board.per_metric["tfs"][0].mean == pytest.approx(0.75)
        assert board.tfs_excluding_empty["m1"].mean == pytest.approx(0.5)

    def test_streaming_sum_oracle(self):
        rng = np.random.default_rng(8)
        cells = {}
        expected = {}
        for m in ("m1", "m2", "m3"):
            values = rng.uniform(size=57)
            total = 0.0
            for i, v in enumerate(values):
                cells[(f"c{i:03d}", m, "rougeL")] = Cell(float(v))
                total += float(v)
            expected[m] = total / len(values)
        board = aggregate(ScoreTable(cells=cells, provenance={}))
        for row in board.per_metric["rougeL"]:
            assert row.mean == pytest.approx(expected[row.model_id], abs=1e-12)


class TestScoreTableSerialization:
    def test_json_roundtrip(self):
        clips, captions = make_corpus(3)
        config = RunConfig(metrics=("rougeL", "tfs"), backends=stub_backends())
        table = evaluate(clips, captions, config)
        parsed = ScoreTable.from_json(table.to_json())
        assert parsed.to_json() == table.to_json()
        assert parsed.cells == table.cells


class TestReport:
    def make_board(self):
        clips, captions = make_corpus(4)
        config = RunConfig(
            metrics=("rougeL", "meteor", "textsim", "bertscore", "tfs", "efs"),
            backends=stub_backends(),
        )
        table = evaluate(clips, captions, config)
        return aggregate(table), table

    def test_json_report_roundtrips(self, tmp_path):
        board, table = self.make_board()
        paths = write_report(board, table, "json", tmp_path)
        data = json.loads(paths[0].read_text())
        assert json.loads(json.dumps(data)) == data
        assert "leaderboard" in data and "table" in data

    def test_markdown_column_order(self, tmp_path):
        board, table = self.make_board()
        paths = write_report(board, table, "markdown", tmp_path)
        text = paths[0].read_text()
        header = next(l for l in text.splitlines() if l.startswith("| Model"))
        cols = [c.strip() for c in header.strip("|").split("|")][1:]
        assert cols[:4] == ["Text Sim.", "METEOR", "ROUGE-L", "BERTScore F1"] or \
            cols[:5] == ["Text Sim.", "CLIPScore", "METEOR", "ROUGE-L", "BERTScore F1"]
        assert "**" in text  # best-per-metric bolding

    def test_markdown_one_table_per_dataset(self, tmp_path):
        board, table = self.make_board()
        paths = write_report(board, table, "markdown", tmp_path)
        text = paths[0].read_text()
        assert "## BBC" in text and "## ChTV" in text

    def test_csv_bundle(self, tmp_path):
        board, table = self.make_board()
        paths = write_report(board, table, "csv-bundle", tmp_path)
        names = {p.name.split("-")[0] for p in paths}
        assert "per_clip_scores" in names
        assert "leaderboard" in names
        assert any(p.name.startswith("textsim_distribution") for p in paths)

    def test_filenames_embed_config_hash_and_seed(self, tmp_path):
        board, table = self.make_board()
        paths = write_report(board, table, "json", tmp_path)
        tag = table.provenance["config_hash"][:8]
        assert tag in paths[0].name
        assert f"s{table.provenance['seed']}" in paths[0].name
