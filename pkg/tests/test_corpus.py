import json

import pytest

from newscap import corpus
from newscap.errors import (
    DuplicateCaptionKey,
    DuplicateClipId,
    InvalidBounds,
    MalformedFile,
)


def write_jsonl(path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")


def clip(clip_id="c1", duration=60.0, description="a short news clip", **kw):
    return corpus.ClipRecord(
        clip_id=clip_id,
        duration_s=duration,
        title=kw.get("title", ""),
        reference_description=description,
        thematic_descriptors=tuple(kw.get("descriptors", ())),
        source_dataset=kw.get("source", "other"),
    )


class TestLoadManifest:
    def test_three_valid_records_in_file_order(self, tmp_path):
        records = [
            {"clip_id": f"c{i}", "duration_s": 30 + i, "description": f"desc {i}"}
            for i in range(3)
        ]
        path = tmp_path / "m.jsonl"
        write_jsonl(path, records)
        loaded = corpus.load_manifest(path)
        assert [c.clip_id for c in loaded.records] == ["c0", "c1", "c2"]
        assert not loaded.errors

    def test_missing_description_collected_not_fatal(self, tmp_path):
        path = tmp_path / "m.jsonl"
        write_jsonl(path, [
            {"clip_id": "c1", "duration_s": 30, "description": "ok"},
            {"clip_id": "c2", "duration_s": 30},
        ])
        loaded = corpus.load_manifest(path)
        assert len(loaded.records) == 1
        assert len(loaded.errors) == 1
        assert "description" in loaded.errors[0].fields

    def test_whitespace_only_description_rejected(self, tmp_path):
        path = tmp_path / "m.jsonl"
        write_jsonl(path, [{"clip_id": "c1", "duration_s": 30, "description": "   "}])
        loaded = corpus.load_manifest(path)
        assert not loaded.records
        assert loaded.errors[0].fields == ["description"]

    def test_duplicate_clip_id_raises(self, tmp_path):
        path = tmp_path / "m.jsonl"
        write_jsonl(path, [
            {"clip_id": "c1", "duration_s": 30, "description": "a"},
            {"clip_id": "c1", "duration_s": 40, "description": "b"},
        ])
        with pytest.raises(DuplicateClipId) as err:
            corpus.load_manifest(path)
        assert err.value.clip_id == "c1"

    def test_json_array_format(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps([
            {"clip_id": "c1", "duration_s": 30, "description": "a"},
        ]), encoding="utf-8")
        loaded = corpus.load_manifest(path, "json-array")
        assert len(loaded.records) == 1

    def test_unparseable_container(self, tmp_path):
        path = tmp_path / "m.jsonl"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(MalformedFile):
            corpus.load_manifest(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MalformedFile):
            corpus.load_manifest(tmp_path / "nope.jsonl")


class TestLoadCaptions:
    def test_two_models_two_clips(self, tmp_path):
        path = tmp_path / "caps.jsonl"
        write_jsonl(path, [
            {"clip_id": c, "model_id": m, "caption": f"{m} on {c}"}
            for c in ("c1", "c2") for m in ("m1", "m2")
        ])
        loaded = corpus.load_captions(path)
        assert len(loaded.records) == 4

    def test_duplicate_key_raises(self, tmp_path):
        path = tmp_path / "caps.jsonl"
        write_jsonl(path, [
            {"clip_id": "c1", "model_id": "m1", "caption": "x"},
            {"clip_id": "c1", "model_id": "m1", "caption": "y"},
        ])
        with pytest.raises(DuplicateCaptionKey):
            corpus.load_captions(path)

    def test_empty_caption_collected(self, tmp_path):
        path = tmp_path / "caps.jsonl"
        write_jsonl(path, [{"clip_id": "c1", "model_id": "m1", "caption": ""}])
        loaded = corpus.load_captions(path)
        assert not loaded.records
        assert loaded.errors[0].fields == ["caption"]


class TestFilterClips:
    def test_boundary_inclusion(self):
        clips = [clip(f"c{i}", d) for i, d in enumerate([5, 10, 299, 300, 301])]
        kept, dropped = corpus.filter_clips(clips, 10, 300)
        assert [c.duration_s for c in kept] == [10, 299, 300]
        assert dropped == 2

    def test_identity_bounds(self):
        clips = [clip(f"c{i}", d) for i, d in enumerate([5, 10, 301])]
        kept, dropped = corpus.filter_clips(clips, 0, float("inf"))
        assert kept == clips
        assert dropped == 0

    def test_inverted_bounds(self):
        with pytest.raises(InvalidBounds):
            corpus.filter_clips([], 300, 10)

    def test_idempotent(self):
        clips = [clip(f"c{i}", d) for i, d in enumerate(range(0, 400, 7))]
        once, _ = corpus.filter_clips(clips, 10, 300)
        twice, dropped = corpus.filter_clips(once, 10, 300)
        assert twice == once
        assert dropped == 0


class TestTranslateTags:
    def test_direct_lookup(self):
        tags, unmapped = corpus.translate_tags(
            ["Clima"], corpus.TagDictionary({"clima": "Weather"})
        )
        assert tags == ["Weather"]
        assert unmapped == []

    def test_miss_passes_through(self):
        tags, unmapped = corpus.translate_tags(["Unknown-Tag"], corpus.TagDictionary({}))
        assert tags == ["Unknown-Tag"]
        assert unmapped == ["Unknown-Tag"]

    @pytest.mark.parametrize("variant", [
        " CLIMA ", "clima", "CLIMA", "Clima", "  clima", "clima  ", "\tclima\n",
        "cLiMa", "CLIMA  ", " Clima", "ClImA ", "  CLIMA  ", "clima\t", " cLIMA",
        "CLima", "cliMA", "\nClima", "clIMA  ", "  cLima", "CLIMa",
    ])
    def test_normalize_then_lookup(self, variant):
        # oracle: strip + lowercase must hit the dictionary entry
        tags, unmapped = corpus.translate_tags(
            [variant], corpus.TagDictionary({"clima": "Weather"})
        )
        assert tags == ["Weather"], variant
        assert unmapped == []

    def test_length_preserved(self):
        src = ["a", "b", "c", "d"]
        tags, _ = corpus.translate_tags(src, corpus.TagDictionary({"b": "B"}))
        assert len(tags) == len(src)


class TestValidateAlignment:
    def test_full_coverage(self):
        clips = [clip("c1"), clip("c2")]
        caps = [
            corpus.CaptionRecord(c, m, "x") for c in ("c1", "c2") for m in ("m1", "m2")
        ]
        report = corpus.validate_alignment(clips, caps)
        assert report.complete_clip_ids == ["c1", "c2"]
        assert report.missing == {}
        assert report.orphans == []

    def test_missing_caption_shrinks_complete_subset(self):
        clips = [clip("c1"), clip("c2"), clip("c3")]
        caps = [corpus.CaptionRecord(c, "m1", "x") for c in ("c1", "c2", "c3")]
        caps += [corpus.CaptionRecord(c, "m2", "x") for c in ("c1", "c2")]
        report = corpus.validate_alignment(clips, caps)
        assert report.missing == {"m2": ["c3"]}
        assert report.complete_clip_ids == ["c1", "c2"]

    def test_orphan_caption(self):
        report = corpus.validate_alignment(
            [clip("c1")], [corpus.CaptionRecord("c9", "m1", "x")]
        )
        assert report.orphans == ["c9"]

    def test_complete_subset_join_cardinality(self):
        clips = [clip(f"c{i}") for i in range(5)]
        caps = [
            corpus.CaptionRecord(f"c{i}", m, "x")
            for i in range(4) for m in ("m1", "m2", "m3")
        ]
        report = corpus.validate_alignment(clips, caps)
        subset = set(report.complete_clip_ids)
        joined = [c for c in caps if c.clip_id in subset]
        assert len(joined) == len(report.models) * len(subset)


class TestDescriptiveStats:
    def test_single_clip(self):
        stats = corpus.descriptive_stats(
            [clip("c1", 10, "one two three")], duration_bin_s=30, word_bin=10
        )
        assert stats.duration_histogram == [(0.0, 1)]
        assert stats.description_word_count_histogram == [(0, 1)]

    def test_empty(self):
        stats = corpus.descriptive_stats([])
        assert stats.duration_histogram == []
        assert stats.description_word_count_histogram == []
        assert stats.descriptor_frequency == {}

    def test_histogram_totals_equal_clip_count(self):
        # counting oracle over 100 synthetic clips
        clips = [
            clip(f"c{i}", duration=i * 3.7, description="w " * (i % 23 + 1))
            for i in range(100)
        ]
        stats = corpus.descriptive_stats(clips, duration_bin_s=25, word_bin=5)
        assert sum(n for _, n in stats.duration_histogram) == 100
        assert sum(n for _, n in stats.description_word_count_histogram) == 100

    def test_bad_bins(self):
        with pytest.raises(InvalidBounds):
            corpus.descriptive_stats([], duration_bin_s=0)

    def test_descriptor_frequency(self):
        clips = [clip("c1", descriptors=("Crime", "Weather")),
                 clip("c2", descriptors=("Crime",))]
        stats = corpus.descriptive_stats(clips)
        assert stats.descriptor_frequency == {"Crime": 2, "Weather": 1}
