"""Clip manifest and caption-set ingestion, validation, filtering and stats.

The interchange formats are JSON-lines (one record per line, the canonical
form) and a single JSON array for station-style exports.  Records that fail
validation are collected into an error report and the load proceeds on the
valid subset; structural problems (unparseable container, duplicate keys)
raise.

Manifest record:  {"clip_id": str, "duration_s": number, "title": str,
                   "description": str, "descriptors": [str], "source": str}
Caption record:   {"clip_id": str, "model_id": str, "caption": str}
Tag dictionary:   two-column TSV (source_tag TAB english_tag) or JSON object.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    DuplicateCaptionKey,
    DuplicateClipId,
    InvalidBounds,
    MalformedFile,
    RecordError,
)

SOURCE_DATASETS = ("ChTV", "BBC", "other")

DEFAULT_MIN_DURATION_S = 10.0
DEFAULT_MAX_DURATION_S = 300.0


@dataclass(frozen=True)
class ClipRecord:
    """One news clip with its editorial reference description."""

    clip_id: str
    duration_s: float
    title: str
    reference_description: str
    thematic_descriptors: tuple[str, ...] = ()
    source_dataset: str = "other"


@dataclass(frozen=True)
class CaptionRecord:
    """One model-generated caption keyed by (clip_id, model_id)."""

    clip_id: str
    model_id: str
    caption_text: str


@dataclass
class TagDictionary:
    """Source-language tag -> English tag, keys unique after lowercasing."""

    entries: dict[str, str]

    def __post_init__(self):
        normalized: dict[str, str] = {}
        for key, value in self.entries.items():
            norm = key.strip().lower()
            if norm in normalized and normalized[norm] != value:
                raise MalformedFile(f"tag dictionary key collides after normalization: {key!r}")
            normalized[norm] = value
        self.entries = normalized

    def lookup(self, tag: str) -> str | None:
        return self.entries.get(tag.strip().lower())


@dataclass
class CorpusStats:
    duration_histogram: list[tuple[float, int]]
    description_word_count_histogram: list[tuple[int, int]]
    descriptor_frequency: dict[str, int]


@dataclass
class LoadReport:
    """Valid records plus the per-record errors collected along the way."""

    records: list
    errors: list[RecordError] = field(default_factory=list)


@dataclass
class AlignmentReport:
    models: list[str]
    missing: dict[str, list[str]]          # model_id -> clip_ids lacking a caption
    orphans: list[str]                     # caption clip_ids absent from manifest
    complete_clip_ids: list[str]           # clips covered by every model


def _read_container(path: str | Path, fmt: str) -> list:
    path = Path(path)
    if not path.exists():
        raise MalformedFile(f"no such file: {path}")
    text = path.read_text(encoding="utf-8")
    if fmt == "json-array":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedFile(f"{path}: {exc}") from exc
        if not isinstance(data, list):
            raise MalformedFile(f"{path}: expected a JSON array")
        return data
    if fmt == "json-lines":
        records = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise MalformedFile(f"{path}:{lineno}: {exc}") from exc
        return records
    raise MalformedFile(f"unknown manifest format: {fmt!r}")


def load_manifest(path: str | Path, fmt: str = "json-lines") -> LoadReport:
    """Load ClipRecords from ``path``, collecting per-record errors.

    Raises MalformedFile on an unparseable container and DuplicateClipId when
    two valid records share a clip id.
    """
    raw = _read_container(path, fmt)
    records: list[ClipRecord] = []
    errors: list[RecordError] = []
    seen: set[str] = set()
    for idx, obj in enumerate(raw):
        bad: list[str] = []
        if not isinstance(obj, dict):
            errors.append(RecordError(index=idx, fields=["<record>"]))
            continue
        clip_id = obj.get("clip_id")
        if not isinstance(clip_id, str) or not clip_id:
            bad.append("clip_id")
        duration = obj.get("duration_s")
        if not isinstance(duration, (int, float)) or isinstance(duration, bool) \
                or not math.isfinite(duration) or duration < 0:
            bad.append("duration_s")
        description = obj.get("description")
        if not isinstance(description, str) or not description.strip():
            bad.append("description")
        if bad:
            errors.append(RecordError(index=idx, fields=bad))
            continue
        if clip_id in seen:
            raise DuplicateClipId(clip_id)
        seen.add(clip_id)
        descriptors = obj.get("descriptors") or []
        source = obj.get("source", "other")
        if source not in SOURCE_DATASETS:
            source = "other"
        records.append(
            ClipRecord(
                clip_id=clip_id,
                duration_s=float(duration),
                title=str(obj.get("title", "")),
                reference_description=description,
                thematic_descriptors=tuple(str(d) for d in descriptors),
                source_dataset=source,
            )
        )
    return LoadReport(records=records, errors=errors)


def load_captions(path: str | Path, fmt: str = "json-lines") -> LoadReport:
    """Load CaptionRecords; duplicate (clip_id, model_id) pairs raise."""
    raw = _read_container(path, fmt)
    records: list[CaptionRecord] = []
    errors: list[RecordError] = []
    seen: set[tuple[str, str]] = set()
    for idx, obj in enumerate(raw):
        bad: list[str] = []
        if not isinstance(obj, dict):
            errors.append(RecordError(index=idx, fields=["<record>"]))
            continue
        clip_id = obj.get("clip_id")
        model_id = obj.get("model_id")
        caption = obj.get("caption")
        if not isinstance(clip_id, str) or not clip_id:
            bad.append("clip_id")
        if not isinstance(model_id, str) or not model_id:
            bad.append("model_id")
        if not isinstance(caption, str) or not caption.strip():
            bad.append("caption")
        if bad:
            errors.append(RecordError(index=idx, fields=bad))
            continue
        key = (clip_id, model_id)
        if key in seen:
            raise DuplicateCaptionKey(clip_id, model_id)
        seen.add(key)
        records.append(CaptionRecord(clip_id=clip_id, model_id=model_id, caption_text=caption))
    return LoadReport(records=records, errors=errors)


def load_tag_dictionary(path: str | Path) -> TagDictionary:
    """Read a tag dictionary from JSON object or two-column TSV."""
    path = Path(path)
    if not path.exists():
        raise MalformedFile(f"no such file: {path}")
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedFile(f"{path}: {exc}") from exc
        if not isinstance(data, dict):
            raise MalformedFile(f"{path}: expected a JSON object")
        return TagDictionary(entries={str(k): str(v) for k, v in data.items()})
    entries: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise MalformedFile(f"{path}:{lineno}: expected two tab-separated columns")
        entries[parts[0]] = parts[1]
    return TagDictionary(entries=entries)


def filter_clips(
    clips: list[ClipRecord],
    min_s: float = DEFAULT_MIN_DURATION_S,
    max_s: float = DEFAULT_MAX_DURATION_S,
) -> tuple[list[ClipRecord], int]:
    """Keep clips with min_s <= duration_s <= max_s, preserving order.

    Returns (kept, dropped_count).
    """
    if min_s < 0 or min_s > max_s:
        raise InvalidBounds(f"bad duration bounds ({min_s}, {max_s})")
    kept = [c for c in clips if min_s <= c.duration_s <= max_s]
    return kept, len(clips) - len(kept)


def translate_tags(
    descriptors: list[str], tag_dict: TagDictionary
) -> tuple[list[str], list[str]]:
    """Map descriptors through the dictionary (lowercase + trim lookup).

    Unmapped descriptors pass through unchanged and are returned in a side
    list.  Output length always equals input length.
    """
    translated: list[str] = []
    unmapped: list[str] = []
    for tag in descriptors:
        mapped = tag_dict.lookup(tag)
        if mapped is None:
            translated.append(tag)
            unmapped.append(tag)
        else:
            translated.append(mapped)
    return translated, unmapped


def validate_alignment(
    clips: list[ClipRecord], captions: list[CaptionRecord]
) -> AlignmentReport:
    """Cross-check caption coverage against the manifest.

    The "complete clip subset" is the set of manifest clips for which every
    model has a caption; it is the required input domain for MRR.
    """
    clip_ids = {c.clip_id for c in clips}
    models = sorted({c.model_id for c in captions})
    covered: dict[str, set[str]] = {m: set() for m in models}
    orphans: set[str] = set()
    for cap in captions:
        if cap.clip_id in clip_ids:
            covered[cap.model_id].add(cap.clip_id)
        else:
            orphans.add(cap.clip_id)
    missing = {
        m: sorted(clip_ids - covered[m])
        for m in models
        if clip_ids - covered[m]
    }
    complete = clip_ids
    for m in models:
        complete = complete & covered[m]
    if not models:
        complete = set()
    return AlignmentReport(
        models=models,
        missing=missing,
        orphans=sorted(orphans),
        complete_clip_ids=sorted(complete),
    )


def descriptive_stats(
    clips: list[ClipRecord], duration_bin_s: float = 30.0, word_bin: int = 10
) -> CorpusStats:
    """Duration / description-length histograms and descriptor frequencies.

    Word count is the whitespace-delimited token count of the raw reference
    description.  Only occupied bins are emitted, keyed by lower bound.
    """
    if duration_bin_s <= 0 or word_bin <= 0:
        raise InvalidBounds("histogram bin widths must be positive")
    dur_bins: dict[float, int] = {}
    word_bins: dict[int, int] = {}
    freq: dict[str, int] = {}
    for clip in clips:
        dlo = math.floor(clip.duration_s / duration_bin_s) * duration_bin_s
        dur_bins[dlo] = dur_bins.get(dlo, 0) + 1
        words = len(clip.reference_description.split())
        wlo = (words // word_bin) * word_bin
        word_bins[wlo] = word_bins.get(wlo, 0) + 1
        for tag in clip.thematic_descriptors:
            freq[tag] = freq.get(tag, 0) + 1
    return CorpusStats(
        duration_histogram=sorted(dur_bins.items()),
        description_word_count_histogram=sorted(word_bins.items()),
        descriptor_frequency=dict(sorted(freq.items())),
    )
