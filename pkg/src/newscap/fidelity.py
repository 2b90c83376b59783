"""Thematic and entity fidelity scoring.

Thematic fidelity: zero-shot multi-label classification of a text against a
fixed, ordered 15-label theme set, then per-clip micro-F1 between the binary
theme vectors of the reference and the caption.

Entity fidelity: typed named-entity extraction, fuzzy token-ratio matching
between the two entity sets, then the harmonic mean of entity precision and
recall.  Clips whose reference has no entities are Excluded, not scored.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources as importlib_resources

from .errors import LengthMismatch

ENTITY_TYPES = ("PERSON", "GPE", "ORG", "LOC", "NORP", "FAC", "EVENT")

DEFAULT_TAU = 0.5
DEFAULT_THETA = 85.0
DEFAULT_HYPOTHESIS_TEMPLATE = "This text is about {}."

EXCLUDED = "excluded"  # sentinel for EFS on entity-free references


def theme_labels() -> tuple[str, ...]:
    """The ordered 15-slot theme label set (vector slot i <-> label i)."""
    data = json.loads(
        importlib_resources.files("newscap.data")
        .joinpath("theme_labels.json")
        .read_text(encoding="utf-8")
    )
    return tuple(data["labels"])


@dataclass
class ThemeClassifierConfig:
    tau: float = DEFAULT_TAU
    hypothesis_template: str = DEFAULT_HYPOTHESIS_TEMPLATE

    def __post_init__(self):
        if not (0 < self.tau < 1):
            raise ValueError(f"tau must be in (0, 1), got {self.tau}")
        if self.hypothesis_template.count("{}") != 1:
            raise ValueError("hypothesis template must contain exactly one placeholder")


@dataclass
class EntityMatchConfig:
    theta: float = DEFAULT_THETA

    def __post_init__(self):
        if not (0 < self.theta <= 100):
            raise ValueError(f"theta must be in (0, 100], got {self.theta}")


@dataclass(frozen=True)
class EfsResult:
    value: float | str            # real in [0,1] or EXCLUDED
    precision: float
    recall: float
    matched_gt: frozenset
    matched_model: frozenset

    @property
    def excluded(self) -> bool:
        return self.value == EXCLUDED


def classify_themes(
    text: str,
    labels: tuple[str, ...],
    nli,
    config: ThemeClassifierConfig | None = None,
) -> tuple[int, ...]:
    """Binary theme vector: slot i is 1 iff the entailment score of
    template(label_i) against ``text`` strictly exceeds tau.  Labels are
    scored independently (multi-label, no softmax across labels).
    """
    if not text:
        raise ValueError("classify_themes requires non-empty text")
    config = config or ThemeClassifierConfig()
    bits = []
    for label in labels:
        score = nli.nli_entailment(text, config.hypothesis_template.format(label))
        bits.append(1 if score > config.tau else 0)
    return tuple(bits)


def tfs(gt: tuple[int, ...], pred: tuple[int, ...]) -> float:
    """Per-clip micro-F1 between binary theme vectors: 2TP/(2TP+FP+FN).

    Both-all-zero vectors score 1.0 (agreement on absence).
    """
    if len(gt) != len(pred):
        raise LengthMismatch(f"theme vectors of length {len(gt)} vs {len(pred)}")
    tp = sum(1 for g, p in zip(gt, pred) if g == 1 and p == 1)
    fp = sum(1 for g, p in zip(gt, pred) if g == 0 and p == 1)
    fn = sum(1 for g, p in zip(gt, pred) if g == 1 and p == 0)
    if tp == 0 and fp == 0 and fn == 0:
        return 1.0
    return 2 * tp / (2 * tp + fp + fn)


def normalize_surface(surface: str) -> str:
    return re.sub(r"\s+", " ", surface).strip().lower()


def extract_entities(text: str, ner) -> frozenset[tuple[str, str]]:
    """Typed entity set from the backend, filtered to the seven news-relevant
    types, surfaces lowercased with collapsed whitespace, duplicates merged.
    """
    out = set()
    for surface, etype in ner.extract(text):
        if etype not in ENTITY_TYPES:
            continue
        norm = normalize_surface(surface)
        if norm:
            out.add((norm, etype))
    return frozenset(out)


# --- token-ratio fuzzy similarity -----------------------------------------

def _lcs_len(s: str, t: str) -> int:
    if len(s) < len(t):
        s, t = t, s
    if not t:
        return 0
    prev = [0] * (len(t) + 1)
    for ch in s:
        curr = [0] * (len(t) + 1)
        for j, cht in enumerate(t, start=1):
            curr[j] = prev[j - 1] + 1 if ch == cht else max(prev[j], curr[j - 1])
        prev = curr
    return prev[-1]


def _indel_ratio(s: str, t: str) -> float:
    # indel distance = insertions + deletions = |s| + |t| - 2*LCS
    lensum = len(s) + len(t)
    if lensum == 0:
        return 100.0
    dist = lensum - 2 * _lcs_len(s, t)
    return 100.0 * (1.0 - dist / lensum)


def token_ratio(a: str, b: str) -> float:
    """max(token_sort_ratio, token_set_ratio) on a 0-100 scale.

    Base ratio is the normalized indel similarity; token_sort compares the
    strings rebuilt from alphabetically sorted tokens; token_set takes the max
    base ratio among the three pairs built from the sorted token-set
    intersection and each side's difference-augmented string.

    Two empty strings score 100 by convention; exactly one empty scores 0.
    """
    ta, tb = a.split(), b.split()
    if not ta and not tb:
        return 100.0
    if not ta or not tb:
        return 0.0

    sort_a = " ".join(sorted(ta))
    sort_b = " ".join(sorted(tb))
    token_sort = _indel_ratio(sort_a, sort_b)

    set_a, set_b = set(ta), set(tb)
    sect = " ".join(sorted(set_a & set_b))
    diff_ab = " ".join(sorted(set_a - set_b))
    diff_ba = " ".join(sorted(set_b - set_a))
    combined_a = (sect + " " + diff_ab).strip()
    combined_b = (sect + " " + diff_ba).strip()
    token_set = max(
        _indel_ratio(sect, combined_a) if sect else 0.0,
        _indel_ratio(sect, combined_b) if sect else 0.0,
        _indel_ratio(combined_a, combined_b),
    )
    return max(token_sort, token_set)


def match_entities(
    gt: frozenset[tuple[str, str]],
    model: frozenset[tuple[str, str]],
    config: EntityMatchConfig | None = None,
) -> tuple[frozenset, frozenset]:
    """Many-to-many coverage matching on surfaces only: an entity is matched
    iff some entity on the other side has token_ratio strictly above theta.
    Types are retained for reporting but not required to agree.
    """
    config = config or EntityMatchConfig()
    matched_gt = set()
    matched_model = set()
    for g in gt:
        for m in model:
            if token_ratio(g[0], m[0]) > config.theta:
                matched_gt.add(g)
                matched_model.add(m)
    return frozenset(matched_gt), frozenset(matched_model)


def efs(
    gt: frozenset[tuple[str, str]],
    model: frozenset[tuple[str, str]],
    config: EntityMatchConfig | None = None,
) -> EfsResult:
    """Entity Fidelity Score: harmonic mean of entity precision and recall.

    References with no entities are Excluded rather than scored.
    """
    config = config or EntityMatchConfig()
    if not gt:
        return EfsResult(
            value=EXCLUDED,
            precision=0.0,
            recall=0.0,
            matched_gt=frozenset(),
            matched_model=frozenset(),
        )
    matched_gt, matched_model = match_entities(gt, model, config)
    precision = len(matched_model) / max(len(model), 1)
    recall = len(matched_gt) / max(len(gt), 1)
    value = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return EfsResult(
        value=value,
        precision=precision,
        recall=recall,
        matched_gt=matched_gt,
        matched_model=matched_model,
    )
