"""Embedding-space metrics: cosine, text similarity, BERTScore-style token
alignment, CLIPScore aggregation, per-model MRR and the shuffled-pairs test.

All model inference crosses the backend boundary (see :mod:`newscap.backends`);
this module only combines the vectors it is handed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyTokenization,
    IncompleteMatrix,
    NoFrames,
    TooFewClips,
    ZeroVector,
)

DEFAULT_FRAME_BUDGET = 8


@dataclass(frozen=True)
class BertScoreResult:
    precision: float
    recall: float
    f1: float


@dataclass
class MrrTable:
    per_model_mrr: dict[str, float]
    per_clip_ranks: dict[tuple[str, str], int]


@dataclass
class ShuffleTestResult:
    original_similarities: list[float]
    shuffled_similarities: list[float]
    mean_gap: float
    effect_size: float
    seed: int


def cosine(u, v) -> float:
    """Cosine similarity, clamped to [-1, 1] against rounding."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DimensionMismatch(f"dims {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine undefined for an all-zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def text_similarity(candidate: str, reference: str, embedder) -> float:
    """Cosine of the two sentence embeddings."""
    return cosine(embedder.sentence_embed(candidate), embedder.sentence_embed(reference))


def bert_score(candidate: str, reference: str, token_embedder) -> BertScoreResult:
    """Greedy soft token alignment: precision is the mean over candidate
    tokens of the max cosine against reference tokens, recall vice versa.
    No IDF weighting, no baseline rescaling.
    """
    cand = np.asarray(token_embedder.token_embed(candidate), dtype=float)
    ref = np.asarray(token_embedder.token_embed(reference), dtype=float)
    if cand.size == 0 or ref.size == 0:
        raise EmptyTokenization("both texts must yield at least one token embedding")
    if cand.shape[1] != ref.shape[1]:
        raise DimensionMismatch(f"dims {cand.shape[1]} vs {ref.shape[1]}")
    cn = np.linalg.norm(cand, axis=1, keepdims=True)
    rn = np.linalg.norm(ref, axis=1, keepdims=True)
    if np.any(cn == 0) or np.any(rn == 0):
        raise ZeroVector("token embedding with zero norm")
    sims = np.clip((cand / cn) @ (ref / rn).T, -1.0, 1.0)
    precision = float(sims.max(axis=1).mean())
    recall = float(sims.max(axis=0).mean())
    f1 = 0.0 if precision + recall <= 0 else 2 * precision * recall / (precision + recall)
    return BertScoreResult(precision=precision, recall=recall, f1=f1)


def subsample_indices(n: int, k: int) -> list[int]:
    """Uniform index selection keeping first and last: floor(i*(n-1)/(k-1))."""
    if n <= k:
        return list(range(n))
    if k == 1:
        return [0]
    return [i * (n - 1) // (k - 1) for i in range(k)]


def clip_score(
    caption: str,
    frame_embeddings,
    text_embedder,
    frame_budget: int = DEFAULT_FRAME_BUDGET,
) -> float:
    """Mean over (subsampled) frames of cosine(frame, caption embedding)."""
    frames = [np.asarray(f, dtype=float) for f in frame_embeddings]
    if not frames:
        raise NoFrames("clip_score requires at least one frame embedding")
    text_vec = np.asarray(text_embedder.visual_text_embed(caption), dtype=float)
    for f in frames:
        if f.shape != text_vec.shape:
            raise DimensionMismatch(f"frame dim {f.shape} vs text dim {text_vec.shape}")
    picked = [frames[i] for i in subsample_indices(len(frames), frame_budget)]
    return float(np.mean([cosine(f, text_vec) for f in picked]))


def mrr(similarities: dict[tuple[str, str], float]) -> MrrTable:
    """Per-clip ranking of models by similarity (desc, ties by model_id asc);
    per-model MRR is the mean reciprocal of its own rank.  Requires a complete
    (clip x model) matrix.
    """
    clips = sorted({c for c, _ in similarities})
    models = sorted({m for _, m in similarities})
    missing = [
        (c, m) for c in clips for m in models if (c, m) not in similarities
    ]
    if missing:
        raise IncompleteMatrix(missing)
    ranks: dict[tuple[str, str], int] = {}
    rr_sums = {m: 0.0 for m in models}
    for clip in clips:
        order = sorted(models, key=lambda m: (-similarities[(clip, m)], m))
        for rank, model in enumerate(order, start=1):
            ranks[(clip, model)] = rank
            rr_sums[model] += 1.0 / rank
    n = len(clips)
    per_model = {m: rr_sums[m] / n for m in models} if n else {}
    return MrrTable(per_model_mrr=per_model, per_clip_ranks=ranks)


def seeded_derangement(n: int, seed: int) -> list[int]:
    """Uniformly random derangement of range(n) via seeded rejection sampling."""
    if n < 2:
        raise TooFewClips("a derangement needs at least 2 elements")
    rng = random.Random(seed)
    perm = list(range(n))
    while True:
        rng.shuffle(perm)
        if all(perm[i] != i for i in range(n)):
            return list(perm)


def shuffled_pairs_test(clips, captions_by_clip: dict[str, str], embedder, seed: int) -> ShuffleTestResult:
    """Compare correctly paired caption/reference similarities against
    deranged pairings for one model.

    ``clips`` is iterated in sorted clip_id order for determinism; every clip
    must have a caption in ``captions_by_clip``.
    """
    pairs = sorted(
        (c.clip_id, captions_by_clip[c.clip_id], c.reference_description)
        for c in clips
        if c.clip_id in captions_by_clip
    )
    if len(pairs) < 2:
        raise TooFewClips("shuffled-pairs test needs at least 2 captioned clips")
    original = [
        text_similarity(caption, reference, embedder)
        for _, caption, reference in pairs
    ]
    perm = seeded_derangement(len(pairs), seed)
    shuffled = [
        text_similarity(pairs[i][1], pairs[perm[i]][2], embedder)
        for i in range(len(pairs))
    ]
    mean_gap = float(np.mean(original) - np.mean(shuffled))
    pooled = math.sqrt((np.var(original, ddof=0) + np.var(shuffled, ddof=0)) / 2)
    effect = mean_gap / pooled if pooled > 0 else 0.0
    return ShuffleTestResult(
        original_similarities=original,
        shuffled_similarities=shuffled,
        mean_gap=mean_gap,
        effect_size=effect,
        seed=seed,
    )
