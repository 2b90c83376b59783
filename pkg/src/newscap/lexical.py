"""Surface-form metrics over token sequences: tokenization, ROUGE-L, METEOR."""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

from . import stemmer
from .errors import MissingResource


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[str, ...]
    source_text: str = ""

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class RougeLResult:
    precision: float
    recall: float
    f1: float
    lcs_length: int


@dataclass(frozen=True)
class MeteorResult:
    score: float
    matches: int
    chunks: int
    precision: float
    recall: float


@dataclass
class MatchResources:
    """Which METEOR matcher stages are enabled (exact is always on)."""

    enable_stem: bool = True
    enable_synonyms: bool = False
    synonyms: dict[str, list[str]] | None = None

    @classmethod
    def from_synonym_file(cls, path: str | Path, enable_stem: bool = True) -> "MatchResources":
        table = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(enable_stem=enable_stem, enable_synonyms=True, synonyms=table)


def _strip_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return token[start:end]


def tokenize(text: str) -> TokenSequence:
    """NFC-normalize, lowercase, split on whitespace, strip edge punctuation."""
    normalized = unicodedata.normalize("NFC", text).lower()
    tokens = []
    for raw in normalized.split():
        tok = _strip_punct(raw)
        if tok:
            tokens.append(tok)
    return TokenSequence(tokens=tuple(tokens), source_text=text)


def lcs_length(a: TokenSequence, b: TokenSequence) -> int:
    """Longest common subsequence length over token equality."""
    xs, ys = a.tokens, b.tokens
    if len(xs) < len(ys):
        xs, ys = ys, xs
    if not ys:
        return 0
    prev = [0] * (len(ys) + 1)
    for x in xs:
        curr = [0] * (len(ys) + 1)
        for j, y in enumerate(ys, start=1):
            if x == y:
                curr[j] = prev[j - 1] + 1
            else:
                curr[j] = max(prev[j], curr[j - 1])
        prev = curr
    return prev[-1]


def rouge_l(candidate: TokenSequence, reference: TokenSequence) -> RougeLResult:
    """Sentence-level ROUGE-L with balanced F1.

    Either side empty scores all-zero rather than erroring, so noisy records
    cannot abort a batch run.
    """
    if not candidate.tokens or not reference.tokens:
        return RougeLResult(precision=0.0, recall=0.0, f1=0.0, lcs_length=0)
    lcs = lcs_length(candidate, reference)
    precision = lcs / len(candidate.tokens)
    recall = lcs / len(reference.tokens)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return RougeLResult(precision=precision, recall=recall, f1=f1, lcs_length=lcs)


def _crossings(pairs: list[tuple[int, int]]) -> int:
    count = 0
    for idx in range(len(pairs)):
        ci, ri = pairs[idx]
        for jdx in range(idx + 1, len(pairs)):
            cj, rj = pairs[jdx]
            if (ci - cj) * (ri - rj) < 0:
                count += 1
    return count


def _greedy_stage(cand_free: list[int], ref_free: list[int], compat) -> list[tuple[int, int]]:
    taken: set[int] = set()
    pairs = []
    for ci in cand_free:
        for rj in ref_free:
            if rj in taken:
                continue
            if compat(ci, rj):
                pairs.append((ci, rj))
                taken.add(rj)
                break
    return pairs


_SEARCH_BUDGET = 20000


def _stage_alignment(
    cand_free: list[int],
    ref_free: list[int],
    compat,
    fixed: list[tuple[int, int]],
) -> list[tuple[int, int]]:
    """Max-cardinality matching for one stage, fewest crossings among ties.

    Exhaustive search with pruning under a node budget; past the budget the
    stage falls back to left-to-right greedy pairing.
    """
    options = {ci: [rj for rj in ref_free if compat(ci, rj)] for ci in cand_free}
    cands = [ci for ci in cand_free if options[ci]]
    if not cands:
        return []

    best: dict = {"pairs": None, "size": -1, "cross": 0}
    nodes = 0

    def recurse(pos: int, used: set[int], chosen: list[tuple[int, int]]):
        nonlocal nodes
        nodes += 1
        if nodes > _SEARCH_BUDGET:
            raise TimeoutError
        if len(chosen) + (len(cands) - pos) < best["size"]:
            return
        if pos == len(cands):
            cross = _crossings(fixed + chosen)
            if len(chosen) > best["size"] or (
                len(chosen) == best["size"] and cross < best["cross"]
            ):
                best["pairs"] = list(chosen)
                best["size"] = len(chosen)
                best["cross"] = cross
            return
        ci = cands[pos]
        for rj in options[ci]:
            if rj in used:
                continue
            used.add(rj)
            chosen.append((ci, rj))
            recurse(pos + 1, used, chosen)
            chosen.pop()
            used.remove(rj)
        recurse(pos + 1, used, chosen)

    try:
        recurse(0, set(), [])
        return best["pairs"] or []
    except TimeoutError:
        return _greedy_stage(cand_free, ref_free, compat)


def _count_chunks(pairs: list[tuple[int, int]]) -> int:
    if not pairs:
        return 0
    pairs = sorted(pairs)
    chunks = 1
    for (c0, r0), (c1, r1) in zip(pairs, pairs[1:]):
        if c1 != c0 + 1 or r1 != r0 + 1:
            chunks += 1
    return chunks


def meteor(
    candidate: TokenSequence,
    reference: TokenSequence,
    resources: MatchResources | None = None,
) -> MeteorResult:
    """METEOR with original parameters: fmean = 10PR/(R+9P), penalty
    0.5*(chunks/m)^3.  Stages: exact, then stem, then synonym-table lookup,
    each consuming only tokens left unmatched by earlier stages.
    """
    resources = resources or MatchResources()
    if resources.enable_synonyms and resources.synonyms is None:
        raise MissingResource("synonym stage enabled but no synonym table bound")

    cand, ref = candidate.tokens, reference.tokens
    if not cand or not ref:
        return MeteorResult(score=0.0, matches=0, chunks=0, precision=0.0, recall=0.0)

    matched: list[tuple[int, int]] = []
    cand_free = list(range(len(cand)))
    ref_free = list(range(len(ref)))

    def run_stage(compat):
        nonlocal cand_free, ref_free
        pairs = _stage_alignment(cand_free, ref_free, compat, matched)
        matched.extend(pairs)
        used_c = {c for c, _ in pairs}
        used_r = {r for _, r in pairs}
        cand_free = [c for c in cand_free if c not in used_c]
        ref_free = [r for r in ref_free if r not in used_r]

    run_stage(lambda ci, rj: cand[ci] == ref[rj])
    if resources.enable_stem and cand_free and ref_free:
        cstem = {i: stemmer.stem(cand[i]) for i in cand_free}
        rstem = {j: stemmer.stem(ref[j]) for j in ref_free}
        run_stage(lambda ci, rj: cstem[ci] == rstem[rj])
    if resources.enable_synonyms and cand_free and ref_free:
        table = resources.synonyms

        def syn_compat(ci, rj):
            return ref[rj] in table.get(cand[ci], ()) or cand[ci] in table.get(ref[rj], ())

        run_stage(syn_compat)

    m = len(matched)
    if m == 0:
        return MeteorResult(score=0.0, matches=0, chunks=0, precision=0.0, recall=0.0)
    precision = m / len(cand)
    recall = m / len(ref)
    fmean = 10 * precision * recall / (recall + 9 * precision)
    chunks = _count_chunks(matched)
    penalty = 0.5 * (chunks / m) ** 3
    return MeteorResult(
        score=fmean * (1 - penalty),
        matches=m,
        chunks=chunks,
        precision=precision,
        recall=recall,
    )
