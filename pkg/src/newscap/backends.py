"""Backend contracts for all model-dependent primitives.

Three families:

* fixture  — file-backed, returns pre-recorded responses bit-exactly;
* hash-stub — seeded pseudo-random but fully deterministic outputs keyed by a
  text hash, for property tests with zero model downloads;
* remote   — JSON-over-HTTP client for a live inference sidecar.

Every backend is memoized in-run, so identical (identity, input) pairs are
referentially transparent; the memo layer is synchronized and reports its hit
rate.

Fixture keys are 64-bit FNV-1a hashes of the NFC-normalized UTF-8 text,
hex-encoded.
"""

from __future__ import annotations

import json
import threading
import time
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import requests

from .errors import (
    BackendTimeout,
    BackendUnavailable,
    FixtureMiss,
    ProtocolError,
)

DEFAULT_BATCH_SIZE = 32

KIND_SENTENCE = "sentence-embedder"
KIND_TOKEN = "token-embedder"
KIND_VISUAL = "visual-text-embedder"
KIND_NLI = "nli-scorer"
KIND_NER = "entity-extractor"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a_hex(text: str) -> str:
    """64-bit FNV-1a over NFC-normalized UTF-8, hex-encoded."""
    h = _FNV_OFFSET
    for byte in unicodedata.normalize("NFC", text).encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


def nli_key(premise: str, hypothesis: str) -> str:
    return f"{fnv1a_hex(premise)}:{fnv1a_hex(hypothesis)}"


class _Memo:
    """Synchronized per-backend memo; identical inputs hit the cache."""

    def __init__(self):
        self._store: dict = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get_or_compute(self, key, compute):
        with self._lock:
            if key in self._store:
                self.hits += 1
                return self._store[key]
        value = compute()
        with self._lock:
            if key not in self._store:
                self._store[key] = value
                self.misses += 1
            else:
                self.hits += 1
            return self._store[key]

    @property
    def hit_rate(self) -> float:
        total = self.hits + self.misses
        return self.hits / total if total else 0.0


class Backend:
    """Base class carrying identity and the memo layer."""

    kind: str = ""

    def __init__(self, identity: str):
        if not identity:
            raise ValueError("backend identity must be non-empty")
        self.identity = identity
        self.memo = _Memo()


# --- fixture store ---------------------------------------------------------

@dataclass
class FixtureStore:
    """Pre-recorded backend responses, keyed by text hash per kind."""

    sentence_embeddings: dict[str, list[float]] = field(default_factory=dict)
    token_embeddings: dict[str, list[list[float]]] = field(default_factory=dict)
    visual_text_embeddings: dict[str, list[float]] = field(default_factory=dict)
    nli_scores: dict[str, float] = field(default_factory=dict)
    entities: dict[str, list[tuple[str, str]]] = field(default_factory=dict)

    _MAPS = {
        KIND_SENTENCE: ("sentence_embeddings", "vector"),
        KIND_TOKEN: ("token_embeddings", "vectors"),
        KIND_VISUAL: ("visual_text_embeddings", "vector"),
        KIND_NLI: ("nli_scores", "score"),
        KIND_NER: ("entities", "entities"),
    }

    @classmethod
    def load(cls, path: str | Path) -> "FixtureStore":
        store = cls()
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            kind, key = rec["kind"], rec["key"]
            attr, payload = cls._MAPS[kind]
            value = rec[payload]
            if kind == KIND_NER:
                value = [tuple(e) for e in value]
            getattr(store, attr)[key] = value
        return store

    def save(self, path: str | Path) -> None:
        lines = []
        for kind, (attr, payload) in self._MAPS.items():
            for key in sorted(getattr(self, attr)):
                value = getattr(self, attr)[key]
                if kind == KIND_NER:
                    value = [list(e) for e in value]
                lines.append(
                    json.dumps({"kind": kind, "key": key, payload: value}, sort_keys=True)
                )
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


class FixtureSentenceEmbedder(Backend):
    kind = KIND_SENTENCE

    def __init__(self, store: FixtureStore, identity: str = "fixture"):
        super().__init__(identity)
        self.store = store

    def sentence_embed(self, text: str):
        key = fnv1a_hex(text)
        if key not in self.store.sentence_embeddings:
            raise FixtureMiss(self.kind, key)
        return np.asarray(self.store.sentence_embeddings[key], dtype=float)


class FixtureTokenEmbedder(Backend):
    kind = KIND_TOKEN

    def __init__(self, store: FixtureStore, identity: str = "fixture"):
        super().__init__(identity)
        self.store = store

    def token_embed(self, text: str):
        key = fnv1a_hex(text)
        if key not in self.store.token_embeddings:
            raise FixtureMiss(self.kind, key)
        return [np.asarray(v, dtype=float) for v in self.store.token_embeddings[key]]


class FixtureVisualTextEmbedder(Backend):
    kind = KIND_VISUAL

    def __init__(self, store: FixtureStore, identity: str = "fixture"):
        super().__init__(identity)
        self.store = store

    def visual_text_embed(self, text: str):
        key = fnv1a_hex(text)
        if key not in self.store.visual_text_embeddings:
            raise FixtureMiss(self.kind, key)
        return np.asarray(self.store.visual_text_embeddings[key], dtype=float)


class FixtureNliScorer(Backend):
    kind = KIND_NLI

    def __init__(self, store: FixtureStore, identity: str = "fixture"):
        super().__init__(identity)
        self.store = store

    def nli_entailment(self, premise: str, hypothesis: str) -> float:
        key = nli_key(premise, hypothesis)
        if key not in self.store.nli_scores:
            raise FixtureMiss(self.kind, key)
        return float(self.store.nli_scores[key])


class FixtureEntityExtractor(Backend):
    kind = KIND_NER

    def __init__(self, store: FixtureStore, identity: str = "fixture"):
        super().__init__(identity)
        self.store = store

    def extract(self, text: str):
        key = fnv1a_hex(text)
        if key not in self.store.entities:
            raise FixtureMiss(self.kind, key)
        return list(self.store.entities[key])


# --- hash stubs ------------------------------------------------------------

def _seeded_unit_vector(key: str, dim: int, seed: int):
    rng = np.random.default_rng((int(key, 16) ^ seed) & 0xFFFFFFFFFFFFFFFF)
    vec = rng.standard_normal(dim)
    return vec / np.linalg.norm(vec)


class HashStubSentenceEmbedder(Backend):
    """Deterministic pseudo-random unit vector keyed by the text hash."""

    kind = KIND_SENTENCE

    def __init__(self, dim: int = 384, seed: int = 0, identity: str = "hash-stub"):
        super().__init__(f"{identity}:dim={dim}:seed={seed}")
        self.dim = dim
        self.seed = seed

    def sentence_embed(self, text: str):
        key = fnv1a_hex(text)
        return self.memo.get_or_compute(
            key, lambda: _seeded_unit_vector(key, self.dim, self.seed)
        )


class HashStubTokenEmbedder(Backend):
    """One deterministic unit vector per whitespace token."""

    kind = KIND_TOKEN

    def __init__(self, dim: int = 384, seed: int = 0, identity: str = "hash-stub"):
        super().__init__(f"{identity}:dim={dim}:seed={seed}")
        self.dim = dim
        self.seed = seed

    def token_embed(self, text: str):
        tokens = text.split() or [text]
        return [
            _seeded_unit_vector(fnv1a_hex(tok), self.dim, self.seed) for tok in tokens
        ]


class HashStubVisualTextEmbedder(Backend):
    kind = KIND_VISUAL

    def __init__(self, dim: int = 512, seed: int = 0, identity: str = "hash-stub"):
        super().__init__(f"{identity}:dim={dim}:seed={seed}")
        self.dim = dim
        self.seed = seed

    def visual_text_embed(self, text: str):
        key = fnv1a_hex(text)
        return self.memo.get_or_compute(
            key, lambda: _seeded_unit_vector(key, self.dim, self.seed)
        )


class HashStubNliScorer(Backend):
    """Uniform [0,1] score keyed by the (premise, hypothesis) hash pair."""

    kind = KIND_NLI

    def __init__(self, seed: int = 0, identity: str = "hash-stub"):
        super().__init__(f"{identity}:seed={seed}")
        self.seed = seed

    def nli_entailment(self, premise: str, hypothesis: str) -> float:
        key = nli_key(premise, hypothesis)
        combined = int(key[:16], 16) ^ int(key[17:], 16) ^ self.seed
        rng = np.random.default_rng(combined & 0xFFFFFFFFFFFFFFFF)
        return float(rng.uniform())


class GazetteerEntityExtractor(Backend):
    """Regex-gazetteer NER stub: whole-word matches of known phrases.

    The gazetteer is a JSON object mapping phrase -> entity type.
    """

    kind = KIND_NER

    def __init__(self, gazetteer: dict[str, str], identity: str = "gazetteer"):
        super().__init__(identity)
        import re

        self._patterns = [
            (re.compile(r"\b" + re.escape(phrase) + r"\b", re.IGNORECASE), phrase, etype)
            for phrase, etype in sorted(gazetteer.items())
        ]

    @classmethod
    def from_file(cls, path: str | Path, identity: str = "gazetteer"):
        table = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(table, identity=identity)

    def extract(self, text: str):
        found = []
        for pattern, phrase, etype in self._patterns:
            for match in pattern.finditer(text):
                found.append((match.group(0), etype))
        return found


# --- remote client ---------------------------------------------------------

@dataclass
class RetryPolicy:
    max_attempts: int = 3
    backoff_s: float = 0.5
    timeout_s: float = 30.0


class RemoteClient:
    """JSON-over-HTTP client for the inference sidecar wire protocol.

    Requests are issued in batches of at most ``batch_size`` items; responses
    are positionally aligned with requests.  Transient failures retry with
    exponential backoff.
    """

    def __init__(
        self,
        base_url: str,
        batch_size: int = DEFAULT_BATCH_SIZE,
        retry: RetryPolicy | None = None,
        session: requests.Session | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.batch_size = batch_size
        self.retry = retry or RetryPolicy()
        self.session = session or requests.Session()
        self.retries_used = 0

    def _post(self, path: str, payload: dict) -> dict:
        last_error: Exception | None = None
        for attempt in range(self.retry.max_attempts):
            if attempt:
                time.sleep(self.retry.backoff_s * (2 ** (attempt - 1)))
                self.retries_used += 1
            try:
                resp = self.session.post(
                    self.base_url + path, json=payload, timeout=self.retry.timeout_s
                )
            except requests.Timeout as exc:
                last_error = BackendTimeout(str(exc))
                continue
            except requests.RequestException as exc:
                last_error = BackendUnavailable(str(exc))
                continue
            if 500 <= resp.status_code < 600 or resp.status_code == 429:
                last_error = BackendUnavailable(f"{path}: HTTP {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise ProtocolError(f"{path}: HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()
            except ValueError as exc:
                raise ProtocolError(f"{path}: malformed response JSON: {exc}") from exc
        raise last_error or BackendUnavailable(f"{path}: retries exhausted")

    def _batched(self, items: list, call):
        out = []
        for start in range(0, len(items), self.batch_size):
            out.extend(call(items[start : start + self.batch_size]))
        return out

    def info(self) -> dict:
        resp = self.session.get(self.base_url + "/v1/info", timeout=self.retry.timeout_s)
        if resp.status_code != 200:
            raise BackendUnavailable(f"/v1/info: HTTP {resp.status_code}")
        return resp.json()

    def embed_sentences(self, texts: list[str]) -> list[list[float]]:
        def call(batch):
            data = self._post("/v1/embed/sentence", {"texts": batch})
            vectors = data.get("vectors")
            if not isinstance(vectors, list) or len(vectors) != len(batch):
                raise ProtocolError("/v1/embed/sentence: misaligned vectors")
            return vectors

        return self._batched(texts, call)

    def embed_tokens(self, texts: list[str]) -> list[list[list[float]]]:
        def call(batch):
            data = self._post("/v1/embed/tokens", {"texts": batch})
            vectors = data.get("vectors")
            if not isinstance(vectors, list) or len(vectors) != len(batch):
                raise ProtocolError("/v1/embed/tokens: misaligned vectors")
            return vectors

        return self._batched(texts, call)

    def embed_visual_text(self, texts: list[str]) -> list[list[float]]:
        def call(batch):
            data = self._post("/v1/embed/visual-text", {"texts": batch})
            vectors = data.get("vectors")
            if not isinstance(vectors, list) or len(vectors) != len(batch):
                raise ProtocolError("/v1/embed/visual-text: misaligned vectors")
            return vectors

        return self._batched(texts, call)

    def nli(self, pairs: list[tuple[str, str]]) -> list[float]:
        def call(batch):
            payload = {"pairs": [{"premise": p, "hypothesis": h} for p, h in batch]}
            data = self._post("/v1/nli", payload)
            scores = data.get("entailment")
            if not isinstance(scores, list) or len(scores) != len(batch):
                raise ProtocolError("/v1/nli: misaligned scores")
            return scores

        return self._batched(pairs, call)

    def ner(self, texts: list[str]) -> list[list[tuple[str, str]]]:
        def call(batch):
            data = self._post("/v1/ner", {"texts": batch})
            ents = data.get("entities")
            if not isinstance(ents, list) or len(ents) != len(batch):
                raise ProtocolError("/v1/ner: misaligned entities")
            return [[(e["surface"], e["type"]) for e in group] for group in ents]

        return self._batched(texts, call)


class RemoteSentenceEmbedder(Backend):
    kind = KIND_SENTENCE

    def __init__(self, client: RemoteClient, identity: str = "remote"):
        super().__init__(identity)
        self.client = client

    def sentence_embed(self, text: str):
        return self.memo.get_or_compute(
            fnv1a_hex(text),
            lambda: np.asarray(self.client.embed_sentences([text])[0], dtype=float),
        )


class RemoteTokenEmbedder(Backend):
    kind = KIND_TOKEN

    def __init__(self, client: RemoteClient, identity: str = "remote"):
        super().__init__(identity)
        self.client = client

    def token_embed(self, text: str):
        vectors = self.memo.get_or_compute(
            fnv1a_hex(text), lambda: self.client.embed_tokens([text])[0]
        )
        return [np.asarray(v, dtype=float) for v in vectors]


class RemoteVisualTextEmbedder(Backend):
    kind = KIND_VISUAL

    def __init__(self, client: RemoteClient, identity: str = "remote"):
        super().__init__(identity)
        self.client = client

    def visual_text_embed(self, text: str):
        return self.memo.get_or_compute(
            fnv1a_hex(text),
            lambda: np.asarray(self.client.embed_visual_text([text])[0], dtype=float),
        )


class RemoteNliScorer(Backend):
    kind = KIND_NLI

    def __init__(self, client: RemoteClient, identity: str = "remote"):
        super().__init__(identity)
        self.client = client

    def nli_entailment(self, premise: str, hypothesis: str) -> float:
        return self.memo.get_or_compute(
            nli_key(premise, hypothesis),
            lambda: float(self.client.nli([(premise, hypothesis)])[0]),
        )


class RemoteEntityExtractor(Backend):
    kind = KIND_NER

    def __init__(self, client: RemoteClient, identity: str = "remote"):
        super().__init__(identity)
        self.client = client

    def extract(self, text: str):
        return self.memo.get_or_compute(
            fnv1a_hex(text), lambda: self.client.ner([text])[0]
        )


# --- fixture export --------------------------------------------------------

class RecordingProxy:
    """Wraps any backend and records its responses into a FixtureStore, so a
    run can be replayed bit-exactly against the fixture family later.
    """

    def __init__(self, backend, store: FixtureStore):
        self.backend = backend
        self.kind = backend.kind
        self.identity = backend.identity
        self.memo = backend.memo
        self.store = store

    def sentence_embed(self, text: str):
        vec = self.backend.sentence_embed(text)
        self.store.sentence_embeddings[fnv1a_hex(text)] = [float(x) for x in vec]
        return vec

    def token_embed(self, text: str):
        vecs = self.backend.token_embed(text)
        self.store.token_embeddings[fnv1a_hex(text)] = [
            [float(x) for x in v] for v in vecs
        ]
        return vecs

    def visual_text_embed(self, text: str):
        vec = self.backend.visual_text_embed(text)
        self.store.visual_text_embeddings[fnv1a_hex(text)] = [float(x) for x in vec]
        return vec

    def nli_entailment(self, premise: str, hypothesis: str) -> float:
        score = self.backend.nli_entailment(premise, hypothesis)
        self.store.nli_scores[nli_key(premise, hypothesis)] = float(score)
        return score

    def extract(self, text: str):
        ents = self.backend.extract(text)
        self.store.entities[fnv1a_hex(text)] = [tuple(e) for e in ents]
        return ents
