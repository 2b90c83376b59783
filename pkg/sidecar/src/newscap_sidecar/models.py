"""Model bundles backing the HTTP endpoints.

Two families:

- ``HashModelBundle`` — deterministic seeded pseudo-embeddings, a bounded
  pseudo NLI score and a small built-in gazetteer NER.  No downloads, fully
  reproducible; the default for tests and offline work.
- ``RealModelBundle`` — the named reference models (a 384-dim MiniLM sentence
  embedder, a zero-shot DeBERTa NLI scorer, a spaCy NER pipeline, a CLIP
  text tower), loaded lazily.  Requires the ``models`` extra and downloaded
  weights.

Both expose the same batch-level callables the app serializes per model.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .hashing import fnv1a_hex, nli_key, seeded_unit_vector

NLI_DERIVATION = (
    "softmax over the model's entailment/contradiction logits for the "
    "hypothesis template, restricted to the entailment class"
)

_DEFAULT_GAZETTEER = {
    "gabriel boric": "PERSON",
    "boric": "PERSON",
    "santiago": "GPE",
    "chile": "GPE",
    "bbc": "ORG",
    "united nations": "ORG",
    "london": "GPE",
    "malcolm metcalf": "PERSON",
}


@dataclass
class HashModelBundle:
    sentence_dim: int = 384
    token_dim: int = 384
    visual_dim: int = 512
    seed: int = 0
    gazetteer: dict[str, str] = field(default_factory=lambda: dict(_DEFAULT_GAZETTEER))

    identity = "hash-stub-bundle"

    @property
    def dims(self) -> dict[str, int]:
        return {
            "sentence": self.sentence_dim,
            "tokens": self.token_dim,
            "visual-text": self.visual_dim,
        }

    def embed_sentences(self, texts: list[str]) -> list[list[float]]:
        return [
            seeded_unit_vector(fnv1a_hex(t), self.sentence_dim, self.seed).tolist()
            for t in texts
        ]

    def embed_tokens(self, texts: list[str]) -> list[list[list[float]]]:
        out = []
        for text in texts:
            tokens = text.split() or [text]
            out.append([
                seeded_unit_vector(
                    fnv1a_hex(f"{i}\x00{tok}"), self.token_dim, self.seed
                ).tolist()
                for i, tok in enumerate(tokens)
            ])
        return out

    def embed_visual_text(self, texts: list[str]) -> list[list[float]]:
        return [
            seeded_unit_vector(fnv1a_hex(t), self.visual_dim, self.seed ^ 0x5A5A).tolist()
            for t in texts
        ]

    def nli(self, pairs: list[tuple[str, str]]) -> list[float]:
        # uniform in (0, 1), deterministic in the pair hash
        return [
            int(nli_key(p, h).replace(":", ""), 16) % 10_000 / 10_000
            for p, h in pairs
        ]

    def ner(self, texts: list[str]) -> list[list[dict[str, str]]]:
        out = []
        for text in texts:
            found = []
            for surface, etype in self.gazetteer.items():
                for match in re.finditer(
                    rf"\b{re.escape(surface)}\b", text, flags=re.IGNORECASE
                ):
                    found.append({"surface": match.group(0), "type": etype})
            out.append(found)
        return out


class RealModelBundle:
    """Named reference models, loaded lazily on first use."""

    identity = "minilm-l12-v2+deberta-v3-zeroshot+en_core_web_sm+clip-vit-b32"

    def __init__(self):
        self._sentence = None
        self._visual = None
        self._nli = None
        self._ner = None

    @property
    def dims(self) -> dict[str, int]:
        return {"sentence": 384, "tokens": 384, "visual-text": 512}

    def _sentence_model(self):
        if self._sentence is None:
            from sentence_transformers import SentenceTransformer

            self._sentence = SentenceTransformer("sentence-transformers/all-MiniLM-L12-v2")
        return self._sentence

    def embed_sentences(self, texts: list[str]) -> list[list[float]]:
        return self._sentence_model().encode(texts, convert_to_numpy=True).tolist()

    def embed_tokens(self, texts: list[str]) -> list[list[list[float]]]:
        model = self._sentence_model()
        out = []
        for text in texts:
            features = model.tokenize([text])
            states = model.forward(features)["token_embeddings"][0]
            out.append(states.detach().cpu().numpy().tolist())
        return out

    def embed_visual_text(self, texts: list[str]) -> list[list[float]]:
        if self._visual is None:
            from sentence_transformers import SentenceTransformer

            self._visual = SentenceTransformer("sentence-transformers/clip-ViT-B-32")
        return self._visual.encode(texts, convert_to_numpy=True).tolist()

    def nli(self, pairs: list[tuple[str, str]]) -> list[float]:
        if self._nli is None:
            from transformers import pipeline

            self._nli = pipeline(
                "zero-shot-classification",
                model="MoritzLaurer/deberta-v3-base-zeroshot-v2.0",
            )
        scores = []
        for premise, hypothesis in pairs:
            result = self._nli(
                premise, candidate_labels=[hypothesis], hypothesis_template="{}"
            )
            scores.append(float(result["scores"][0]))
        return scores

    def ner(self, texts: list[str]) -> list[list[dict[str, str]]]:
        if self._ner is None:
            import spacy

            self._ner = spacy.load("en_core_web_sm")
        out = []
        for doc in self._ner.pipe(texts):
            out.append([{"surface": e.text, "type": e.label_} for e in doc.ents])
        return out


def build_bundle(family: str, seed: int = 0):
    if family == "hash":
        return HashModelBundle(seed=seed)
    if family == "real":
        return RealModelBundle()
    raise ValueError(f"unknown model family {family!r}")
