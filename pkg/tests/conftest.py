import numpy as np
import pytest

from newscap.backends import fnv1a_hex


class OrthogonalEmbedder:
    """Maps each distinct text to a distinct standard basis vector."""

    kind = "sentence-embedder"

    def __init__(self, dim: int = 64, identity: str = "orthogonal-test"):
        self.dim = dim
        self.identity = identity
        self._index: dict[str, int] = {}

    def sentence_embed(self, text: str):
        if text not in self._index:
            if len(self._index) >= self.dim:
                raise RuntimeError("orthogonal embedder capacity exceeded")
            self._index[text] = len(self._index)
        vec = np.zeros(self.dim)
        vec[self._index[text]] = 1.0
        return vec

    def visual_text_embed(self, text: str):
        return self.sentence_embed(text)


class ConstantEmbedder:
    kind = "sentence-embedder"
    identity = "constant-test"

    def __init__(self, dim: int = 8):
        self.dim = dim

    def sentence_embed(self, text: str):
        vec = np.zeros(self.dim)
        vec[0] = 1.0
        return vec


class TableNliScorer:
    """NLI stub returning fixed scores per (premise, hypothesis)."""

    kind = "nli-scorer"
    identity = "table-nli-test"

    def __init__(self, scores: dict, default: float = 0.0):
        self.scores = scores
        self.default = default

    def nli_entailment(self, premise: str, hypothesis: str) -> float:
        return self.scores.get((premise, hypothesis), self.default)


class TableEntityExtractor:
    """NER stub returning a fixed entity list per exact text."""

    kind = "entity-extractor"
    identity = "table-ner-test"

    def __init__(self, table: dict):
        self.table = table

    def extract(self, text: str):
        return list(self.table.get(text, []))


@pytest.fixture
def orthogonal_embedder():
    return OrthogonalEmbedder()


@pytest.fixture
def constant_embedder():
    return ConstantEmbedder()
