"""Score a pair of candidate captions against a reference, metric by metric.

Run: python3 demos/01_score_two_captions.py
"""

from newscap.backends import HashStubSentenceEmbedder, HashStubTokenEmbedder
from newscap.embedding import bert_score, text_similarity
from newscap.fidelity import token_ratio
from newscap.lexical import meteor, rouge_l, tokenize

REFERENCE = (
    "Gabriel Boric addressed supporters in Santiago after the election results"
)
CAPTIONS = {
    "close": "Boric spoke to supporters in Santiago following the election",
    "vague": "A man is talking to a crowd outdoors",
}

ref_tokens = tokenize(REFERENCE)
sentence = HashStubSentenceEmbedder(dim=64, seed=1)
tokens = HashStubTokenEmbedder(dim=32, seed=1)

print(f"reference: {REFERENCE!r}\n")
for name, caption in CAPTIONS.items():
    cand = tokenize(caption)
    r = rouge_l(cand, ref_tokens)
    m = meteor(cand, ref_tokens)
    b = bert_score(caption, REFERENCE, tokens)
    sim = text_similarity(caption, REFERENCE, sentence)
    print(f"caption [{name}]: {caption!r}")
    print(f"  ROUGE-L F1   {r.f1:.4f}  (P {r.precision:.4f} / R {r.recall:.4f})")
    print(f"  METEOR       {m.score:.4f}  ({m.matches} matches, {m.chunks} chunks)")
    print(f"  BERTScore F1 {b.f1:.4f}  (stub token embeddings)")
    print(f"  Text Sim.    {sim:.4f}  (stub sentence embeddings)")
    print()

print("fuzzy entity surface matching:")
for a, b in [("boric", "gabriel boric"), ("santiago", "san diego")]:
    print(f"  token_ratio({a!r}, {b!r}) = {token_ratio(a, b):.1f}")
