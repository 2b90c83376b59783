"""Export pre-computed model outputs as a fixture file.

The output is JSON-lines, one record per unique input, in the schema the
evaluation harness's fixture backends read:

    {"kind": "sentence-embedder", "key": "<fnv1a hex>", "vector": [...]}
    {"kind": "token-embedder", "key": "<hex>", "vectors": [[...], ...]}
    {"kind": "visual-text-embedder", "key": "<hex>", "vector": [...]}
    {"kind": "nli-scorer", "key": "<hex>:<hex>", "score": 0.42}
    {"kind": "entity-extractor", "key": "<hex>", "entities": [["surface","TYPE"]]}

Duplicate inputs collapse to a single record because records are keyed by
text hash.
"""

from __future__ import annotations

import json
from pathlib import Path

from .hashing import fnv1a_hex, nli_key


def export_fixtures(bundle, requests: dict, out_path: str | Path) -> int:
    """Replay a request corpus through ``bundle`` and write fixture records.

    ``requests`` maps request kinds to input lists::

        {"sentence": [text, ...], "tokens": [...], "visual": [...],
         "nli": [{"premise": ..., "hypothesis": ...}, ...], "ner": [...]}

    All keys are optional.  Returns the number of records written.
    """
    records: dict[tuple[str, str], dict] = {}

    def add(kind: str, key: str, payload_name: str, value):
        records[(kind, key)] = {"kind": kind, "key": key, payload_name: value}

    texts = list(dict.fromkeys(requests.get("sentence", [])))
    if texts:
        for text, vec in zip(texts, bundle.embed_sentences(texts)):
            add("sentence-embedder", fnv1a_hex(text), "vector", vec)

    texts = list(dict.fromkeys(requests.get("tokens", [])))
    if texts:
        for text, vecs in zip(texts, bundle.embed_tokens(texts)):
            add("token-embedder", fnv1a_hex(text), "vectors", vecs)

    texts = list(dict.fromkeys(requests.get("visual", [])))
    if texts:
        for text, vec in zip(texts, bundle.embed_visual_text(texts)):
            add("visual-text-embedder", fnv1a_hex(text), "vector", vec)

    pairs = list(dict.fromkeys(
        (p["premise"], p["hypothesis"]) for p in requests.get("nli", [])
    ))
    if pairs:
        for (premise, hypothesis), score in zip(pairs, bundle.nli(pairs)):
            add("nli-scorer", nli_key(premise, hypothesis), "score", score)

    texts = list(dict.fromkeys(requests.get("ner", [])))
    if texts:
        for text, ents in zip(texts, bundle.ner(texts)):
            add(
                "entity-extractor",
                fnv1a_hex(text),
                "entities",
                [[e["surface"], e["type"]] for e in ents],
            )

    lines = [
        json.dumps(records[key], sort_keys=True) for key in sorted(records)
    ]
    Path(out_path).write_text(
        "\n".join(lines) + ("\n" if lines else ""), encoding="utf-8"
    )
    return len(records)
