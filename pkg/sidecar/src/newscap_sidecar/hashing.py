"""Text hashing shared with the evaluation harness's fixture file format.

The fixture files the sidecar exports are keyed by the 64-bit FNV-1a hash of
the NFC-normalized UTF-8 text, so the constants here must stay in sync with
the consumer's file schema.
"""

from __future__ import annotations

import unicodedata

import numpy as np

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF


def fnv1a_hex(text: str) -> str:
    h = _FNV_OFFSET
    for byte in unicodedata.normalize("NFC", text).encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK
    return f"{h:016x}"


def nli_key(premise: str, hypothesis: str) -> str:
    return f"{fnv1a_hex(premise)}:{fnv1a_hex(hypothesis)}"


def seeded_unit_vector(key: str, dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng((int(key, 16) ^ seed) & _MASK)
    vec = rng.standard_normal(dim)
    return vec / np.linalg.norm(vec)
