"""
Deterministic feature-hashing text embedder.
"""
import hashlib
import math
import re
from collections import Counter
from typing import List

import numpy as np

from casecontext.errors import EncodingError

_TOKEN_RE = re.compile(r"[^\W_]+")


def _features(text: str) -> List[str]:
    tokens = _TOKEN_RE.findall(text.lower())
    bigrams = [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]
    return tokens + bigrams


def _bucket_and_sign(feature: str, dim: int, seed: int):
    digest = hashlib.blake2b(f"{seed}:{feature}".encode("utf-8"), digest_size=8).digest()
    value = int.from_bytes(digest, "little")
    return value % dim, (1.0 if (value >> 63) & 1 == 0 else -1.0)


def local_embed(text: str, dim: int = 4096, seed: int = 0) -> np.ndarray:
    """
    Embed text by hashing lowercased word unigrams and bigrams into ``dim`` buckets.

    Each feature adds a seeded sign times ``1 + ln(count)`` to its bucket; the
    result is L2-normalized. Text without words maps to the zero vector, which
    ``EmbeddingStore.unnormalizable_ids`` reports and cosine projection rejects.

    Args:
        text (str): Input text.
        dim (int): Output dimension, at least 8.
        seed (int): Hash seed.

    Returns:
        np.ndarray: float64 vector of shape ``(dim,)``.
    """
    if dim < 8:
        raise EncodingError(f"local_embed dimension must be >= 8, got {dim}")
    vector = np.zeros(dim, dtype=np.float64)
    for feature, count in Counter(_features(text)).items():
        bucket, sign = _bucket_and_sign(feature, dim, seed)
        vector[bucket] += sign * (1.0 + math.log(count))
    norm = np.linalg.norm(vector)
    if norm > 0:
        vector /= norm
    return vector
