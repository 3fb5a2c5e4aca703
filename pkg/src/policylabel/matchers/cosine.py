"""Embedding-cosine baseline matcher.

Vectorizes case titles and excerpts with a pluggable sentence embedder and
scores pairs by cosine similarity. The decision uses raw similarity against
``similarity_threshold`` (the calibrated operating point is 0.25); the reported
probability maps similarity from [-1, 1] to [0, 1] via (sim + 1) / 2, so the
probability-space threshold is (similarity_threshold + 1) / 2 and the matcher
interface invariant holds unchanged.
"""

from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np

from .base import PairMatcher, check_pairs, stack_proba


def _encode(embedder, texts: Sequence[str]) -> np.ndarray:
    if hasattr(embedder, "encode"):
        vectors = np.asarray(embedder.encode(list(texts)), dtype=float)
    else:
        vectors = np.asarray([embedder(t) for t in texts], dtype=float)
    if vectors.ndim != 2:
        raise ValueError("embedder must return one fixed-dimension vector per text")
    return vectors


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
    if np.any(norms == 0):
        raise ValueError("zero-norm embedding")
    return np.sum(a * b, axis=1) / norms


class EmbeddingCosineMatcher(PairMatcher):
    _param_names = ("similarity_threshold",)

    def __init__(self, embedder, similarity_threshold: float = 0.25):
        self.embedder = embedder
        self.similarity_threshold = similarity_threshold

    @property
    def decision_threshold(self) -> float:
        return (self.similarity_threshold + 1.0) / 2.0

    @decision_threshold.setter
    def decision_threshold(self, value: float) -> None:
        self.similarity_threshold = 2.0 * value - 1.0

    def similarities(self, X) -> np.ndarray:
        pairs = check_pairs(X)
        titles = _encode(self.embedder, [t for t, _ in pairs])
        excerpts = _encode(self.embedder, [e for _, e in pairs])
        return cosine_similarity(titles, excerpts)

    def predict_proba(self, X) -> np.ndarray:
        return stack_proba((self.similarities(X) + 1.0) / 2.0)

    def predict(self, X) -> np.ndarray:
        return (self.similarities(X) >= self.similarity_threshold).astype(int)


def cosine_matcher(sentence_embedder, threshold: float = 0.25) -> EmbeddingCosineMatcher:
    return EmbeddingCosineMatcher(sentence_embedder, similarity_threshold=threshold)


class HashingEmbedder:
    """Deterministic bag-of-words hashing vectorizer.

    A dependency-free stand-in for a sentence embedder: tokens are hashed into
    a fixed number of buckets with a signed count, then L2-normalized. Lexical
    overlap produces high cosine similarity, which is all the baseline needs
    in tests and offline demos.
    """

    def __init__(self, dimension: int = 512):
        self.dimension = dimension

    def __call__(self, text: str) -> np.ndarray:
        vector = np.zeros(self.dimension)
        for token in text.lower().split():
            digest = hashlib.md5(token.encode("utf-8")).digest()
            bucket = int.from_bytes(digest[:4], "little") % self.dimension
            sign = 1.0 if digest[4] % 2 == 0 else -1.0
            vector[bucket] += sign
        norm = np.linalg.norm(vector)
        return vector if norm == 0 else vector / norm

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        return np.stack([self(t) for t in texts])
