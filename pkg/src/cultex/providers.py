"""Sentiment and embedding providers.

Every metric in the pipeline consumes exactly two learned features: a
sentiment score in [-1, 1] and a fixed-dimension sentence embedding. Both sit
behind small protocols with two families of implementations:

* deterministic, dependency-free doubles (hashed bag-of-words embedder and a
  lexicon sentiment scorer) whose outputs can be verified by hand, and
* real-model providers (transformer sentiment classifier, sentence encoder)
  that load lazily and cache per-text results by content hash.

Binary sentiment classifiers are mapped to signed confidence: a positive
label scores +confidence, a negative label -confidence.
"""

from __future__ import annotations

import hashlib
import json
import threading
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .errors import ConfigurationError, ProviderError
from .text import tokenize

_DATA_DIR = Path(__file__).parent / "data" / "lexicons"


class SentimentProvider(Protocol):
    name: str

    def score(self, text: str) -> float: ...


class EmbeddingProvider(Protocol):
    name: str
    dimension: int

    def embed(self, text: str) -> np.ndarray: ...


def average_embedding(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Componentwise mean of same-dimension vectors."""
    if len(vectors) == 0:
        raise ValueError("cannot average an empty list of embeddings")
    first = np.asarray(vectors[0], dtype=np.float64)
    for v in vectors[1:]:
        if np.asarray(v).shape != first.shape:
            raise ValueError(
                f"embedding dimension mismatch: {np.asarray(v).shape} vs {first.shape}"
            )
    return np.mean(np.stack([np.asarray(v, dtype=np.float64) for v in vectors]), axis=0)


def _require_text(text: str) -> str:
    if not text or not text.strip():
        raise ValueError("text must be non-empty")
    return text


# ── deterministic doubles ─────────────────────────────────────────────────────


class HashedBagOfWordsEmbedder:
    """Token counts accumulated into a fixed-size vector by a stable token hash.

    CRC32 keeps the hash stable across processes, so identical texts always
    yield bitwise-identical vectors.
    """

    def __init__(self, dimension: int = 64):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        self.dimension = dimension
        self.name = f"double:hashed-bow:{dimension}"

    def token_index(self, token: str) -> int:
        return zlib.crc32(token.encode("utf-8")) % self.dimension

    def embed(self, text: str) -> np.ndarray:
        _require_text(text)
        vec = np.zeros(self.dimension, dtype=np.float64)
        for token in tokenize(text):
            vec[self.token_index(token)] += 1.0
        return vec


class LexiconSentimentScorer:
    """Signed hit-proportion scorer: (pos - neg) / (pos + neg), 0 with no hits."""

    def __init__(self, positive: frozenset[str], negative: frozenset[str], name: str = "double:lexicon"):
        self.positive = positive
        self.negative = negative
        self.name = name

    @classmethod
    def default(cls) -> "LexiconSentimentScorer":
        return cls(
            positive=frozenset(load_term_file(_DATA_DIR / "sentiment_positive.txt")),
            negative=frozenset(load_term_file(_DATA_DIR / "sentiment_negative.txt")),
        )

    def score(self, text: str) -> float:
        _require_text(text)
        tokens = tokenize(text)
        pos = sum(1 for t in tokens if t in self.positive)
        neg = sum(1 for t in tokens if t in self.negative)
        if pos + neg == 0:
            return 0.0
        return (pos - neg) / (pos + neg)


def load_term_file(path: str | Path) -> list[str]:
    """One lowercase term per line; ``#`` starts a comment."""
    terms = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            term = line.split("#", 1)[0].strip().casefold()
            if term:
                terms.append(term)
    return terms


# ── real-model providers (lazy) ───────────────────────────────────────────────


class TransformerSentimentProvider:
    """Binary sentiment classifier mapped to signed confidence in [-1, 1]."""

    def __init__(self, model_name: str = "distilbert-base-uncased-finetuned-sst-2-english"):
        self.name = f"builtin:{model_name}"
        self._model_name = model_name
        self._pipeline = None

    def _load(self):
        if self._pipeline is None:
            try:
                from transformers import pipeline
            except ImportError as exc:
                raise ProviderError(
                    "transformers is not installed; use the real-models extra or a double"
                ) from exc
            self._pipeline = pipeline("sentiment-analysis", model=self._model_name)
        return self._pipeline

    def score(self, text: str) -> float:
        _require_text(text)
        try:
            result = self._load()(text[:2000], truncation=True)[0]
        except Exception as exc:
            raise ProviderError(f"sentiment inference failed: {exc}") from exc
        confidence = float(result["score"])
        signed = confidence if result["label"].upper().startswith("POS") else -confidence
        return max(-1.0, min(1.0, signed))


class SentenceEmbeddingProvider:
    """Sentence-encoder embeddings via sentence-transformers."""

    def __init__(self, model_name: str = "all-MiniLM-L6-v2"):
        self.name = f"builtin:{model_name}"
        self._model_name = model_name
        self._model = None
        self.dimension = -1  # known after the first load

    def _load(self):
        if self._model is None:
            try:
                from sentence_transformers import SentenceTransformer
            except ImportError as exc:
                raise ProviderError(
                    "sentence-transformers is not installed; use the real-models extra or a double"
                ) from exc
            self._model = SentenceTransformer(self._model_name)
            self.dimension = int(self._model.get_sentence_embedding_dimension())
        return self._model

    def embed(self, text: str) -> np.ndarray:
        _require_text(text)
        try:
            vec = self._load().encode([text], convert_to_numpy=True, show_progress_bar=False)[0]
        except Exception as exc:
            raise ProviderError(f"embedding inference failed: {exc}") from exc
        return np.asarray(vec, dtype=np.float64)


# ── content-hash feature cache ────────────────────────────────────────────────


class FeatureCache:
    """Pure on-disk cache: one file per (provider, text) content hash.

    Layout under ``root``: ``<key>.npy`` for vectors, ``<key>.json`` for
    scores, where key is sha256 over provider name and text. Deleting the
    directory only costs recomputation. Writes go through a temp file and an
    atomic rename, and a lock keeps concurrent scoring safe.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    @staticmethod
    def key(provider_name: str, text: str) -> str:
        digest = hashlib.sha256()
        digest.update(provider_name.encode("utf-8"))
        digest.update(b"\x00")
        digest.update(text.encode("utf-8"))
        return digest.hexdigest()

    def get_score(self, key: str) -> float | None:
        path = self.root / f"{key}.json"
        if not path.exists():
            return None
        with open(path, encoding="utf-8") as fh:
            return float(json.load(fh)["score"])

    def put_score(self, key: str, score: float) -> None:
        path = self.root / f"{key}.json"
        tmp = path.with_suffix(".json.tmp")
        with self._lock:
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump({"score": score}, fh)
            tmp.replace(path)

    def get_vector(self, key: str) -> np.ndarray | None:
        path = self.root / f"{key}.npy"
        if not path.exists():
            return None
        return np.load(path)

    def put_vector(self, key: str, vec: np.ndarray) -> None:
        path = self.root / f"{key}.npy"
        tmp = path.with_suffix(".npy.tmp")
        with self._lock:
            with open(tmp, "wb") as fh:
                np.save(fh, vec)
            tmp.replace(path)


class CachedSentimentProvider:
    def __init__(self, inner: SentimentProvider, cache: FeatureCache):
        self.inner = inner
        self.cache = cache
        self.name = inner.name

    def score(self, text: str) -> float:
        key = FeatureCache.key(self.name, text)
        hit = self.cache.get_score(key)
        if hit is not None:
            return hit
        value = self.inner.score(text)
        self.cache.put_score(key, value)
        return value


class CachedEmbeddingProvider:
    def __init__(self, inner: EmbeddingProvider, cache: FeatureCache):
        self.inner = inner
        self.cache = cache
        self.name = inner.name

    @property
    def dimension(self) -> int:
        return self.inner.dimension

    def embed(self, text: str) -> np.ndarray:
        key = FeatureCache.key(self.name, text)
        hit = self.cache.get_vector(key)
        if hit is not None:
            return hit
        vec = self.inner.embed(text)
        self.cache.put_vector(key, vec)
        return vec


# ── provider selection ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ProviderSpec:
    kind: str  # "double" or "builtin"
    name: str


def _parse_spec(spec: str) -> ProviderSpec:
    kind, _, name = spec.partition(":")
    if kind not in ("double", "builtin") or not name:
        raise ConfigurationError(
            f"provider spec must look like 'double:<name>' or 'builtin:<name>', got {spec!r}"
        )
    return ProviderSpec(kind, name)


def make_sentiment_provider(spec: str) -> SentimentProvider:
    parsed = _parse_spec(spec)
    if parsed.kind == "double":
        if parsed.name == "lexicon":
            return LexiconSentimentScorer.default()
        raise ConfigurationError(f"unknown sentiment double {parsed.name!r}")
    return TransformerSentimentProvider(parsed.name)


def make_embedding_provider(spec: str) -> EmbeddingProvider:
    parsed = _parse_spec(spec)
    if parsed.kind == "double":
        name, _, dim = parsed.name.partition(":")
        if name == "hashed-bow":
            return HashedBagOfWordsEmbedder(int(dim) if dim else 64)
        raise ConfigurationError(f"unknown embedding double {parsed.name!r}")
    return SentenceEmbeddingProvider(parsed.name)
