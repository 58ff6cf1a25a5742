"""BERTScore-style greedy token matching over contextual embeddings.

The matching math is self-contained; embeddings come from a pluggable
provider. Two providers ship here: a file-backed store for deterministic
offline runs, and an HTTP client for the embedding service. A bounded
LRU cache keyed by (provider identity, text) sits above both.
"""
from __future__ import annotations

import json
import threading
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Protocol, Union

import numpy as np

__all__ = [
    "EmbeddingMatrix",
    "BertScoreTriple",
    "greedy_bertscore",
    "embed",
    "EmbeddingProvider",
    "ProviderError",
    "ProviderUnreachable",
    "TextRejected",
    "FileProvider",
    "ServiceProvider",
    "CachedProvider",
]


class ProviderError(Exception):
    """Base class for embedding-provider failures."""


class ProviderUnreachable(ProviderError):
    """The provider's backing store or service cannot be reached."""


class TextRejected(ProviderError):
    """The provider refused this specific text (unknown, empty, oversize)."""


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Per-token contextual embeddings under the provider's own tokenization."""

    tokens: tuple[str, ...]
    vectors: np.ndarray  # shape (len(tokens), dim)

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=np.float64)
        object.__setattr__(self, "vectors", vectors)
        if vectors.ndim != 2:
            raise ValueError(f"vectors must be 2-D, got shape {vectors.shape}")
        if vectors.shape[0] != len(self.tokens):
            raise ValueError(
                f"{len(self.tokens)} tokens but {vectors.shape[0]} vector rows"
            )
        if vectors.shape[0] == 0 or vectors.shape[1] == 0:
            raise ValueError("embedding matrix must be non-empty")
        if not np.isfinite(vectors).all():
            raise ValueError("embedding matrix contains NaN or Inf")

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


@dataclass(frozen=True)
class BertScoreTriple:
    precision: float
    recall: float
    f1: float


def greedy_bertscore(x_emb: EmbeddingMatrix, y_emb: EmbeddingMatrix) -> BertScoreTriple:
    """Greedy cosine matching between original ``x`` and candidate ``y``.

    Recall averages each x-token's best match among y tokens; precision
    averages each y-token's best match among x tokens.
    """
    if x_emb.dim != y_emb.dim:
        raise ValueError(f"dimension mismatch: {x_emb.dim} vs {y_emb.dim}")
    x = _normalize_rows(x_emb.vectors)
    y = _normalize_rows(y_emb.vectors)
    sim = x @ y.T
    recall = float(sim.max(axis=1).mean())
    precision = float(sim.max(axis=0).mean())
    denom = precision + recall
    f1 = 2 * precision * recall / denom if denom != 0 else 0.0
    return BertScoreTriple(precision=precision, recall=recall, f1=f1)


def _normalize_rows(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    # all-zero rows stay zero (cosine against them is 0)
    safe = np.where(norms == 0.0, 1.0, norms)
    return vectors / safe


class EmbeddingProvider(Protocol):
    @property
    def identity(self) -> str: ...

    def embed(self, text: str) -> EmbeddingMatrix: ...


def embed(provider: EmbeddingProvider, text: str) -> EmbeddingMatrix:
    """Embed ``text`` with ``provider``; deterministic per (identity, text)."""
    if not text:
        raise TextRejected("cannot embed empty text")
    return provider.embed(text)


class FileProvider:
    """Embeddings from a JSONL store mapping text to a stored matrix.

    Record shape: {"text", "model", "dim", "tokens", "vectors"}. Unknown
    texts are rejected; the store is read once and held in memory.
    """

    def __init__(self, path: Union[str, Path]):
        self._path = str(path)
        self._entries: dict[str, EmbeddingMatrix] = {}
        model: Optional[str] = None
        try:
            with open(path, encoding="utf-8") as f:
                for line_no, line in enumerate(f, start=1):
                    if not line.strip():
                        continue
                    record = json.loads(line)
                    matrix = EmbeddingMatrix(
                        tokens=tuple(record["tokens"]),
                        vectors=np.asarray(record["vectors"], dtype=np.float64),
                    )
                    if matrix.dim != int(record["dim"]):
                        raise ValueError(
                            f"line {line_no}: dim field {record['dim']} does not match vectors"
                        )
                    if model is None:
                        model = str(record["model"])
                    elif model != record["model"]:
                        raise ValueError(
                            f"line {line_no}: mixed models in store "
                            f"({model!r} vs {record['model']!r})"
                        )
                    self._entries[record["text"]] = matrix
        except OSError as e:
            raise ProviderUnreachable(f"cannot read embedding store {path}: {e}") from e
        except (KeyError, ValueError, json.JSONDecodeError) as e:
            raise ProviderUnreachable(f"malformed embedding store {path}: {e}") from e
        self._model = model or "empty"

    @property
    def identity(self) -> str:
        return f"file:{self._model}"

    def embed(self, text: str) -> EmbeddingMatrix:
        if not text:
            raise TextRejected("cannot embed empty text")
        try:
            return self._entries[text]
        except KeyError:
            raise TextRejected(
                f"text not present in embedding store {self._path}: {text[:60]!r}"
            ) from None


class ServiceProvider:
    """HTTP client for the embedding service's wire protocol.

    Talks to POST /embed and GET /health; at most ``max_in_flight``
    concurrent requests are issued.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0, max_in_flight: int = 4):
        self._endpoint = endpoint.rstrip("/")
        self._timeout = timeout
        self._sem = threading.Semaphore(max_in_flight)
        self._identity: Optional[str] = None
        self._lock = threading.Lock()

    @property
    def identity(self) -> str:
        with self._lock:
            if self._identity is None:
                health = self._get_json("/health")
                self._identity = f"service:{health['model']}"
            return self._identity

    def _get_json(self, route: str) -> dict:
        import requests

        try:
            resp = requests.get(self._endpoint + route, timeout=self._timeout)
        except requests.RequestException as e:
            raise ProviderUnreachable(f"GET {route} failed: {e}") from e
        if resp.status_code != 200:
            raise ProviderUnreachable(f"GET {route} returned {resp.status_code}")
        return resp.json()

    def embed(self, text: str) -> EmbeddingMatrix:
        import requests

        if not text:
            raise TextRejected("cannot embed empty text")
        with self._sem:
            try:
                resp = requests.post(
                    self._endpoint + "/embed", json={"texts": [text]}, timeout=self._timeout
                )
            except requests.RequestException as e:
                raise ProviderUnreachable(f"POST /embed failed: {e}") from e
        if resp.status_code in (400, 413):
            raise TextRejected(f"service rejected text ({resp.status_code}): {resp.text[:200]}")
        if resp.status_code != 200:
            raise ProviderUnreachable(f"POST /embed returned {resp.status_code}")
        try:
            payload = resp.json()
            result = payload["results"][0]
            if result.get("error"):
                raise TextRejected(f"service rejected text: {result['error']}")
            matrix = EmbeddingMatrix(
                tokens=tuple(result["tokens"]),
                vectors=np.asarray(result["vectors"], dtype=np.float64),
            )
        except TextRejected:
            raise
        except (KeyError, IndexError, ValueError) as e:
            raise ProviderUnreachable(f"malformed /embed response: {e}") from e
        with self._lock:
            if self._identity is None:
                self._identity = f"service:{payload['model']}"
        return matrix


class CachedProvider:
    """Thread-safe bounded LRU cache in front of another provider."""

    def __init__(self, inner: EmbeddingProvider, capacity: int = 4096):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self._inner = inner
        self._capacity = capacity
        self._cache: OrderedDict[tuple[str, str], EmbeddingMatrix] = OrderedDict()
        self._lock = threading.Lock()

    @property
    def identity(self) -> str:
        return self._inner.identity

    def embed(self, text: str) -> EmbeddingMatrix:
        key = (self._inner.identity, text)
        with self._lock:
            if key in self._cache:
                self._cache.move_to_end(key)
                return self._cache[key]
        matrix = self._inner.embed(text)
        with self._lock:
            self._cache[key] = matrix
            self._cache.move_to_end(key)
            while len(self._cache) > self._capacity:
                self._cache.popitem(last=False)
        return matrix
