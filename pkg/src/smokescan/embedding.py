"""Embedding gateway: 512-d image/text vectors and cosine similarity.

Backends are pluggable. The remote backend speaks a small JSON protocol to
an external model server; the deterministic mock derives a unit vector from
a keyed hash of the input so every downstream test is reproducible without
model weights.
"""

from __future__ import annotations

import base64
import hashlib
import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Protocol

import httpx
import numpy as np

from .errors import BackendUnavailable, MalformedResponse
from .ingest import Frame

DIMENSION = 512
DEFAULT_TIMEOUT = 10.0
DEFAULT_MAX_IN_FLIGHT = 8
DEFAULT_CACHE_CAPACITY = 4096


@dataclass(frozen=True)
class EmbeddingVector:
    """Immutable 512-d real vector; finite and never all-zero."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.shape != (DIMENSION,):
            raise ValueError(f"embedding must have dimension {DIMENSION}, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("embedding contains non-finite values")
        if not np.any(arr):
            raise ValueError("zero embedding is not constructible")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return DIMENSION


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity, clamped to [-1, 1] against floating rounding."""
    num = float(np.dot(a.values, b.values))
    denom = float(np.linalg.norm(a.values) * np.linalg.norm(b.values))
    return min(1.0, max(-1.0, num / denom))


class EmbeddingBackend(Protocol):
    backend_id: str

    def embed(self, kind: str, payload: bytes) -> EmbeddingVector: ...


def _frame_bytes(frame: Frame) -> bytes:
    return frame.pixels.tobytes()


def content_hash(payload: bytes) -> str:
    return hashlib.blake2b(payload, digest_size=16).hexdigest()


class MockEmbeddingBackend:
    """Deterministic stand-in for the real multimodal model.

    For each input, a counter-based PRNG is keyed with a hash of
    (seed, input bytes), 512 standard normals are drawn, and the result is
    normalized to unit length. Same backend + same input = same vector.
    """

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        self.backend_id = f"mock:{self.seed}"

    def embed(self, kind: str, payload: bytes) -> EmbeddingVector:
        digest = hashlib.blake2b(
            self.seed.to_bytes(8, "little", signed=True) + payload,
            digest_size=16,
        ).digest()
        rng = np.random.Generator(np.random.Philox(key=int.from_bytes(digest, "little")))
        vec = rng.standard_normal(DIMENSION)
        return EmbeddingVector(vec / np.linalg.norm(vec))


class RemoteEmbeddingBackend:
    """Client for an external embedding service.

    Wire protocol: POST {endpoint}/embed with
    ``{"kind": "image"|"text", "data": <base64 raster or plain string>}``;
    the response carries ``{"vector": [512 floats]}``. In-flight requests
    are bounded.
    """

    def __init__(
        self,
        endpoint: str,
        timeout: float = DEFAULT_TIMEOUT,
        max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.backend_id = f"remote:{self.endpoint}"
        self.max_in_flight = max_in_flight
        self._client = client or httpx.Client(timeout=timeout)
        self._slots = threading.BoundedSemaphore(max_in_flight)

    def embed(self, kind: str, payload: bytes) -> EmbeddingVector:
        if kind == "image":
            data = base64.b64encode(payload).decode("ascii")
        else:
            data = payload.decode("utf-8")
        with self._slots:
            try:
                resp = self._client.post(
                    f"{self.endpoint}/embed", json={"kind": kind, "data": data}
                )
                resp.raise_for_status()
            except httpx.HTTPError as exc:
                raise BackendUnavailable(f"embedding service: {exc}") from exc
        try:
            vector = resp.json()["vector"]
        except (KeyError, ValueError) as exc:
            raise MalformedResponse("embedding response lacks 'vector'") from exc
        if not isinstance(vector, list) or len(vector) != DIMENSION:
            raise MalformedResponse(
                f"expected {DIMENSION} values, got {len(vector) if isinstance(vector, list) else type(vector)}"
            )
        try:
            return EmbeddingVector(np.asarray(vector, dtype=np.float64))
        except ValueError as exc:
            raise MalformedResponse(str(exc)) from exc


class EmbeddingCache:
    """Thread-safe LRU keyed by (backend_id, content hash)."""

    def __init__(self, capacity: int = DEFAULT_CACHE_CAPACITY):
        if capacity < 1:
            raise ValueError("cache capacity must be >= 1")
        self.capacity = capacity
        self._lock = threading.Lock()
        self._entries: OrderedDict[tuple[str, str], EmbeddingVector] = OrderedDict()

    def get(self, key: tuple[str, str]) -> EmbeddingVector | None:
        with self._lock:
            vec = self._entries.get(key)
            if vec is not None:
                self._entries.move_to_end(key)
            return vec

    def put(self, key: tuple[str, str], vec: EmbeddingVector) -> None:
        with self._lock:
            self._entries[key] = vec
            self._entries.move_to_end(key)
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


def _embed_cached(
    backend: EmbeddingBackend,
    kind: str,
    payload: bytes,
    cache: EmbeddingCache | None,
) -> EmbeddingVector:
    if cache is None:
        return backend.embed(kind, payload)
    key = (backend.backend_id, f"{kind}:{content_hash(payload)}")
    hit = cache.get(key)
    if hit is not None:
        return hit
    vec = backend.embed(kind, payload)
    cache.put(key, vec)
    return vec


def embed_image(
    frame: Frame,
    backend: EmbeddingBackend,
    cache: EmbeddingCache | None = None,
) -> EmbeddingVector:
    return _embed_cached(backend, "image", _frame_bytes(frame), cache)


def embed_text(
    text: str,
    backend: EmbeddingBackend,
    cache: EmbeddingCache | None = None,
) -> EmbeddingVector:
    if not text:
        raise ValueError("cannot embed an empty string")
    return _embed_cached(backend, "text", text.encode("utf-8"), cache)
