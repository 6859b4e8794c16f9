"""Text-guided hairstyle retrieval and chat-intent routing.

Embeddings come from a pluggable provider. The local fallback provider
is fully deterministic and offline: lowercase, split on non-alphanumeric
runs, signed-hash each token into D buckets, weight every occurrence by
1/sqrt(token count) so the raw norm sits near 1, then L2-normalize
exactly. An external HTTP provider can replace it; mixing providers in
one index is rejected because cross-provider cosine is meaningless.
"""

from __future__ import annotations

import hashlib
import re
import time
from dataclasses import dataclass

import numpy as np

from .errors import (DimensionMismatch, DuplicateId, EmptyText, MalformedResponse,
                     ProviderMismatch, ProviderUnavailable)

_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")
DEFAULT_DIM = 512


@dataclass(frozen=True, slots=True)
class TextEmbedding:
    """Unit vector over the provider's embedding space."""

    vector: np.ndarray
    provider_id: str

    def __post_init__(self):
        vec = np.ascontiguousarray(np.asarray(self.vector, np.float64)).reshape(-1)
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > 1e-5:
            raise ValueError(f"embedding norm {norm} not unit within 1e-5")

    @property
    def dim(self) -> int:
        return self.vector.shape[0]


@dataclass(frozen=True, slots=True)
class EmbeddingIndex:
    """Row-major matrix of unit caption embeddings plus their style ids."""

    matrix: np.ndarray
    ids: tuple
    provider_id: str

    def __post_init__(self):
        m = np.ascontiguousarray(np.asarray(self.matrix, np.float64))
        if m.ndim != 2:
            m = m.reshape(0, DEFAULT_DIM)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        if len(self.ids) != m.shape[0]:
            raise ValueError("one id per row required")
        if m.shape[0]:
            norms = np.linalg.norm(m, axis=1)
            if np.any(np.abs(norms - 1.0) > 1e-5):
                raise ValueError("index rows must be unit norm within 1e-5")

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True, slots=True)
class SimilarityResult:
    """Ordered (id, score) pairs, scores non-increasing."""

    entries: tuple

    def ids(self):
        return [e[0] for e in self.entries]


@dataclass(frozen=True, slots=True)
class Intent:
    """One routed chat intent; exactly one kind."""

    kind: str  # retrieve | wind | simulate | render | unknown
    query: str = ""
    on: bool = True
    strength: float | None = None
    raw: str = ""


class FallbackProvider:
    """Deterministic local embedding by signed token hashing."""

    def __init__(self, dim: int = DEFAULT_DIM):
        self.dim = int(dim)
        self.provider_id = f"fallback-d{self.dim}"

    def embed(self, texts):
        return [self._one(t) for t in texts]

    def _one(self, text: str) -> np.ndarray:
        tokens = [t for t in _TOKEN_SPLIT.split(text.lower()) if t]
        if not tokens:
            raise EmptyText(f"no tokens in {text!r}")
        vec = np.zeros(self.dim, np.float64)
        w = 1.0 / np.sqrt(len(tokens))
        for tok in tokens:
            digest = hashlib.blake2b(tok.encode("utf-8"), digest_size=8).digest()
            h = int.from_bytes(digest, "little")
            sign = 1.0 if (h >> 63) & 1 == 0 else -1.0
            vec[h % self.dim] += sign * w
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            # only possible through exact cancellation of colliding tokens
            raise EmptyText(f"embedding cancelled to zero for {text!r}")
        return vec / norm


class HttpProvider:
    """Client for the external embedding service.

    POST {base_url}/embed with {"texts": [...]} returning
    {"dim": D, "vectors": [[...], ...]}. Retries transient failures,
    then surfaces ProviderUnavailable carrying the attempt count.
    """

    def __init__(self, base_url: str, dim: int = DEFAULT_DIM, retries: int = 2,
                 timeout: float = 10.0, transport=None):
        import httpx

        self.base_url = base_url.rstrip("/")
        self.dim = int(dim)
        self.provider_id = self.base_url
        self.retries = int(retries)
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def embed(self, texts):
        import httpx

        texts = list(texts)
        attempts = 0
        while True:
            attempts += 1
            try:
                resp = self._client.post(f"{self.base_url}/embed", json={"texts": texts})
                resp.raise_for_status()
                body = resp.json()
                vectors = body["vectors"]
                if len(vectors) != len(texts):
                    raise MalformedResponse("vector count mismatch")
                out = []
                for v in vectors:
                    arr = np.asarray(v, np.float64)
                    norm = np.linalg.norm(arr)
                    if arr.shape != (int(body["dim"]),) or norm == 0.0:
                        raise MalformedResponse("bad vector shape or zero norm")
                    out.append(arr / norm)  # defensive re-normalization
                return out
            except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                if attempts > self.retries:
                    raise ProviderUnavailable(str(exc), attempts=attempts) from exc
                time.sleep(0.05 * attempts)
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedResponse(str(exc)) from exc


def get_provider(spec: str, dim: int = DEFAULT_DIM, transport=None):
    """\"fallback\" or an http(s) base URL."""
    if spec == "fallback":
        return FallbackProvider(dim=dim)
    return HttpProvider(spec, dim=dim, transport=transport)


def embed_text(text: str, provider) -> TextEmbedding:
    """Embed one text as a unit vector.

    Raises
    ------
    EmptyText
        If the text is empty after trimming (or tokenizes to nothing
        under the fallback provider).
    ProviderUnavailable
        External provider unreachable after retries.
    """
    if not text or not text.strip():
        raise EmptyText("text is empty")
    vec = provider.embed([text])[0]
    return TextEmbedding(vector=vec, provider_id=provider.provider_id)


def build_index(captioned, provider) -> EmbeddingIndex:
    """Embed (id, caption) pairs in order.

    Raises
    ------
    DuplicateId
    """
    captioned = list(captioned)
    ids = [str(i) for i, _ in captioned]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise DuplicateId(f"duplicate ids: {dupes}")
    if not captioned:
        return EmbeddingIndex(matrix=np.zeros((0, provider.dim)), ids=(),
                              provider_id=provider.provider_id)
    try:
        vectors = provider.embed([c for _, c in captioned])
    except EmptyText as exc:
        # name the failing entry per the operation contract
        for sid, caption in captioned:
            if not caption.strip():
                raise EmptyText(f"caption of {sid!r} is empty") from exc
        raise
    return EmbeddingIndex(matrix=np.vstack(vectors), ids=tuple(ids),
                          provider_id=provider.provider_id)


def retrieve_top_k(index: EmbeddingIndex, query: TextEmbedding, k: int = 3) -> SimilarityResult:
    """Exact cosine top-k by dot product; ties broken by ascending id.

    Raises
    ------
    ProviderMismatch, DimensionMismatch
    """
    if query.provider_id != index.provider_id:
        raise ProviderMismatch(f"query {query.provider_id!r} vs index {index.provider_id!r}")
    if query.dim != index.dim:
        raise DimensionMismatch(f"query dim {query.dim} vs index dim {index.dim}")
    if k < 1:
        raise ValueError("k must be >= 1")
    scores = index.matrix @ query.vector
    order = sorted(range(index.size), key=lambda i: (-scores[i], index.ids[i]))
    top = order[:k]
    return SimilarityResult(entries=tuple((index.ids[i], float(scores[i])) for i in top))


_WIND_WORDS = {"wind", "breeze", "gust", "windy", "gusty"}
_SIM_WORDS = {"sim", "simulation", "simulate", "physics"}
_STOP_WORDS = {"stop", "freeze", "pause", "halt"}
_START_WORDS = {"start", "resume", "run", "continue", "unfreeze"}
_RENDER_WORDS = {"render", "photo", "picture", "photograph", "image"}
_OFF_WORDS = {"stop", "off", "disable", "calm", "no"}


def route_intent(text: str) -> Intent:
    """Order-sensitive keyword routing; total, never raises.

    Rule order: wind words; stop/freeze plus sim words -> simulate off;
    start/resume plus sim words -> simulate on; render words -> render;
    anything else retrieves the raw text.
    """
    raw = text or ""
    tokens = set(_TOKEN_SPLIT.split(raw.lower())) - {""}
    if tokens & _WIND_WORDS:
        on = not (tokens & _OFF_WORDS)
        strength = None
        m = re.search(r"(\d+(?:\.\d+)?)", raw)
        if m:
            strength = float(m.group(1))
        return Intent(kind="wind", on=on, strength=strength, raw=raw)
    if (tokens & _STOP_WORDS) and (tokens & _SIM_WORDS):
        return Intent(kind="simulate", on=False, raw=raw)
    if (tokens & _START_WORDS) and (tokens & _SIM_WORDS):
        return Intent(kind="simulate", on=True, raw=raw)
    if tokens & _RENDER_WORDS:
        return Intent(kind="render", raw=raw)
    return Intent(kind="retrieve", query=raw, raw=raw)
