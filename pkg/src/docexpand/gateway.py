"""Embedding and chat backends.

Two kinds are provided: ``http`` speaks the common ``/v1/embeddings`` and
``/v1/chat/completions`` JSON protocol, and ``stub`` is a deterministic local
stand-in used for hermetic runs and tests.
"""

from __future__ import annotations

import hashlib
import logging
import os
import re
import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import httpx
import numpy as np

from .text import content_terms

logger = logging.getLogger(__name__)


class GatewayError(RuntimeError):
    """Base class for backend failures."""


class BackendUnavailable(GatewayError):
    pass


class DimensionMismatch(GatewayError):
    pass


class EmptyCompletion(GatewayError):
    pass


class ScriptExhausted(GatewayError):
    """A scripted stub was asked for more completions than it holds."""


@dataclass
class BackendConfig:
    kind: str = "stub"
    endpoint: str | None = None
    model_name: str = "stub"
    dimension: int = 64
    timeout: float = 60.0
    max_retries: int = 3
    max_in_flight: int = 8
    batch_size: int = 64
    normalize: bool = True
    api_key: str | None = None
    backoff_initial: float = 0.5
    backoff_factor: float = 2.0

    def validate(self) -> None:
        if self.kind not in ("http", "stub"):
            raise ValueError(f"backend kind must be 'http' or 'stub', got {self.kind!r}")
        if self.kind == "http" and (not self.endpoint or not self.model_name):
            raise ValueError("http backends require endpoint and model_name")
        if self.dimension <= 0:
            raise ValueError("dimension must be positive")
        if self.max_in_flight <= 0 or self.batch_size <= 0:
            raise ValueError("max_in_flight and batch_size must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    def with_env(self, prefix: str) -> "BackendConfig":
        """Apply ``{prefix}_ENDPOINT`` / ``{prefix}_MODEL`` environment overrides."""
        endpoint = os.environ.get(f"{prefix}_ENDPOINT")
        model = os.environ.get(f"{prefix}_MODEL")
        if endpoint:
            self.endpoint = endpoint
        if model:
            self.model_name = model
        return self


@dataclass(frozen=True)
class ChatRequest:
    prompt: str
    temperature: float = 0.8
    max_tokens: int = 512
    seed: int | None = None

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")


# --- stable hashing / stub vectors ---------------------------------------------

def stable_hash64(text: str) -> int:
    """Platform-independent 64-bit hash of the UTF-8 bytes of ``text``."""
    return int.from_bytes(hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest(), "little")


def stub_embedding_of(text: str, dimension: int) -> np.ndarray:
    if dimension <= 0:
        raise ValueError("dimension must be positive")
    rng = np.random.Generator(np.random.PCG64(stable_hash64(text)))
    v = rng.standard_normal(dimension)
    return v / np.linalg.norm(v)


def l2_normalize(mat: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise GatewayError("cannot normalize a zero embedding")
    return mat / norms


# --- HTTP plumbing -------------------------------------------------------------

class _HttpTransport:
    def __init__(self, cfg: BackendConfig, client: httpx.Client | None = None):
        self.cfg = cfg
        self._client = client or httpx.Client(timeout=cfg.timeout)
        self._slots = threading.BoundedSemaphore(cfg.max_in_flight)
        base = (cfg.endpoint or "").rstrip("/")
        self.base = base[:-3] if base.endswith("/v1") else base
        self.sleep = time.sleep

    def post(self, path: str, payload: dict) -> dict:
        url = f"{self.base}{path}"
        headers = {"Content-Type": "application/json"}
        if self.cfg.api_key:
            headers["Authorization"] = f"Bearer {self.cfg.api_key}"
        delay = self.cfg.backoff_initial
        last: str = ""
        for attempt in range(self.cfg.max_retries + 1):
            if attempt:
                self.sleep(delay)
                delay *= self.cfg.backoff_factor
            with self._slots:
                try:
                    resp = self._client.post(url, json=payload, headers=headers)
                except httpx.TransportError as exc:
                    last = f"{type(exc).__name__}: {exc}"
                    logger.warning("POST %s failed (attempt %d): %s", url, attempt + 1, last)
                    continue
            if resp.status_code >= 500:
                last = f"HTTP {resp.status_code}"
                logger.warning("POST %s returned %d (attempt %d)", url, resp.status_code, attempt + 1)
                continue
            if resp.status_code >= 400:
                raise GatewayError(f"POST {url} returned HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()
            except ValueError as exc:
                raise GatewayError(f"POST {url} returned non-JSON body") from exc
        raise BackendUnavailable(f"POST {url} failed after {self.cfg.max_retries + 1} attempts ({last})")


# --- embedding backends ---------------------------------------------------------

class Embedder:
    """Batching, validation, normalization and caching around a raw embed call."""

    def __init__(self, cfg: BackendConfig, cache: bool = True):
        cfg.validate()
        self.cfg = cfg
        self.dimension = cfg.dimension
        self._cache: dict[str, np.ndarray] | None = {} if cache else None

    def _embed_raw(self, texts: list[str]) -> np.ndarray:
        raise NotImplementedError

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        """Embed ``texts`` in order; returns an ``(len(texts), dimension)`` array."""
        texts = list(texts)
        for i, t in enumerate(texts):
            if not isinstance(t, str) or not t.strip():
                raise ValueError(f"text {i} is empty")
        out = np.empty((len(texts), self.dimension), dtype=np.float64)
        todo = []
        for i, t in enumerate(texts):
            hit = self._cache.get(t) if self._cache is not None else None
            if hit is None:
                todo.append(i)
            else:
                out[i] = hit
        bs = self.cfg.batch_size
        for lo in range(0, len(todo), bs):
            idx = todo[lo:lo + bs]
            vecs = self._check(self._embed_raw([texts[i] for i in idx]), len(idx))
            if self.cfg.normalize:
                vecs = l2_normalize(vecs)
            for i, v in zip(idx, vecs):
                out[i] = v
                if self._cache is not None:
                    self._cache[texts[i]] = v
        return out

    def embed(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]

    def _check(self, vecs, expected_rows: int) -> np.ndarray:
        arr = np.asarray(vecs, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != expected_rows:
            raise GatewayError(f"expected {expected_rows} embeddings, got shape {arr.shape}")
        if arr.shape[1] != self.dimension:
            raise DimensionMismatch(f"backend returned dimension {arr.shape[1]}, configured {self.dimension}")
        if not np.all(np.isfinite(arr)):
            raise GatewayError("non-finite value in embedding response")
        return arr


class StubEmbedder(Embedder):
    def _embed_raw(self, texts):
        return np.stack([stub_embedding_of(t, self.dimension) for t in texts])


class HttpEmbedder(Embedder):
    def __init__(self, cfg: BackendConfig, client: httpx.Client | None = None, cache: bool = True):
        super().__init__(cfg, cache=cache)
        self.transport = _HttpTransport(cfg, client)

    def _embed_raw(self, texts):
        body = self.transport.post("/v1/embeddings", {"model": self.cfg.model_name, "input": texts})
        try:
            data = sorted(body["data"], key=lambda item: item.get("index", 0))
            rows = [item["embedding"] for item in data]
        except (KeyError, TypeError) as exc:
            raise GatewayError("malformed embeddings response") from exc
        dims = {len(r) for r in rows}
        if len(dims) > 1:
            raise DimensionMismatch(f"inconsistent dimensions in one response: {sorted(dims)}")
        return rows


# --- chat backends --------------------------------------------------------------

class ChatBackend:
    def chat(self, request: ChatRequest) -> str:
        raise NotImplementedError


class ScriptedChat(ChatBackend):
    """Returns queued completions in order; records every prompt it sees."""

    def __init__(self, responses: Iterable[str] = ()):
        self._queue = deque(responses)
        self._lock = threading.Lock()
        self.requests: list[ChatRequest] = []

    def push(self, *responses: str) -> None:
        self._queue.extend(responses)

    def chat(self, request: ChatRequest) -> str:
        with self._lock:
            self.requests.append(request)
            if not self._queue:
                raise ScriptExhausted("scripted chat backend has no completions left")
            item = self._queue.popleft()
        if isinstance(item, BaseException):
            raise item
        return item.rstrip()


class HttpChat(ChatBackend):
    def __init__(self, cfg: BackendConfig, client: httpx.Client | None = None):
        cfg.validate()
        self.cfg = cfg
        self.transport = _HttpTransport(cfg, client)

    def chat(self, request: ChatRequest) -> str:
        payload = {
            "model": self.cfg.model_name,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        if request.seed is not None:
            payload["seed"] = request.seed
        body = self.transport.post("/v1/chat/completions", payload)
        try:
            text = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise GatewayError("malformed chat completion response") from exc
        text = (text or "").rstrip()
        if not text:
            raise EmptyCompletion("model returned an empty completion")
        return text


_SLOT_RE = re.compile(r"^(Passage|Topics|Keywords):[ \t]*(.*)$", re.MULTILINE)


class SyntheticChat(ChatBackend):
    """Deterministic offline responder for the three pipeline prompts.

    The reply is a pure function of ``(prompt, seed)``.  Topic-naming prompts
    get a ``topic:`` line built from the task keywords, keyword-selection
    prompts get a subset of the candidate pool, and query-generation prompts
    get a bulleted list of template questions built from the task slots.
    """

    _TEMPLATES = (
        "what is {a}",
        "how does {a} affect {b}",
        "{a} and {b} relationship",
        "why is {a} important for {b}",
        "what causes {a}",
        "evidence on {a} in {b}",
        "how to measure {a}",
        "{a} versus {b} differences",
        "role of {a} in {b}",
        "what are the effects of {a}",
    )

    def chat(self, request: ChatRequest) -> str:
        prompt = request.prompt
        rng = np.random.Generator(np.random.PCG64(
            [stable_hash64(prompt), (request.seed or 0) & 0xFFFFFFFFFFFFFFFF]))
        tail = prompt[prompt.rfind("Your Task"):] if "Your Task" in prompt else prompt
        if prompt.rstrip().endswith("Topic:"):
            return self._topic_name(tail)
        if "Candidate keyword set:" in prompt:
            return self._select(prompt, rng)
        if prompt.rstrip().endswith("Queries:"):
            return self._queries(tail, rng)
        return "stub completion"

    @staticmethod
    def _topic_name(tail: str) -> str:
        after = tail.split("Keywords:", 1)[-1]
        line = next((ln for ln in after.splitlines() if ln.strip()), "")
        terms = [t.strip() for t in line.split(",") if t.strip()][:3]
        return "topic: " + (" ".join(t.title() for t in terms) or "General")

    @staticmethod
    def _select(prompt: str, rng) -> str:
        m = re.search(r"up to (\d+) keywords", prompt)
        limit = int(m.group(1)) if m else 10
        block = prompt.split("Candidate keyword set:", 1)[1].split("Final Keywords:", 1)[0]
        pool = [t.strip() for t in block.replace("\n", ",").split(",") if t.strip()]
        if not pool:
            return "none"
        idx = rng.permutation(len(pool))[:limit]
        return ", ".join(pool[i] for i in sorted(idx))

    def _queries(self, tail: str, rng) -> str:
        m = re.search(r"generate (\d+) relevant quer", tail)
        count = int(m.group(1)) if m else 3
        slots = {k: v.strip() for k, v in _SLOT_RE.findall(tail)}
        terms = [t.strip() for t in slots.get("Keywords", "").split(",") if t.strip()]
        topics = [t.strip() for t in slots.get("Topics", "").split(",") if t.strip()]
        passage_terms = list(dict.fromkeys(content_terms(slots.get("Passage", ""))))
        vocab = terms + [t.lower() for t in topics] + passage_terms
        if not vocab:
            vocab = ["this passage"]
        lines = []
        for _ in range(count):
            tpl = self._TEMPLATES[int(rng.integers(len(self._TEMPLATES)))]
            a = vocab[int(rng.integers(len(vocab)))]
            b = vocab[int(rng.integers(len(vocab)))]
            lines.append("- " + tpl.format(a=a, b=b).capitalize() + "?")
        return "\n".join(lines)


def make_embedder(cfg: BackendConfig) -> Embedder:
    cfg.validate()
    if cfg.kind == "stub":
        return StubEmbedder(cfg)
    return HttpEmbedder(cfg)


def make_chat(cfg: BackendConfig) -> ChatBackend:
    cfg.validate()
    if cfg.kind == "stub":
        return SyntheticChat()
    return HttpChat(cfg)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


__all__ = [
    "BackendConfig", "ChatRequest", "Embedder", "StubEmbedder", "HttpEmbedder",
    "ChatBackend", "ScriptedChat", "SyntheticChat", "HttpChat", "GatewayError",
    "BackendUnavailable", "DimensionMismatch", "EmptyCompletion", "ScriptExhausted",
    "stub_embedding_of", "stable_hash64", "make_embedder", "make_chat", "cosine",
    "l2_normalize",
]
