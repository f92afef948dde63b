"""Exact dense retrieval: text index, query index, dual-index fusion and append baseline."""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .corpus import Document, ExpandedDocument
from .gateway import Embedder
from .sparse import ScoredHit, expand_text

MAGIC = b"DXVEC\x00\x01\n"
FORMAT_VERSION = 1
SIMILARITIES = ("inner_product", "cosine")


class DenseError(ValueError):
    pass


@dataclass(frozen=True)
class FusionParams:
    alpha: float = 0.5
    n_t: int = 300
    n_q: int = 1000
    similarity: str = "inner_product"

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.n_t < 1 or self.n_q < 1:
            raise ValueError("n_t and n_q must be positive")
        if self.similarity not in SIMILARITIES:
            raise ValueError(f"similarity must be one of {SIMILARITIES}")


@dataclass(frozen=True)
class FusedHit:
    doc_id: str
    s_t: float
    s_q: float
    s: float


class VectorIndex:
    """Row-major float32 vectors with an owning doc id per row.

    For a text index ``owners[i]`` is row ``i``'s own document; for a query
    index it is the source document of query ``i`` (the global query index).
    """

    def __init__(self, vectors: np.ndarray, owners: Sequence[str], kind: str = "text"):
        vecs = np.ascontiguousarray(np.asarray(vectors, dtype=np.float32))
        if vecs.ndim != 2:
            raise DenseError("vectors must be a 2-D array")
        if vecs.shape[0] != len(owners):
            raise DenseError("one owner per vector required")
        self.vectors = vecs
        self.owners = list(owners)
        self.kind = kind

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def similarities(self, v_q: np.ndarray, similarity: str = "inner_product") -> np.ndarray:
        q = np.asarray(v_q, dtype=np.float64).ravel()
        if q.shape[0] != self.dimension:
            raise DenseError(f"query dimension {q.shape[0]} != index dimension {self.dimension}")
        sims = self.vectors.astype(np.float64) @ q
        if similarity == "cosine":
            norms = np.linalg.norm(self.vectors.astype(np.float64), axis=1) * np.linalg.norm(q)
            sims = sims / np.where(norms > 0, norms, 1.0)
        return sims

    # --- snapshot ---------------------------------------------------------------

    def save(self, path: str | os.PathLike, similarity: str = "inner_product") -> None:
        table = sorted(set(self.owners))
        pos = {d: i for i, d in enumerate(table)}
        header = json.dumps({
            "format_version": FORMAT_VERSION,
            "kind": self.kind,
            "dimension": self.dimension,
            "count": len(self),
            "similarity": similarity,
            "doc_ids": table,
            "owner": [pos[d] for d in self.owners],
        }).encode("utf-8")
        path = os.fspath(path)
        tmp = path + ".tmp"
        with open(tmp, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", len(header)))
            fh.write(header)
            fh.write(self.vectors.astype("<f4").tobytes())
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "VectorIndex":
        with open(path, "rb") as fh:
            if fh.read(len(MAGIC)) != MAGIC:
                raise DenseError(f"{path}: not a vector index snapshot")
            (hlen,) = struct.unpack("<I", fh.read(4))
            header = json.loads(fh.read(hlen).decode("utf-8"))
            if header.get("format_version") != FORMAT_VERSION:
                raise DenseError(f"{path}: unsupported format version {header.get('format_version')}")
            n, m = header["count"], header["dimension"]
            data = np.frombuffer(fh.read(4 * n * m), dtype="<f4")
        if data.size != n * m:
            raise DenseError(f"{path}: truncated vector block")
        table = header["doc_ids"]
        return cls(data.reshape(n, m).astype(np.float32), [table[i] for i in header["owner"]],
                   header["kind"])


TextIndex = VectorIndex
QueryIndex = VectorIndex


def build_text_index(docs: Sequence[Document], embedder: Embedder,
                     include_title: bool = True) -> VectorIndex:
    if not docs:
        raise DenseError("cannot build a text index over an empty corpus")
    vecs = embedder.embed_batch([d.body(include_title) for d in docs])
    return VectorIndex(vecs, [d.doc_id for d in docs], kind="text")


def build_query_index(expansions: Sequence[ExpandedDocument], embedder: Embedder) -> VectorIndex:
    """Row ``j`` is query ``j`` in (document order, query order)."""
    texts, owners = [], []
    for e in expansions:
        if not e.queries:
            raise DenseError(f"expansion for {e.doc_id!r} has no queries")
        texts.extend(e.queries)
        owners.extend([e.doc_id] * len(e.queries))
    if not texts:
        raise DenseError("no queries to index")
    return VectorIndex(embedder.embed_batch(texts), owners, kind="query")


def build_append_index(docs: Sequence[Document], expansions: Sequence[ExpandedDocument],
                       embedder: Embedder, include_title: bool = True) -> VectorIndex:
    """Text index over ``expand_text`` output; documents without an expansion embed their body."""
    if not docs:
        raise DenseError("cannot build an index over an empty corpus")
    by_id = {e.doc_id: e for e in expansions}
    texts = [expand_text(d, by_id.get(d.doc_id), include_title) for d in docs]
    return VectorIndex(embedder.embed_batch(texts), [d.doc_id for d in docs], kind="append")


def top_k(scores: np.ndarray, k: int, tiebreak: np.ndarray, subset: np.ndarray | None = None) -> np.ndarray:
    """Indices of the ``k`` highest scores, ties by ascending ``tiebreak``."""
    idx = np.arange(scores.shape[0]) if subset is None else subset
    if idx.size == 0:
        return idx
    if k < idx.size:
        vals = scores[idx]
        kth = vals[np.argpartition(-vals, k - 1)[k - 1]]
        idx = idx[vals >= kth]
    order = np.lexsort((tiebreak[idx], -scores[idx]))
    return idx[order][:k]


class DualIndex:
    """Text and query indices aligned on the text index's document order."""

    def __init__(self, text: VectorIndex, queries: VectorIndex | None = None):
        self.text = text
        self.queries = queries
        self.doc_ids = text.owners
        pos = {d: i for i, d in enumerate(self.doc_ids)}
        if len(pos) != len(self.doc_ids):
            raise DenseError("duplicate doc_id in text index")
        self._rank = np.empty(len(self.doc_ids), dtype=np.int64)
        self._rank[np.argsort(np.array(self.doc_ids, dtype=object), kind="stable")] = np.arange(len(self.doc_ids))
        if queries is not None:
            if queries.dimension != text.dimension:
                raise DenseError("text and query indices differ in dimension")
            missing = sorted({d for d in queries.owners if d not in pos})
            if missing:
                raise DenseError(f"query index references unknown documents: {missing[:5]}")
            self.query_owner = np.array([pos[d] for d in queries.owners], dtype=np.int64)
            self._qrank = np.arange(len(queries), dtype=np.int64)

    def search_text(self, v_q: np.ndarray, k: int, similarity: str = "inner_product") -> list[ScoredHit]:
        if k < 1:
            raise ValueError("k must be >= 1")
        sims = self.text.similarities(v_q, similarity)
        return [ScoredHit(self.doc_ids[i], float(sims[i])) for i in top_k(sims, k, self._rank)]

    def fused_scores(self, v_q: np.ndarray, params: FusionParams):
        """Per-document ``(s_t, s_q, s, candidate_mask)`` arrays over the text index order."""
        if self.queries is None:
            raise DenseError("fusion requires a query index")
        n = len(self.doc_ids)
        text_sims = self.text.similarities(v_q, params.similarity)
        in_t = np.zeros(n, dtype=np.bool_)
        in_t[top_k(text_sims, params.n_t, self._rank)] = True

        q_sims = self.queries.similarities(v_q, params.similarity)
        h_q = top_k(q_sims, params.n_q, self._qrank)
        pooled = np.full(n, -np.inf)
        hit = np.zeros(n, dtype=np.bool_)
        kernels.maxpool_scatter(np.ascontiguousarray(self.query_owner[h_q]),
                                np.ascontiguousarray(q_sims[h_q]), pooled, hit)

        s_t = np.where(in_t, text_sims, 0.0)
        s_q = np.where(hit, pooled, 0.0)
        s = (1.0 - params.alpha) * s_t + params.alpha * s_q
        return s_t, s_q, s, in_t | hit

    def search_fused(self, v_q: np.ndarray, params: FusionParams, k: int) -> list[FusedHit]:
        if k < 1:
            raise ValueError("k must be >= 1")
        s_t, s_q, s, cand = self.fused_scores(v_q, params)
        order = top_k(s, k, self._rank, subset=np.flatnonzero(cand))
        return [FusedHit(self.doc_ids[i], float(s_t[i]), float(s_q[i]), float(s[i])) for i in order]


def search_fused(v_q: np.ndarray, text: VectorIndex, queries: VectorIndex, params: FusionParams,
                 k: int) -> list[FusedHit]:
    return DualIndex(text, queries).search_fused(v_q, params, k)


def search_append(v_q: np.ndarray, append_index: VectorIndex, k: int,
                  similarity: str = "inner_product") -> list[ScoredHit]:
    return DualIndex(append_index).search_text(v_q, k, similarity)
