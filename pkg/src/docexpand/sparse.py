"""BM25 over an in-memory inverted index stored as CSR posting arrays."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .corpus import Document, ExpandedDocument
from .text import stem, stopwords, words

FORMAT_VERSION = 1


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 0.9
    b: float = 0.4

    def __post_init__(self):
        if self.k1 < 0:
            raise ValueError("k1 must be >= 0")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must lie in [0, 1]")


@dataclass(frozen=True)
class ScoredHit:
    doc_id: str
    score: float


def tokenize(text: str, stem_terms: bool = True) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop stop-words, optionally Porter-stem."""
    stop = stopwords()
    toks = [w for w in words(text) if w not in stop]
    if stem_terms:
        toks = [stem(w) for w in toks]
    return toks


def expand_text(doc: Document | str, expansion: ExpandedDocument | None,
                include_title: bool = True) -> str:
    """Document body followed by one line per generated query."""
    if isinstance(doc, Document):
        if expansion is not None and expansion.doc_id != doc.doc_id:
            raise ValueError(f"expansion for {expansion.doc_id!r} applied to {doc.doc_id!r}")
        body = doc.body(include_title)
    else:
        body = doc
    if expansion is None or not expansion.queries:
        return body
    return body + "\n" + "\n".join(expansion.queries)


def idf(df: np.ndarray | float, n_docs: int):
    """Non-negative BM25 idf: ``ln(1 + (N - df + 0.5) / (df + 0.5))``."""
    return np.log1p((n_docs - np.asarray(df, dtype=np.float64) + 0.5) / (np.asarray(df, dtype=np.float64) + 0.5))


class InvertedIndex:
    """Postings for term ``t`` live in ``postings_doc/tf[offsets[t]:offsets[t+1]]``."""

    def __init__(self, doc_ids: Sequence[str], vocab: Sequence[str], offsets: np.ndarray,
                 postings_doc: np.ndarray, postings_tf: np.ndarray, doc_lengths: np.ndarray,
                 params: Bm25Params = Bm25Params(), stem_terms: bool = True):
        self.doc_ids = list(doc_ids)
        self.vocab = list(vocab)
        self.term_index = {t: i for i, t in enumerate(self.vocab)}
        self.offsets = np.ascontiguousarray(offsets, dtype=np.int64)
        self.postings_doc = np.ascontiguousarray(postings_doc, dtype=np.int64)
        self.postings_tf = np.ascontiguousarray(postings_tf, dtype=np.int32)
        self.doc_lengths = np.ascontiguousarray(doc_lengths, dtype=np.float64)
        self.params = params
        self.stem_terms = stem_terms
        self.n_docs = len(self.doc_ids)
        self.avg_doc_length = float(self.doc_lengths.mean()) if self.n_docs else 0.0
        self.doc_freq = np.diff(self.offsets)
        # rank of each doc_id in lexicographic order, for tie-breaking
        self._id_rank = np.empty(self.n_docs, dtype=np.int64)
        self._id_rank[np.argsort(np.array(self.doc_ids, dtype=object), kind="stable")] = np.arange(self.n_docs)

    def postings(self, term: str) -> list[tuple[int, int]]:
        t = self.term_index.get(term)
        if t is None:
            return []
        lo, hi = self.offsets[t], self.offsets[t + 1]
        return list(zip(self.postings_doc[lo:hi].tolist(), self.postings_tf[lo:hi].tolist()))

    def score_all(self, query: str | Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
        """Dense score vector over all documents plus a mask of matched documents."""
        terms = sorted({self.term_index[t] for t in _terms(query, self.stem_terms) if t in self.term_index})
        scores = np.zeros(self.n_docs, dtype=np.float64)
        matched = np.zeros(self.n_docs, dtype=np.bool_)
        if not terms or self.avg_doc_length == 0:
            return scores, matched
        term_ids = np.array(terms, dtype=np.int64)
        idfs = idf(self.doc_freq[term_ids], self.n_docs)
        kernels.bm25_accumulate(self.offsets, self.postings_doc, self.postings_tf, term_ids, idfs,
                                self.doc_lengths, self.avg_doc_length, float(self.params.k1),
                                float(self.params.b), scores)
        for t in terms:
            matched[self.postings_doc[self.offsets[t]:self.offsets[t + 1]]] = True
        return scores, matched

    def search(self, query: str | Sequence[str], k: int = 1000) -> list[ScoredHit]:
        if k < 1:
            raise ValueError("k must be >= 1")
        scores, matched = self.score_all(query)
        cand = np.flatnonzero(matched)
        if cand.size == 0:
            return []
        order = cand[np.lexsort((self._id_rank[cand], -scores[cand]))][:k]
        return [ScoredHit(self.doc_ids[i], float(scores[i])) for i in order]

    # --- snapshot ---------------------------------------------------------------

    def save(self, path: str | os.PathLike) -> None:
        meta = {
            "format": "docexpand-bm25",
            "format_version": FORMAT_VERSION,
            "k1": self.params.k1,
            "b": self.params.b,
            "stem": self.stem_terms,
            "doc_ids": self.doc_ids,
            "vocab": self.vocab,
        }
        path = os.fspath(path)
        tmp = path + ".tmp.npz"
        np.savez(tmp, meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8),
                 offsets=self.offsets, postings_doc=self.postings_doc,
                 postings_tf=self.postings_tf, doc_lengths=self.doc_lengths)
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "InvertedIndex":
        with np.load(path, allow_pickle=False) as z:
            meta = json.loads(z["meta"].tobytes().decode("utf-8"))
            if meta.get("format") != "docexpand-bm25" or meta.get("format_version") != FORMAT_VERSION:
                raise ValueError(f"{path}: unsupported index snapshot {meta.get('format')!r} "
                                 f"v{meta.get('format_version')}")
            return cls(meta["doc_ids"], meta["vocab"], z["offsets"], z["postings_doc"],
                       z["postings_tf"], z["doc_lengths"], Bm25Params(meta["k1"], meta["b"]),
                       meta["stem"])


def _terms(text: str | Sequence[str], stem_terms: bool) -> list[str]:
    # a non-string is taken as already analysed
    return tokenize(text, stem_terms) if isinstance(text, str) else list(text)


def build_index(texts: Iterable[tuple[str, str | Sequence[str]]], params: Bm25Params = Bm25Params(),
                stem_terms: bool = True) -> InvertedIndex:
    """Index ``(doc_id, text)`` pairs; ordinals follow input order.

    ``text`` may also be a token list, which is indexed verbatim.
    """
    doc_ids: list[str] = []
    per_term: dict[str, list[tuple[int, int]]] = {}
    lengths: list[int] = []
    for ordinal, (doc_id, text) in enumerate(texts):
        doc_ids.append(doc_id)
        counts: dict[str, int] = {}
        for tok in _terms(text, stem_terms):
            counts[tok] = counts.get(tok, 0) + 1
        lengths.append(sum(counts.values()))
        for tok, c in counts.items():
            per_term.setdefault(tok, []).append((ordinal, c))
    if not doc_ids:
        raise ValueError("cannot build an index over an empty collection")
    if len(set(doc_ids)) != len(doc_ids):
        raise ValueError("duplicate doc_id in index input")
    vocab = sorted(per_term)
    offsets = np.zeros(len(vocab) + 1, dtype=np.int64)
    for i, t in enumerate(vocab):
        offsets[i + 1] = offsets[i] + len(per_term[t])
    pd = np.empty(offsets[-1], dtype=np.int64)
    ptf = np.empty(offsets[-1], dtype=np.int32)
    for i, t in enumerate(vocab):
        plist = per_term[t]
        pd[offsets[i]:offsets[i + 1]] = [d for d, _ in plist]
        ptf[offsets[i]:offsets[i + 1]] = [c for _, c in plist]
    return InvertedIndex(doc_ids, vocab, offsets, pd, ptf, np.array(lengths, dtype=np.float64),
                         params, stem_terms)


def bm25_search(index: InvertedIndex, query: str, k: int = 1000) -> list[ScoredHit]:
    return index.search(query, k)
