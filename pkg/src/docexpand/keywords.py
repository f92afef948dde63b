"""Document-level keyphrases via embedding relevance + MMR, and LLM keyword selection."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .gateway import ChatBackend, ChatRequest, Embedder, GatewayError
from .text import is_numeric, stopwords, words
from .topics import TopicModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KeywordCandidate:
    phrase: str
    score: float


@dataclass
class KeywordSets:
    doc_id: str
    topic_level: list[str] = field(default_factory=list)
    doc_level: list[KeywordCandidate] = field(default_factory=list)
    selected: list[str] = field(default_factory=list)

    @property
    def pool(self) -> list[str]:
        return build_pool(self.doc_level, self.topic_level)

    def to_json(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "topic_level": list(self.topic_level),
            "doc_level": [{"phrase": c.phrase, "score": c.score} for c in self.doc_level],
            "selected": list(self.selected),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "KeywordSets":
        return cls(
            doc_id=obj["doc_id"],
            topic_level=list(obj.get("topic_level", [])),
            doc_level=[KeywordCandidate(c["phrase"], float(c["score"])) for c in obj.get("doc_level", [])],
            selected=list(obj.get("selected", [])),
        )


def candidate_phrases(body: str, max_n: int = 3) -> list[str]:
    """Distinct 1..max_n word windows, sorted; no stop-word at either edge, no numeric tokens."""
    stop = stopwords()
    toks = words(body)
    found: set[str] = set()
    for i in range(len(toks)):
        for n in range(1, max_n + 1):
            window = toks[i:i + n]
            if len(window) < n:
                break
            if is_numeric(window[-1]):
                break
            if window[0] in stop or window[-1] in stop:
                continue
            found.add(" ".join(window))
    return sorted(found)


def _cosine_rows(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(b)
    denom = np.where(na * nb > 0, na * nb, 1.0)
    return (A @ b) / denom


def _cosine_matrix(A: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(A, axis=1)
    U = A / np.where(norms > 0, norms, 1.0)[:, None]
    return U @ U.T


def mmr(relevance: np.ndarray, similarity: np.ndarray, top_n: int, lam: float) -> list[int]:
    """Greedy maximal marginal relevance; candidate order is the tie-break order."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    rel = np.ascontiguousarray(relevance, dtype=np.float64)
    sim = np.ascontiguousarray(similarity, dtype=np.float64)
    if rel.shape[0] == 0 or top_n <= 0:
        return []
    return [int(i) for i in kernels.mmr_select(rel, sim, int(top_n), float(lam))]


def extract_doc_keywords(body: str, doc_embedding: np.ndarray, embedder: Embedder,
                         top_n: int = 20, lam: float = 0.7) -> list[KeywordCandidate]:
    if not body.strip():
        raise ValueError("document body is empty")
    phrases = candidate_phrases(body)
    if not phrases:
        logger.warning("no keyword candidates after filtering")
        return []
    emb = embedder.embed_batch(phrases)
    rel = np.clip(_cosine_rows(emb, np.asarray(doc_embedding, dtype=np.float64)), -1.0, 1.0)
    order = mmr(rel, _cosine_matrix(emb), top_n, lam)
    return [KeywordCandidate(phrases[i], float(rel[i])) for i in order]


def topic_keywords_for_doc(doc_topics: Iterable[int], model: TopicModel) -> list[str]:
    """Concatenated top terms of each assigned topic (ascending id), first occurrence kept."""
    out: dict[str, None] = {}
    for j in sorted(doc_topics):
        for term, _ in model.keywords[j - 1]:
            out.setdefault(term, None)
    return list(out)


def build_pool(doc_level: Sequence[KeywordCandidate], topic_level: Sequence[str]) -> list[str]:
    """Doc-level phrases (MMR order) then topic-level terms, case-insensitively deduplicated."""
    seen: set[str] = set()
    pool = []
    for p in [c.phrase for c in doc_level] + list(topic_level):
        if p.lower() not in seen:
            seen.add(p.lower())
            pool.append(p)
    return pool


def padding_order(pool: Sequence[str], doc_level: Sequence[KeywordCandidate] = (),
                  topic_level: Sequence[str] = ()) -> list[str]:
    """Pool entries by doc-level score descending, then topic-level order, then the rest."""
    scored = sorted(doc_level, key=lambda c: (-c.score, c.phrase))
    ranked = [c.phrase for c in scored] + list(topic_level) + list(pool)
    in_pool = {p.lower(): p for p in pool}
    out: dict[str, str] = {}
    for p in ranked:
        key = p.lower()
        if key in in_pool and key not in out:
            out[key] = in_pool[key]
    return list(out.values())


KEYWORD_SELECTION_TEMPLATE = (
    "You will receive a document along with a set of candidate keywords. Your task is to "
    "select the keywords that best align with the core theme of the document. Exclude "
    "keywords that are too broad or less relevant. You may list up to {target} keywords, "
    "using only the keywords in the candidate keyword set:\n\n"
    "Document:\n{document}\n\n"
    "Candidate keyword set:\n{candidates}\n\n"
    "Final Keywords:"
)

_MARKER_RE = re.compile(r"^\s*(?:[-*•]+|\d+[.)]|\(\d+\))\s*")


def keyword_selection_prompt(body: str, pool: Sequence[str], target: int = 10) -> str:
    return KEYWORD_SELECTION_TEMPLATE.format(target=target, document=body, candidates=", ".join(pool))


def parse_keyword_list(completion: str) -> list[str]:
    items = []
    for line in completion.splitlines():
        line = _MARKER_RE.sub("", line)
        if ":" in line and line.split(":", 1)[0].strip().lower() in ("final keywords", "keywords"):
            line = line.split(":", 1)[1]
        for part in re.split(r"[,;]", line):
            part = _MARKER_RE.sub("", part).strip().strip("\"'`").rstrip(".;").strip()
            if part:
                items.append(part)
    return items


def select_keywords_llm(body: str, pool: Sequence[str], chat: ChatBackend, target: int = 10, *,
                        doc_level: Sequence[KeywordCandidate] = (),
                        topic_level: Sequence[str] = (),
                        temperature: float = 0.0, seed: int = 0) -> list[str]:
    """LLM-chosen subset of ``pool``, padded to ``target`` by the deterministic pool order."""
    if not pool:
        raise ValueError("keyword pool is empty")
    order = padding_order(pool, doc_level, topic_level)
    by_key = {p.lower(): p for p in pool}
    try:
        completion = chat.chat(ChatRequest(keyword_selection_prompt(body, pool, target),
                                           temperature=temperature, max_tokens=256, seed=seed))
    except GatewayError as exc:
        logger.warning("keyword selection failed (%s); falling back to pool order", exc)
        return order[:target]
    chosen: dict[str, str] = {}
    for item in parse_keyword_list(completion):
        key = item.lower()
        if key in by_key and key not in chosen:
            chosen[key] = by_key[key]
        if len(chosen) == target:
            break
    for p in order:
        if len(chosen) >= target:
            break
        chosen.setdefault(p.lower(), p)
    return list(chosen.values())


__all__ = [
    "KeywordCandidate", "KeywordSets", "candidate_phrases", "mmr", "extract_doc_keywords",
    "topic_keywords_for_doc", "build_pool", "padding_order", "keyword_selection_prompt",
    "parse_keyword_list", "select_keywords_llm",
]
