"""Sentence-level topic model: clustering, assignment, c-TF-IDF and naming."""

from __future__ import annotations

import json
import logging
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.metrics import silhouette_score

from . import kernels
from .corpus import atomic_write_text
from .gateway import ChatBackend, ChatRequest, GatewayError
from .text import content_terms

logger = logging.getLogger(__name__)

OUTLIER = -1
"""Topic id for sentences farther than their nearest cluster's threshold."""

SentenceRef = tuple[str, int]


class TopicError(ValueError):
    pass


@dataclass
class TopicConfig:
    min_cluster_size: int = 5
    max_clusters: int = 20
    seed: int = 0
    n_init: int = 3
    max_iter: int = 100
    outlier_sigmas: float = 2.0
    silhouette_sample: int = 4000
    keywords_per_topic: int = 10
    representatives: int = 3
    name_retries: int = 2


@dataclass
class TopicModel:
    """Fitted topics.  Topic ids are 1-based; row ``j-1`` of ``centroids`` is topic ``j``."""

    centroids: np.ndarray
    outlier_thresholds: np.ndarray
    keywords: list[list[tuple[str, float]]] = field(default_factory=list)
    representative_sentences: list[list[str]] = field(default_factory=list)
    names: list[str] = field(default_factory=list)

    @property
    def n_topics(self) -> int:
        return self.centroids.shape[0]

    @property
    def dimension(self) -> int:
        return self.centroids.shape[1]

    def topic_ids(self) -> range:
        return range(1, self.n_topics + 1)

    def name(self, topic: int) -> str:
        if self.names and self.names[topic - 1]:
            return self.names[topic - 1]
        kws = self.keywords[topic - 1] if self.keywords else []
        return "_".join(t for t, _ in kws[:3]) or f"topic_{topic}"

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "centroids": self.centroids.tolist(),
            "outlier_thresholds": self.outlier_thresholds.tolist(),
            "keywords": [[[t, w] for t, w in kws] for kws in self.keywords],
            "names": list(self.names),
            "representative_sentences": [list(r) for r in self.representative_sentences],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TopicModel":
        centroids = np.asarray(obj["centroids"], dtype=np.float64)
        if centroids.ndim != 2 or centroids.shape[1] != obj["dimension"]:
            raise TopicError("centroid array does not match declared dimension")
        return cls(
            centroids=centroids,
            outlier_thresholds=np.asarray(obj["outlier_thresholds"], dtype=np.float64),
            keywords=[[(t, float(w)) for t, w in kws] for kws in obj.get("keywords", [])],
            representative_sentences=[list(r) for r in obj.get("representative_sentences", [])],
            names=list(obj.get("names", [])),
        )

    def save(self, path: str | os.PathLike) -> None:
        atomic_write_text(path, json.dumps(self.to_json(), ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, path: str | os.PathLike) -> "TopicModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


# --- clustering ----------------------------------------------------------------

def _kmeans_pp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = [X[int(rng.integers(n))]]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers.append(X[idx])
        d2 = np.minimum(d2, np.sum((X - X[idx]) ** 2, axis=1))
    return np.array(centers)


def _lloyd(X: np.ndarray, k: int, rng: np.random.Generator, max_iter: int):
    C = _kmeans_pp(X, k, rng)
    labels = None
    for _ in range(max_iter):
        new_labels, dists = kernels.nearest_centroid(X, C)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            mask = labels == j
            if mask.any():
                C[j] = X[mask].mean(axis=0)
            else:
                # re-seed an empty cluster at the worst-fit point
                far = int(np.argmax(dists))
                C[j] = X[far]
                dists[far] = 0.0
    labels, dists = kernels.nearest_centroid(X, C)
    return labels, dists


def _best_kmeans(X, k, cfg: TopicConfig, rng):
    best = None
    for _ in range(cfg.n_init):
        labels, dists = _lloyd(X, k, rng, cfg.max_iter)
        inertia = float(np.sum(dists ** 2))
        if best is None or inertia < best[0]:
            best = (inertia, labels)
    return best[1]


def _relabel(labels: np.ndarray) -> np.ndarray:
    """Renumber clusters 0..k-1 by first appearance and drop empty ones."""
    mapping: dict[int, int] = {}
    for lab in labels.tolist():
        if lab not in mapping:
            mapping[lab] = len(mapping)
    return np.array([mapping[lab] for lab in labels.tolist()], dtype=np.int64)


def fit_topics(embeddings: np.ndarray, config: TopicConfig | None = None) -> TopicModel:
    """Cluster sentence embeddings with k-means, choosing k by mean silhouette.

    Inputs are clustered as given; the embedding gateway normalizes by
    default, which makes this spherical clustering.  Centroids are the plain
    mean of each cluster's members, and each cluster's outlier threshold is
    the mean member distance plus ``outlier_sigmas`` standard deviations.
    """
    cfg = config or TopicConfig()
    X = np.ascontiguousarray(np.asarray(embeddings, dtype=np.float64))
    if X.ndim != 2:
        raise TopicError("embeddings must be a 2-D array")
    n = X.shape[0]
    if n < 2 * cfg.min_cluster_size:
        raise TopicError(
            f"too few sentences: {n} < 2 * min_cluster_size ({cfg.min_cluster_size})")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))

    distinct = np.unique(X, axis=0)
    if distinct.shape[0] == 1:
        logger.warning("all %d embeddings are identical; using a single topic", n)
        labels = np.zeros(n, dtype=np.int64)
    else:
        k_max = min(cfg.max_clusters, n // cfg.min_cluster_size, distinct.shape[0])
        best_score, labels = -np.inf, None
        sample = min(n, cfg.silhouette_sample)
        for k in range(2, max(2, k_max) + 1):
            cand = _relabel(_best_kmeans(X, k, cfg, rng))
            if len(np.unique(cand)) < 2:
                continue
            score = silhouette_score(X, cand, sample_size=sample if sample < n else None,
                                     random_state=cfg.seed)
            logger.debug("k=%d silhouette=%.4f", k, score)
            if score > best_score:
                best_score, labels = score, cand
        if labels is None:
            labels = np.zeros(n, dtype=np.int64)

    k = int(labels.max()) + 1
    if distinct.shape[0] == 1:
        centroids = X[:1].copy()
    else:
        centroids = np.stack([X[labels == j].mean(axis=0) for j in range(k)])
    thresholds = np.empty(k)
    for j in range(k):
        d = np.linalg.norm(X[labels == j] - centroids[j], axis=1)
        # absolute slack keeps members at rounding-level distance inside
        thresholds[j] = d.mean() + cfg.outlier_sigmas * d.std() + 1e-9
    model = TopicModel(centroids=centroids, outlier_thresholds=thresholds)
    logger.info("fitted %d topics over %d sentences", k, n)
    return model


# --- assignment ------------------------------------------------------------------

def assign_topics(Z: np.ndarray, model: TopicModel) -> np.ndarray:
    """Vectorised :func:`assign_topic`: 1-based topic ids, ``OUTLIER`` where too far."""
    Z = np.ascontiguousarray(np.atleast_2d(np.asarray(Z, dtype=np.float64)))
    if Z.shape[1] != model.dimension:
        raise TopicError(f"embedding dimension {Z.shape[1]} != model dimension {model.dimension}")
    labels, dists = kernels.nearest_centroid(Z, np.ascontiguousarray(model.centroids))
    out = labels + 1
    out[dists > model.outlier_thresholds[labels]] = OUTLIER
    return out


def assign_topic(z: np.ndarray, model: TopicModel) -> int:
    return int(assign_topics(np.asarray(z)[None, :], model)[0])


def document_topics(sentence_embeddings: np.ndarray, model: TopicModel) -> set[int]:
    """Union of non-outlier topics over one document's sentence embeddings."""
    if len(sentence_embeddings) == 0:
        return set()
    return {int(t) for t in assign_topics(sentence_embeddings, model) if t != OUTLIER}


# --- c-TF-IDF -----------------------------------------------------------------

def ctfidf_weights(counts: np.ndarray) -> np.ndarray:
    """Class-based TF-IDF over a ``(topics, vocabulary)`` count matrix.

    ``weight[j, t] = tf[j, t] * log(1 + A / f[t])`` where ``f`` is the term's
    total count and ``A`` the mean pseudo-document length.
    """
    counts = np.asarray(counts, dtype=np.float64)
    f = counts.sum(axis=0)
    avg_len = counts.sum() / counts.shape[0]
    with np.errstate(divide="ignore"):
        idf = np.where(f > 0, np.log1p(avg_len / np.where(f > 0, f, 1.0)), 0.0)
    return counts * idf[None, :]


def top_terms(weights_row: np.ndarray, vocab: Sequence[str], m: int) -> list[tuple[str, float]]:
    """Top-``m`` terms by weight, ties broken lexicographically."""
    order = sorted((i for i in range(len(vocab)) if weights_row[i] > 0),
                   key=lambda i: (-weights_row[i], vocab[i]))
    return [(vocab[i], float(weights_row[i])) for i in order[:m]]


def compute_ctfidf(model: TopicModel, sentences_by_topic: Sequence[Sequence[str]],
                   m: int = 10) -> tuple[list[str], np.ndarray]:
    """Fill ``model.keywords`` and return ``(vocabulary, weights)``.

    ``sentences_by_topic[j-1]`` holds topic ``j``'s member sentences.
    """
    if len(sentences_by_topic) != model.n_topics:
        raise TopicError("need one sentence list per topic")
    bags = []
    for j, sents in enumerate(sentences_by_topic, start=1):
        if not sents:
            raise TopicError(f"topic {j} has no sentences")
        bags.append(Counter(t for s in sents for t in content_terms(s)))
    vocab = sorted(set().union(*bags))
    if not vocab:
        raise TopicError("empty vocabulary after stop-word filtering")
    col = {t: i for i, t in enumerate(vocab)}
    counts = np.zeros((len(bags), len(vocab)))
    for j, bag in enumerate(bags):
        for t, c in bag.items():
            counts[j, col[t]] = c
    weights = ctfidf_weights(counts)
    model.keywords = [top_terms(weights[j], vocab, m) for j in range(len(bags))]
    return vocab, weights


# --- representatives and names -----------------------------------------------

def representative_sentences(model: TopicModel, topic: int, member_refs: Sequence[SentenceRef],
                             member_embeddings: np.ndarray, member_texts: Sequence[str],
                             limit: int = 3) -> list[str]:
    """The ``limit`` members nearest the topic centroid, ties by (doc_id, index)."""
    if topic not in model.topic_ids():
        raise TopicError(f"unknown topic id {topic}")
    if len(member_refs) == 0:
        raise TopicError(f"topic {topic} has no members")
    d = np.linalg.norm(np.asarray(member_embeddings, dtype=np.float64) - model.centroids[topic - 1], axis=1)
    order = sorted(range(len(member_refs)), key=lambda i: (d[i], member_refs[i]))
    return [member_texts[i] for i in order[:limit]]


TOPIC_NAME_INTRO = "You will extract a short topic label from given documents and keywords.\n"

TOPIC_NAME_EXEMPLARS = [
    {
        "texts": [
            "But if you believe the price will go down, the only way to buy low and sell high "
            "is to sell first and buy later.",
            "With your comment, you have stated that your scenario is that you believe that the "
            "stock will go up long term, but you also believe that the stock is at a short-term "
            "peak and will drop in the near future.",
            "You believe that the stock is a long-term buy, but for some reason you are guessing "
            "that the stock will drop in the short-term.",
        ],
        "keywords": "stock, the stock price, stock price, stock is, the price, buy, sell, value, share",
        "topic": "Short-Term Stock Trading",
    },
]

TOPIC_NAME_INSTRUCTION = (
    "**Crucial Output Instruction:**\n"
    "You MUST generate a single line as your response.\n"
    "This line MUST start EXACTLY with `topic: ` (including the space after the colon).\n"
    "Following `topic: `, provide ONLY the concise topic label.\n"
    "Do NOT add any other text, explanations, numbering, markdown, or any content before "
    "or after this single line.\n"
)

_NUMBER_WORDS = ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"]


def topic_name_prompt(sentences: Sequence[str], keywords: Sequence[str],
                      exemplars: Sequence[dict] = TOPIC_NAME_EXEMPLARS) -> str:
    n = len(exemplars)
    count = _NUMBER_WORDS[n] if n < len(_NUMBER_WORDS) else str(n)
    parts = [TOPIC_NAME_INTRO,
             f"Here {'is' if n == 1 else 'are'} {count} example{'' if n == 1 else 's'} "
             f"of topics you created before:\n\n"]
    for i, ex in enumerate(exemplars, start=1):
        parts.append(f"Example {i}\n")
        parts.append("Sample texts from this topic:\n")
        parts.extend(f"- {t}\n" for t in ex["texts"])
        parts.append(f"\nKeywords: {ex['keywords']}\n\n")
        parts.append(f"Topic: {ex['topic']}\n\n")
    parts.append("Your Task\n\nSample texts from this topic:\n")
    parts.extend(f"- {s}\n" for s in sentences)
    parts.append(f"\nKeywords:\n{', '.join(keywords)}\n\n")
    parts.append(TOPIC_NAME_INSTRUCTION)
    parts.append("\nTopic:")
    return "".join(parts)


def parse_topic_name(completion: str) -> str | None:
    """Text after a leading ``topic:`` prefix (case-insensitive), or None."""
    for line in completion.splitlines():
        stripped = line.strip()
        if stripped.lower().startswith("topic:"):
            name = stripped[len("topic:"):].strip()
            return name or None
    return None


def refine_topic_name(topic: int, model: TopicModel, chat: ChatBackend, retries: int = 2,
                      temperature: float = 0.0, seed: int = 0) -> str:
    """Ask the LLM for a readable topic label; fall back to the top-3 c-TF-IDF terms."""
    if not model.keywords or not model.representative_sentences:
        raise TopicError("keywords and representative sentences must be populated first")
    kws = [t for t, _ in model.keywords[topic - 1]]
    prompt = topic_name_prompt(model.representative_sentences[topic - 1], kws)
    for attempt in range(retries + 1):
        try:
            completion = chat.chat(ChatRequest(prompt, temperature=temperature, max_tokens=32,
                                               seed=seed + attempt))
        except GatewayError as exc:
            logger.warning("topic %d naming call failed: %s", topic, exc)
            continue
        name = parse_topic_name(completion)
        if name:
            return name
    fallback = "_".join(kws[:3]) or f"topic_{topic}"
    logger.warning("topic %d: no usable `topic:` line after %d attempts; using %r",
                   topic, retries + 1, fallback)
    return fallback


def members_by_topic(assignments: np.ndarray, n_topics: int) -> list[list[int]]:
    groups: list[list[int]] = [[] for _ in range(n_topics)]
    for i, t in enumerate(assignments.tolist()):
        if t != OUTLIER:
            groups[t - 1].append(i)
    return groups


def build_topic_model(refs: Sequence[SentenceRef], texts: Sequence[str], embeddings: np.ndarray,
                      chat: ChatBackend | None, config: TopicConfig | None = None):
    """Fit, label members, compute keywords, representatives and names.

    Returns ``(model, assignments)`` where assignments are per-sentence topic ids.
    Topics that end up with no non-outlier members are dropped and ids compacted.
    """
    cfg = config or TopicConfig()
    model = fit_topics(embeddings, cfg)
    assignments = assign_topics(embeddings, model)
    groups = members_by_topic(assignments, model.n_topics)
    keep = [j for j, g in enumerate(groups) if g]
    # dropping a centroid can move points, so repeat until every topic has members
    while len(keep) < model.n_topics:
        if not keep:
            raise TopicError("every sentence is an outlier; no topic has members")
        logger.warning("dropping %d topics without members", model.n_topics - len(keep))
        model = TopicModel(model.centroids[keep], model.outlier_thresholds[keep])
        assignments = assign_topics(embeddings, model)
        groups = members_by_topic(assignments, model.n_topics)
        keep = [j for j, g in enumerate(groups) if g]
    compute_ctfidf(model, [[texts[i] for i in g] for g in groups], m=cfg.keywords_per_topic)
    model.representative_sentences = [
        representative_sentences(model, j, [refs[i] for i in g], embeddings[g],
                                 [texts[i] for i in g], cfg.representatives)
        for j, g in zip(model.topic_ids(), groups)
    ]
    if chat is not None:
        model.names = [refine_topic_name(j, model, chat, cfg.name_retries, seed=cfg.seed)
                       for j in model.topic_ids()]
    else:
        model.names = ["_".join(t for t, _ in model.keywords[j - 1][:3]) for j in model.topic_ids()]
    return model, assignments


__all__ = [
    "OUTLIER", "TopicConfig", "TopicModel", "TopicError", "fit_topics", "assign_topic",
    "assign_topics", "document_topics", "ctfidf_weights", "compute_ctfidf", "top_terms",
    "representative_sentences", "refine_topic_name", "parse_topic_name", "topic_name_prompt",
    "build_topic_model", "members_by_topic",
]
