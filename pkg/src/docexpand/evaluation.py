"""Ranking metrics, TREC run files, topic recall and correlation analysis."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Qrels, atomic_write_text
from .topics import OUTLIER, TopicModel, assign_topics

Run = dict[str, list[tuple[str, float]]]
METRICS = ("map", "ndcg@10", "recall@100")


class RunFormatError(ValueError):
    pass


class UndefinedCorrelation(ValueError):
    pass


def ndcg_at_k(ranked: Sequence[str], judgments: Mapping[str, int], k: int = 10) -> float:
    """Exponential gain ``2^rel - 1``, ``log2(rank + 1)`` discount; 0 when no positive grade."""
    dcg = sum((2.0 ** judgments.get(d, 0) - 1.0) / math.log2(i + 2) for i, d in enumerate(ranked[:k]))
    ideal = sorted(judgments.values(), reverse=True)[:k]
    idcg = sum((2.0 ** g - 1.0) / math.log2(i + 2) for i, g in enumerate(ideal))
    return dcg / idcg if idcg > 0 else 0.0


def recall_at_k(ranked: Sequence[str], judgments: Mapping[str, int], k: int = 100) -> float:
    relevant = {d for d, g in judgments.items() if g > 0}
    if not relevant:
        return 0.0
    return len(relevant.intersection(ranked[:k])) / len(relevant)


def average_precision(ranked: Sequence[str], judgments: Mapping[str, int]) -> float:
    relevant = {d for d, g in judgments.items() if g > 0}
    if not relevant:
        return 0.0
    hits, total = 0, 0.0
    for i, d in enumerate(ranked, start=1):
        if d in relevant:
            hits += 1
            total += hits / i
    return total / len(relevant)


def _metric_fn(name: str):
    name = name.strip().lower()
    if name == "map":
        return average_precision
    if name.startswith("ndcg@"):
        k = int(name.split("@", 1)[1])
        return lambda r, j: ndcg_at_k(r, j, k)
    if name.startswith("recall@"):
        k = int(name.split("@", 1)[1])
        return lambda r, j: recall_at_k(r, j, k)
    raise ValueError(f"unknown metric {name!r}")


@dataclass
class MetricReport:
    means: dict[str, float] = field(default_factory=dict)
    per_query: dict[str, dict[str, float]] = field(default_factory=dict)
    excluded: list[str] = field(default_factory=list)

    def __getitem__(self, metric: str) -> float:
        return self.means[metric]

    def to_json(self) -> dict:
        out = {m: {"mean": self.means[m], "per_query": self.per_query[m]} for m in self.means}
        out["_excluded_queries"] = list(self.excluded)
        return out


def evaluate_run(run: Mapping[str, Sequence[tuple[str, float]]], qrels: Qrels,
                 metrics: Sequence[str] = METRICS) -> MetricReport:
    """Mean over judged queries with at least one relevant document.

    Judged queries absent from the run score 0.  Ranking follows list order.
    """
    report = MetricReport()
    fns = {m: _metric_fn(m) for m in metrics}
    for m in metrics:
        report.per_query[m] = {}
    for qid in sorted(qrels):
        judgments = qrels[qid]
        if not any(g > 0 for g in judgments.values()):
            report.excluded.append(qid)
            continue
        ranked = [d for d, _ in run.get(qid, [])]
        for m, fn in fns.items():
            report.per_query[m][qid] = fn(ranked, judgments)
    for m in metrics:
        vals = list(report.per_query[m].values())
        report.means[m] = float(sum(vals) / len(vals)) if vals else 0.0
    return report


# --- TREC run files ------------------------------------------------------------

def format_run(run: Mapping[str, Sequence[tuple[str, float]]], tag: str = "docexpand") -> str:
    lines = []
    for qid in run:
        for rank, (did, score) in enumerate(run[qid], start=1):
            lines.append(f"{qid} Q0 {did} {rank} {score:.6g} {tag}")
    return "\n".join(lines) + ("\n" if lines else "")


def write_run(run: Mapping[str, Sequence[tuple[str, float]]], path: str | os.PathLike,
              tag: str = "docexpand") -> None:
    atomic_write_text(path, format_run(run, tag))


def read_run(path: str | os.PathLike) -> Run:
    run: Run = {}
    seen: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6:
                raise RunFormatError(f"{path}:{lineno}: expected 6 columns, got {len(parts)}")
            qid, _, did, _, raw, _ = parts
            try:
                score = float(raw)
            except ValueError:
                raise RunFormatError(f"{path}:{lineno}: bad score {raw!r}") from None
            hits = run.setdefault(qid, [])
            if did in seen.setdefault(qid, set()):
                raise RunFormatError(f"{path}:{lineno}: duplicate document {did} for query {qid}")
            if hits and score > hits[-1][1]:
                raise RunFormatError(f"{path}:{lineno}: score increases within query {qid}")
            seen[qid].add(did)
            hits.append((did, score))
    return run


# --- topic recall and correlation ------------------------------------------------

def topic_recall_from_sets(gold: Iterable[int], assigned: Iterable[int]) -> float | None:
    gold = set(gold)
    if not gold:
        return None
    return len(gold & set(assigned)) / len(gold)


def topic_recall(gold: Iterable[int], query_embeddings: np.ndarray, model: TopicModel) -> float | None:
    """Share of gold topics hit by the queries' nearest topics; None when gold is empty."""
    gold = set(gold)
    if not gold:
        return None
    if len(query_embeddings) == 0:
        raise ValueError("no query embeddings")
    assigned = {int(t) for t in assign_topics(query_embeddings, model) if t != OUTLIER}
    return topic_recall_from_sets(gold, assigned)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("pearson needs two equal-length sequences of at least 2 values")
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelation("correlation undefined for zero-variance input")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def gain_vs_topic_recall(baseline: MetricReport, expanded: MetricReport, run: Mapping[str, Sequence[tuple[str, float]]],
                         doc_recall: Mapping[str, float], metric: str = "ndcg@10", depth: int = 10):
    """Per-query (mean topic recall of the top-``depth`` retrieved docs, metric gain) pairs.

    Queries whose retrieved docs all lack a defined topic recall are skipped.
    """
    xs, ys, qids = [], [], []
    for qid, value in expanded.per_query[metric].items():
        recalls = [doc_recall[d] for d, _ in run.get(qid, [])[:depth] if d in doc_recall]
        if not recalls:
            continue
        xs.append(sum(recalls) / len(recalls))
        ys.append(value - baseline.per_query[metric].get(qid, 0.0))
        qids.append(qid)
    return qids, xs, ys


def write_report(report: MetricReport, path: str | os.PathLike) -> None:
    atomic_write_text(path, json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
