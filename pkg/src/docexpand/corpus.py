"""BEIR-layout loading, sentence segmentation and expanded-corpus persistence."""

from __future__ import annotations

import csv
import json
import logging
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

logger = logging.getLogger(__name__)


class CorpusError(ValueError):
    """Malformed or inconsistent corpus input."""


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    text: str

    def body(self, include_title: bool = True) -> str:
        """Indexable text: ``title + " " + text`` when a title is present."""
        if include_title and self.title.strip():
            if self.text.strip():
                return f"{self.title} {self.text}"
            return self.title
        return self.text


@dataclass(frozen=True)
class QueryRecord:
    query_id: str
    text: str


@dataclass(frozen=True)
class ExpandedDocument:
    doc_id: str
    queries: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "queries", tuple(self.queries))


@dataclass(frozen=True)
class Sentence:
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class SentenceSet:
    doc_id: str
    sentences: tuple[Sentence, ...] = field(default_factory=tuple)

    @property
    def texts(self) -> list[str]:
        return [s.text for s in self.sentences]


Qrels = dict[str, dict[str, int]]


def _read_jsonl(path: Path) -> Iterable[tuple[int, dict]]:
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise CorpusError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def load_corpus(path: str | os.PathLike) -> list[Document]:
    """Read ``corpus.jsonl`` (``_id``, ``title``, ``text`` per line), preserving order."""
    path = Path(path)
    docs: list[Document] = []
    seen: set[str] = set()
    for lineno, obj in _read_jsonl(path):
        doc_id = obj.get("_id")
        if not isinstance(doc_id, str) or not doc_id:
            raise CorpusError(f"{path}:{lineno}: missing or empty _id")
        if doc_id in seen:
            raise CorpusError(f"{path}:{lineno}: duplicate _id {doc_id!r}")
        seen.add(doc_id)
        docs.append(Document(doc_id, str(obj.get("title") or ""), str(obj.get("text") or "")))
    logger.info("loaded %d documents from %s", len(docs), path)
    return docs


def indexable(docs: Iterable[Document], include_title: bool = True) -> list[Document]:
    """Drop documents whose body is blank, with a warning for each."""
    kept = []
    for d in docs:
        if d.body(include_title).strip():
            kept.append(d)
        else:
            logger.warning("skipping document %s: empty body", d.doc_id)
    return kept


def load_queries(path: str | os.PathLike) -> list[QueryRecord]:
    path = Path(path)
    out: list[QueryRecord] = []
    seen: set[str] = set()
    for lineno, obj in _read_jsonl(path):
        qid, text = obj.get("_id"), obj.get("text")
        if not isinstance(qid, str) or not qid:
            raise CorpusError(f"{path}:{lineno}: missing or empty _id")
        if qid in seen:
            raise CorpusError(f"{path}:{lineno}: duplicate query id {qid!r}")
        if not isinstance(text, str) or not text.strip():
            raise CorpusError(f"{path}:{lineno}: query {qid!r} has empty text")
        seen.add(qid)
        out.append(QueryRecord(qid, text))
    return out


def load_qrels(path: str | os.PathLike) -> Qrels:
    """Read a BEIR qrels TSV (header row; query-id, corpus-id, score)."""
    path = Path(path)
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    judgments: Qrels = {}
    with fh:
        reader = csv.reader(fh, delimiter="\t")
        header = next(reader, None)
        if header is None:
            return judgments
        cols = [h.strip() for h in header]
        try:
            qi, di, si = cols.index("query-id"), cols.index("corpus-id"), cols.index("score")
        except ValueError as exc:
            raise CorpusError(f"{path}: header must name query-id, corpus-id, score; got {cols}") from exc
        for lineno, row in enumerate(reader, start=2):
            if not row or not any(c.strip() for c in row):
                continue
            if len(row) <= max(qi, di, si):
                raise CorpusError(f"{path}:{lineno}: missing column")
            qid, did, raw = row[qi].strip(), row[di].strip(), row[si].strip()
            try:
                grade = int(raw)
            except ValueError:
                raise CorpusError(f"{path}:{lineno}: non-integer grade {raw!r}") from None
            if grade < 0:
                raise CorpusError(f"{path}:{lineno}: negative grade {grade}")
            per_q = judgments.setdefault(qid, {})
            if did in per_q:
                raise CorpusError(f"{path}:{lineno}: duplicate judgment ({qid}, {did})")
            per_q[did] = grade
    return judgments


def write_qrels(qrels: Qrels, path: str | os.PathLike) -> None:
    lines = ["query-id\tcorpus-id\tscore"]
    for qid in sorted(qrels):
        for did in sorted(qrels[qid]):
            lines.append(f"{qid}\t{did}\t{qrels[qid][did]}")
    atomic_write_text(path, "\n".join(lines) + "\n")


# --- segmentation -----------------------------------------------------------

ABBREVIATIONS = frozenset({
    "e.g.", "i.e.", "etc.", "dr.", "mr.", "mrs.", "ms.", "prof.", "fig.", "figs.",
    "al.", "vs.", "cf.", "no.", "st.", "jr.", "sr.", "inc.", "ltd.", "co.",
    "approx.", "eq.", "ref.", "vol.", "pp.", "ca.", "resp.", "sec.",
})

_BOUNDARY_RE = re.compile(r"[.!?]+[\"')\]]*(?=\s+[\"'(\[]?[A-Z0-9])")


def _protected(text: str, end: int) -> bool:
    """True when the terminator ending at ``end`` closes an abbreviation."""
    if text[end - 1] != ".":
        return False
    start = end - 1
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    token = text[start:end].lower().lstrip("\"'([")
    return token in ABBREVIATIONS


def segment_text(text: str) -> list[Sentence]:
    """Rule-based split on ``.``/``!``/``?`` + whitespace + uppercase or digit."""
    sentences: list[Sentence] = []
    cursor = 0
    for m in _BOUNDARY_RE.finditer(text):
        stripped_end = m.end()
        # closing quotes/brackets belong to the sentence; check the terminator itself
        term_end = m.start() + len(m.group(0).rstrip("\"')]"))
        if _protected(text, term_end):
            continue
        _append_span(text, cursor, stripped_end, sentences)
        cursor = stripped_end
    _append_span(text, cursor, len(text), sentences)
    return sentences


def _append_span(text: str, start: int, end: int, out: list[Sentence]) -> None:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    if end > start:
        out.append(Sentence(text[start:end], start, end))


def segment_sentences(doc: Document) -> SentenceSet:
    """Split ``doc.text`` (or the title, for text-less stubs) into sentences."""
    source = doc.text if doc.text.strip() else doc.title
    sents = segment_text(source)
    return SentenceSet(doc.doc_id, tuple(sents))


# --- persistence ------------------------------------------------------------

def atomic_write_text(path: str | os.PathLike, content: str) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_jsonl(path: str | os.PathLike, rows: Iterable[dict]) -> None:
    atomic_write_text(path, "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows))


def read_jsonl(path: str | os.PathLike) -> list[dict]:
    return [obj for _, obj in _read_jsonl(Path(path))]


def write_corpus(docs: Iterable[Document], path: str | os.PathLike) -> None:
    write_jsonl(path, ({"_id": d.doc_id, "title": d.title, "text": d.text} for d in docs))


def write_queries(queries: Iterable[QueryRecord], path: str | os.PathLike) -> None:
    write_jsonl(path, ({"_id": q.query_id, "text": q.text} for q in queries))


def write_expanded_corpus(docs: Iterable[ExpandedDocument], path: str | os.PathLike) -> None:
    rows = []
    for d in docs:
        if not d.queries:
            raise CorpusError(f"expanded document {d.doc_id!r} has no queries (generation incomplete)")
        if any(not q.strip() for q in d.queries):
            raise CorpusError(f"expanded document {d.doc_id!r} contains an empty query")
        rows.append({"_id": d.doc_id, "queries": list(d.queries)})
    try:
        write_jsonl(path, rows)
    except OSError as exc:
        raise CorpusError(f"cannot write {path}: {exc}") from exc


def load_expanded_corpus(path: str | os.PathLike) -> list[ExpandedDocument]:
    path = Path(path)
    out = []
    seen: set[str] = set()
    for lineno, obj in _read_jsonl(path):
        doc_id, queries = obj.get("_id"), obj.get("queries")
        if not isinstance(doc_id, str) or not isinstance(queries, list):
            raise CorpusError(f"{path}:{lineno}: expected _id string and queries array")
        if doc_id in seen:
            raise CorpusError(f"{path}:{lineno}: duplicate _id {doc_id!r}")
        seen.add(doc_id)
        out.append(ExpandedDocument(doc_id, tuple(str(q) for q in queries)))
    return out


def beir_paths(dataset_dir: str | os.PathLike, split: str = "test") -> dict[str, Path]:
    root = Path(dataset_dir)
    return {
        "corpus": root / "corpus.jsonl",
        "queries": root / "queries.jsonl",
        "qrels": root / "qrels" / f"{split}.tsv",
    }
