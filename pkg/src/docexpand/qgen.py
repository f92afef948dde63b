"""Batched few-shot query generation covering a document's topics and keywords."""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

from .gateway import ChatBackend, ChatRequest, GatewayError

logger = logging.getLogger(__name__)

NO_TOPIC_SENTINEL = "general content of the passage"
MODES = ("F", "F+K", "full")


class GenerationError(RuntimeError):
    """Hard backend failure; ``partial`` holds what was generated so far."""

    def __init__(self, message: str, partial: "GenerationRecord"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class Exemplar:
    article: str
    topics: str
    keywords: str
    queries: tuple[str, ...]


@dataclass
class GenerationConfig:
    num_queries: int = 30
    batch_size: int = 3
    temperature: float = 0.8
    max_tokens: int = 256
    max_parse_retries: int = 2
    seed: int = 0
    mode: str = "full"

    def validate(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.num_queries < self.batch_size:
            raise ValueError("num_queries must be >= batch_size")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    @property
    def batch_cap(self) -> int:
        return 4 * math.ceil(self.num_queries / self.batch_size)


@dataclass
class GenerationRecord:
    doc_id: str
    queries: list[str] = field(default_factory=list)
    topics_used: list[str] = field(default_factory=list)
    keywords_used: list[str] = field(default_factory=list)
    batches_issued: int = 0

    def to_json(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "queries": list(self.queries),
            "topics_used": list(self.topics_used),
            "keywords_used": list(self.keywords_used),
            "batches_issued": self.batches_issued,
        }


# --- exemplar files ---------------------------------------------------------------

_EXAMPLE_RE = re.compile(r"^Example\s+\d+\s*$", re.MULTILINE)
_FIELDS = ("Article:", "Topics:", "Keywords:", "Generated Queries:")


def parse_exemplars(text: str) -> list[Exemplar]:
    """Parse ``Example N`` blocks with Article/Topics/Keywords/Generated Queries fields."""
    blocks = [b for b in _EXAMPLE_RE.split(text)[1:] if b.strip()]
    out = []
    for n, block in enumerate(blocks, start=1):
        values: dict[str, list[str]] = {}
        current = None
        for line in block.splitlines():
            head = next((f for f in _FIELDS if line.startswith(f)), None)
            if head:
                current = head
                values[current] = [line[len(head):].strip()]
            elif current:
                values[current].append(line)
        missing = [f for f in _FIELDS if f not in values]
        if missing:
            raise ValueError(f"exemplar {n} lacks fields {missing}")
        joined = {k: "\n".join(v).strip() for k, v in values.items()}
        queries = tuple(q for q in parse_queries(joined["Generated Queries:"], expected=10**6))
        out.append(Exemplar(joined["Article:"], joined["Topics:"], joined["Keywords:"], queries))
    if not out:
        raise ValueError("no exemplars found")
    return out


def load_exemplars(path: str | Path | None = None) -> list[Exemplar]:
    if path is None:
        text = resources.files("docexpand").joinpath("data/fewshot_default.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_exemplars(text)


# --- prompt ------------------------------------------------------------------------

_INTRO = {
    "full": ("You are an expert assistant in crafting search queries for a given passage that "
             "cover specified topics and make use of given keywords. The following are some examples:"),
    "F+K": ("You are an expert assistant in crafting search queries for a given passage that "
            "make use of given keywords. The following are some examples:"),
    "F": ("You are an expert assistant in crafting search queries for a given passage. "
          "The following are some examples:"),
}

_TASK = {
    "full": "Now generate {b} relevant queries for this passage that collectively cover specified topics by using given keywords:",
    "F+K": "Now generate {b} relevant queries for this passage by using given keywords:",
    "F": "Now generate {b} relevant queries for this passage:",
}


def build_prompt(body: str, topic_names: Sequence[str], keywords: Sequence[str],
                 fewshot: Sequence[Exemplar], batch_size: int = 3, mode: str = "full") -> str:
    """Few-shot prompt; ``mode`` F drops topics and keywords, F+K drops topics."""
    if not fewshot:
        raise ValueError("at least one few-shot exemplar is required")
    show_topics = mode == "full"
    show_keywords = mode in ("full", "F+K")
    lines = [_INTRO[mode], ""]
    for i, ex in enumerate(fewshot, start=1):
        lines += [f"Example {i}", "", "Article:", ex.article, ""]
        if show_topics:
            lines += ["Topics:", ex.topics, ""]
        if show_keywords:
            lines += [f"Keywords: {ex.keywords}", ""]
        lines += ["Generated Queries:"] + [f"- {q}" for q in ex.queries] + [""]
    lines += ["Your Task:", "", _TASK[mode].format(b=batch_size), "", f"Passage: {body}", ""]
    if show_topics:
        lines += [f"Topics: {', '.join(topic_names) if topic_names else NO_TOPIC_SENTINEL}", ""]
    if show_keywords:
        lines += [f"Keywords: {', '.join(keywords)}", ""]
    lines.append("Queries:")
    return "\n".join(lines)


# --- parsing -----------------------------------------------------------------------

_LIST_RE = re.compile(r"^\s*(?:[-*•]|\d+[.):]|\(\d+\)|[Qq]\d+[.):])\s+(.*\S)\s*$")


def parse_queries(completion: str, expected: int = 3) -> list[str]:
    """List items or bare lines ending in ``?``, markers stripped, at most ``expected``."""
    out = []
    for line in completion.splitlines():
        m = _LIST_RE.match(line)
        if m:
            q = m.group(1).strip().strip('"').strip()
        elif line.strip().endswith("?"):
            q = line.strip().strip('"').strip()
        else:
            continue
        if q:
            out.append(q)
        if len(out) >= expected:
            break
    return out


# --- generation loop ---------------------------------------------------------------

def generate_queries(doc_id: str, body: str, topic_names: Sequence[str], keywords: Sequence[str],
                     config: GenerationConfig, chat: ChatBackend,
                     fewshot: Sequence[Exemplar]) -> GenerationRecord:
    """Issue batches until ``num_queries`` distinct queries or the batch cap.

    Every batch reuses the same prompt; variation comes from sampling and
    from a per-call seed.  Case-insensitive duplicates are dropped.
    Unparseable completions are retried (a warning is logged once more than
    ``max_parse_retries`` arrive in a row); every call counts toward the cap.
    """
    config.validate()
    topics_used = list(topic_names) if config.mode == "full" else []
    keywords_used = list(keywords) if config.mode in ("full", "F+K") else []
    prompt = build_prompt(body, topics_used, keywords_used, fewshot, config.batch_size, config.mode)
    record = GenerationRecord(doc_id, topics_used=topics_used or ([NO_TOPIC_SENTINEL] if config.mode == "full" else []),
                              keywords_used=keywords_used)
    seen: set[str] = set()
    failures = 0
    while len(record.queries) < config.num_queries and record.batches_issued < config.batch_cap:
        request = ChatRequest(prompt, temperature=config.temperature, max_tokens=config.max_tokens,
                              seed=config.seed + record.batches_issued)
        record.batches_issued += 1
        try:
            completion = chat.chat(request)
        except GatewayError as exc:
            raise GenerationError(f"generation for {doc_id} failed: {exc}", record) from exc
        batch = parse_queries(completion, config.batch_size)
        if not batch:
            failures += 1
            if failures == config.max_parse_retries + 1:
                logger.warning("%s: %d consecutive unparseable completions", doc_id, failures)
            continue
        failures = 0
        for q in batch:
            key = q.casefold()
            if key in seen:
                continue
            seen.add(key)
            record.queries.append(q)
            if len(record.queries) == config.num_queries:
                break
    if len(record.queries) < config.num_queries:
        logger.warning("%s: only %d of %d queries after %d batches",
                       doc_id, len(record.queries), config.num_queries, record.batches_issued)
    return record


__all__ = [
    "Exemplar", "GenerationConfig", "GenerationRecord", "GenerationError", "NO_TOPIC_SENTINEL",
    "MODES", "parse_exemplars", "load_exemplars", "build_prompt", "parse_queries",
    "generate_queries",
]
