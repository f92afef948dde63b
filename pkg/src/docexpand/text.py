"""Shared lexical helpers: stop-words, word splitting, stemming."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    """Bundled English stop-word list (lowercase)."""
    raw = resources.files("docexpand").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in raw.splitlines() if w.strip())


def words(text: str) -> list[str]:
    """Lowercase alphanumeric runs; everything else is a separator."""
    return _WORD_RE.findall(text.lower())


@lru_cache(maxsize=1)
def _stemmer():
    # nltk is slow to import; defer until the first stem
    from nltk.stem.porter import PorterStemmer

    return PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


@lru_cache(maxsize=500_000)
def stem(word: str) -> str:
    return _stemmer().stem(word)


def is_numeric(token: str) -> bool:
    return token.isdigit()


def content_terms(text: str) -> list[str]:
    """Unstemmed terms with stop-words and numeric-only tokens removed."""
    stop = stopwords()
    return [w for w in words(text) if w not in stop and not is_numeric(w)]
