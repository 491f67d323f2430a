"""Tokenization and normalization helpers shared by the corpus and metric layers.

One tokenizer serves keyword frequency, lexical diversity, co-occurrence and
the bag-of-words embedding double, so every token-based quantity in a run is
computed over the same token stream.
"""

from __future__ import annotations

import re

_WORD_RE = re.compile(r"\w+", re.UNICODE)
_SENTENCE_SPLIT_RE = re.compile(r"[.?!]+")
_WS_RE = re.compile(r"\s+")


def tokenize(text: str) -> list[str]:
    """Casefolded unicode word tokens with punctuation stripped."""
    return _WORD_RE.findall(text.casefold())


def split_sentences(text: str) -> list[str]:
    """Split on ``.?!`` runs, dropping empty segments."""
    return [seg for seg in (s.strip() for s in _SENTENCE_SPLIT_RE.split(text)) if seg]


def normalize_key(text: str) -> str:
    """Casefold, trim, and collapse internal whitespace. Used as a dedup key."""
    return _WS_RE.sub(" ", text.strip()).casefold()
