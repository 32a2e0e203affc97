"""Tokenization and n-gram extraction shared by retrieval, fitness and mocks.

Tokens are lowercased and split on runs of non-alphanumeric characters; no
stopword removal and, by default, no stemming. Comparison is by exact
codepoint equality after lowercasing, with no further Unicode normalization.
"""

from __future__ import annotations

import re
from collections import Counter

# Unicode letters and digits; underscore is excluded on purpose.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")

# Crude English suffix stripper, only active when stemming is requested.
_STEM_SUFFIXES = ("ing", "edly", "ed", "es", "s")


def _stem(token: str) -> str:
    for suffix in _STEM_SUFFIXES:
        if token.endswith(suffix) and len(token) > len(suffix) + 2:
            return token[: -len(suffix)]
    return token


def tokenize(text: str, stem: bool = False) -> list[str]:
    """Lowercase ``text`` and split it on non-alphanumeric runs.

    Empty input yields an empty list. ``stem`` applies a minimal suffix
    stripper and is off by default to keep ROUGE and BM25 reproducible.
    """
    tokens = _TOKEN_RE.findall(text.lower())
    if stem:
        tokens = [_stem(t) for t in tokens]
    return tokens


def ngrams(tokens: list[str], n: int) -> Counter[tuple[str, ...]]:
    """Count contiguous n-grams of ``tokens`` with multiplicity.

    The total count is max(0, len(tokens) - n + 1). Raises ValueError for
    n < 1.
    """
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def split_sentences(text: str) -> list[str]:
    """Split on '.', '!' or '?' followed by whitespace.

    Deliberately crude but deterministic; each sentence keeps its terminal
    punctuation. Whitespace-only fragments are dropped.
    """
    return [part.strip() for part in _SENTENCE_SPLIT_RE.split(text) if part.strip()]
