"""First-stage retrieval: inverted index + Okapi BM25, then reranking.

Seeds for the genetic loop come from a two-stage pipeline: BM25 over an
inverted index produces candidates, a relevance scorer reranks them, and
the top-s survivors become the seed population.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from math import log
from pathlib import Path

from .corpus import Document, Query
from .errors import EmptyCorpusError
from .text import tokenize

logger = logging.getLogger(__name__)

INDEX_FORMAT = "evoanswer-index"
INDEX_VERSION = 1

DEFAULT_K1 = 0.9
DEFAULT_B = 0.4


@dataclass(frozen=True)
class ScoredDoc:
    """One retrieval result. Ranks are 1-based and contiguous."""

    doc_id: str
    score: float
    rank: int


@dataclass
class InvertedIndex:
    """Term postings plus the corpus statistics BM25 needs."""

    postings: dict[str, list[tuple[str, int]]]
    doc_lengths: dict[str, int]
    avg_doc_length: float
    doc_count: int
    texts: dict[str, str] = field(default_factory=dict)

    def document(self, doc_id: str) -> Document:
        return Document(doc_id, self.texts[doc_id])


def build_index(docs: list[Document]) -> InvertedIndex:
    """Build an inverted index over ``docs``.

    Raises EmptyCorpusError for an empty collection (average length would
    be undefined).
    """
    if not docs:
        raise EmptyCorpusError("cannot index an empty document collection")
    postings: dict[str, list[tuple[str, int]]] = {}
    doc_lengths: dict[str, int] = {}
    texts: dict[str, str] = {}
    for doc in docs:
        tokens = tokenize(doc.text)
        doc_lengths[doc.doc_id] = len(tokens)
        texts[doc.doc_id] = doc.text
        for term, tf in sorted(Counter(tokens).items()):
            postings.setdefault(term, []).append((doc.doc_id, tf))
    avg_doc_length = sum(doc_lengths.values()) / len(doc_lengths)
    return InvertedIndex(
        postings=postings,
        doc_lengths=doc_lengths,
        avg_doc_length=avg_doc_length,
        doc_count=len(doc_lengths),
        texts=texts,
    )


def bm25_term_weight(tf: int, df: int, doc_len: int, avgdl: float, n_docs: int, k1: float, b: float) -> float:
    """Okapi BM25 weight of one term occurrence set in one document."""
    idf = log(1.0 + (n_docs - df + 0.5) / (df + 0.5))
    norm = 1.0 - b + b * (doc_len / avgdl)
    return idf * tf * (k1 + 1.0) / (tf + k1 * norm)


def bm25_search(
    index: InvertedIndex,
    query: Query,
    k: int = 100,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> list[ScoredDoc]:
    """Top-k documents for ``query`` by Okapi BM25.

    Duplicate query terms are counted once. Only documents containing at
    least one query term are returned; ties break by ascending doc_id.
    """
    if k < 1:
        raise ValueError(f"result depth must be >= 1, got {k}")
    scores: dict[str, float] = {}
    for term in sorted(set(tokenize(query.text))):
        posting = index.postings.get(term)
        if not posting:
            continue
        df = len(posting)
        for doc_id, tf in posting:
            weight = bm25_term_weight(
                tf, df, index.doc_lengths[doc_id], index.avg_doc_length, index.doc_count, k1, b
            )
            scores[doc_id] = scores.get(doc_id, 0.0) + weight
    ordered = sorted(scores.items(), key=lambda item: (-item[1], item[0]))[:k]
    return [ScoredDoc(doc_id, score, rank) for rank, (doc_id, score) in enumerate(ordered, start=1)]


def seed_population(
    index: InvertedIndex,
    query: Query,
    scorer,
    first_k: int = 100,
    s: int = 10,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> list[ScoredDoc]:
    """Rerank the BM25 top-``first_k`` with ``scorer`` and keep the top-``s``.

    ``scorer`` follows the RelevanceScorer protocol (see fitness module).
    If fewer than ``s`` candidates are retrieved, all of them are returned
    and a short-seed warning is logged.
    """
    if not (first_k >= s >= 1):
        raise ValueError(f"need first_k >= s >= 1, got first_k={first_k}, s={s}")
    candidates = bm25_search(index, query, k=first_k, k1=k1, b=b)
    if not candidates:
        logger.warning("short-seed: query %s retrieved 0 candidates", query.query_id)
        return []
    raw = scorer.score_batch(query.text, [index.texts[c.doc_id] for c in candidates])
    reranked = sorted(zip(candidates, raw), key=lambda pair: (-pair[1], pair[0].doc_id))
    if len(reranked) < s:
        logger.warning(
            "short-seed: query %s retrieved %d of %d requested seeds",
            query.query_id,
            len(reranked),
            s,
        )
    return [
        ScoredDoc(cand.doc_id, score, rank)
        for rank, (cand, score) in enumerate(reranked[:s], start=1)
    ]


def save_index(index: InvertedIndex, path: str | Path) -> None:
    """Persist the index as versioned JSON. Round-trips losslessly."""
    payload = {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "doc_count": index.doc_count,
        "avg_doc_length": index.avg_doc_length,
        "doc_lengths": index.doc_lengths,
        "postings": {term: [[d, tf] for d, tf in post] for term, post in index.postings.items()},
        "texts": index.texts,
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=0), encoding="utf-8"
    )


def load_index(path: str | Path) -> InvertedIndex:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != INDEX_FORMAT:
        raise ValueError(f"{path}: not an index file")
    if payload.get("version") != INDEX_VERSION:
        raise ValueError(f"{path}: unsupported index version {payload.get('version')!r}")
    return InvertedIndex(
        postings={term: [(d, tf) for d, tf in post] for term, post in payload["postings"].items()},
        doc_lengths=payload["doc_lengths"],
        avg_doc_length=payload["avg_doc_length"],
        doc_count=payload["doc_count"],
        texts=payload["texts"],
    )
