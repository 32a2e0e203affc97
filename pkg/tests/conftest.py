"""Shared fixtures: small corpora written to disk for file-level tests."""

from __future__ import annotations

import pytest

from evoanswer import write_corpus
from synth import make_topic_set, write_queries


@pytest.fixture()
def topic_files(tmp_path):
    """Corpus JSONL and query TSV for three topics, on disk."""
    docs, queries = make_topic_set(3)
    corpus_path = tmp_path / "corpus.jsonl"
    queries_path = tmp_path / "queries.tsv"
    write_corpus(docs, corpus_path)
    write_queries(queries, queries_path)
    return corpus_path, queries_path
