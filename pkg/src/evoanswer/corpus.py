"""Corpus and query ingestion.

Two corpus layouts are accepted: JSONL (one object with ``doc_id`` and
``text`` per line) and TSV (``doc_id<TAB>text``). Query files are TSV
(``query_id<TAB>text``). Blank lines are skipped in every format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import CorpusFormatError, DuplicateIdError


@dataclass(frozen=True)
class Document:
    """A corpus passage: the raw material of retrieval and evolution."""

    doc_id: str
    text: str


@dataclass(frozen=True)
class Query:
    """A user question."""

    query_id: str
    text: str


def _check_record(path: str, line_no: int, record_id: str, text: str, seen: set[str]) -> None:
    if not record_id:
        raise CorpusFormatError(path, line_no, "empty id")
    if not text.strip():
        raise CorpusFormatError(path, line_no, f"empty text for id {record_id!r}")
    if record_id in seen:
        raise DuplicateIdError(path, line_no, record_id)
    seen.add(record_id)


def ingest_corpus(path: str | Path, format: str = "jsonl") -> list[Document]:
    """Read all documents from ``path``.

    ``format`` is ``"jsonl"`` or ``"tsv"``. Malformed lines raise
    CorpusFormatError naming the line number; duplicate doc_ids raise
    DuplicateIdError naming the id. An empty file yields an empty list.
    """
    if format not in ("jsonl", "tsv"):
        raise ValueError(f"unknown corpus format {format!r}")
    path = Path(path)
    docs: list[Document] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            if format == "jsonl":
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusFormatError(str(path), line_no, f"invalid JSON: {exc.msg}") from exc
                if not isinstance(record, dict) or "doc_id" not in record or "text" not in record:
                    raise CorpusFormatError(str(path), line_no, "object must have doc_id and text")
                doc_id, text = str(record["doc_id"]), str(record["text"])
            else:
                parts = line.rstrip("\n").split("\t", 1)
                if len(parts) != 2:
                    raise CorpusFormatError(str(path), line_no, "expected doc_id<TAB>text")
                doc_id, text = parts
            _check_record(str(path), line_no, doc_id, text, seen)
            docs.append(Document(doc_id, text))
    return docs


def load_queries(path: str | Path) -> list[Query]:
    """Read a TSV query file (``query_id<TAB>text``)."""
    path = Path(path)
    queries: list[Query] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t", 1)
            if len(parts) != 2:
                raise CorpusFormatError(str(path), line_no, "expected query_id<TAB>text")
            query_id, text = parts
            _check_record(str(path), line_no, query_id, text, seen)
            queries.append(Query(query_id, text))
    return queries


def write_corpus(docs: Iterable[Document], path: str | Path) -> None:
    """Serialize documents back to JSONL; inverse of jsonl ingestion."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for doc in docs:
            handle.write(json.dumps({"doc_id": doc.doc_id, "text": doc.text}, ensure_ascii=False))
            handle.write("\n")
