"""Rewrite operators and the backends that execute them.

Three operators mutate or combine candidate texts through a rewriter
backend: a random mutation summarizes one document, a controlled mutation
rewrites one document toward the query, and crossover rewrites two or more
documents into one. Each operator has a fixed instruction prompt; backends
receive the structured request and return plain text.

Mock backends make the whole pipeline runnable offline and deterministic:
an extractive one edits by sentence selection, a noisy one corrupts the
extractive output with seeded token replacements, and an identity one
returns its first input unchanged.
"""

from __future__ import annotations

import hashlib
import logging
import random
import re
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol, runtime_checkable

from .errors import BackendError
from .fitness import FitnessScore
from .text import split_sentences, tokenize

logger = logging.getLogger(__name__)


class Operator(str, Enum):
    RANDOM_MUTATION = "random_mutation"
    CONTROLLED_MUTATION = "controlled_mutation"
    CROSSOVER = "crossover"


PROMPTS: dict[Operator, str] = {
    Operator.RANDOM_MUTATION: "Summarize the document",
    Operator.CONTROLLED_MUTATION: "Re-write the document to better answer the query",
    Operator.CROSSOVER: "Re-write the given documents to better answer the query",
}

# Short opcode used in offspring candidate ids.
OPCODES: dict[Operator, str] = {
    Operator.RANDOM_MUTATION: "rnd",
    Operator.CONTROLLED_MUTATION: "ctl",
    Operator.CROSSOVER: "xov",
}

DEFAULT_RETRIES = 2
DEFAULT_BACKOFF_SECONDS = 0.25


@dataclass(frozen=True)
class RewriteRequest:
    """One rewrite call: an operator, its prompt, and the input texts.

    Mutations take exactly one input; crossover takes two or more. The
    query is required for the query-directed operators and absent for
    random mutation.
    """

    operator: Operator
    prompt: str
    query: str | None
    inputs: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.operator is Operator.CROSSOVER:
            if len(self.inputs) < 2:
                raise ValueError(
                    f"crossover needs at least 2 inputs, got {len(self.inputs)}"
                )
        elif len(self.inputs) != 1:
            raise ValueError(
                f"{self.operator.value} needs exactly 1 input, got {len(self.inputs)}"
            )
        needs_query = self.operator is not Operator.RANDOM_MUTATION
        if needs_query and not self.query:
            raise ValueError(f"{self.operator.value} requires a query")
        if not needs_query and self.query is not None:
            raise ValueError(f"{self.operator.value} does not take a query")
        if any(not text.strip() for text in self.inputs):
            raise ValueError("rewrite inputs must be non-empty")


def make_request(operator: Operator, query: str | None, inputs: tuple[str, ...]) -> RewriteRequest:
    """Build a request with the operator's canonical prompt."""
    return RewriteRequest(operator=operator, prompt=PROMPTS[operator], query=query, inputs=inputs)


def render_request(request: RewriteRequest) -> str:
    """Flatten a request into the single prompt string sent to a text LLM.

    Layout: instruction, optional query line, then one numbered block per
    document, separated by blank lines.
    """
    parts = [request.prompt]
    if request.query is not None:
        parts.append(f"Query: {request.query}")
    for i, text in enumerate(request.inputs, start=1):
        parts.append(f"Document {i}: {text}")
    return "\n\n".join(parts)


@dataclass
class Candidate:
    """One answer text with its lineage and cached fitness.

    ``generation`` is lineage depth: 0 for seeds, 1 + max parent depth for
    offspring. ``parents`` hold candidate ids from strictly earlier
    generations; seeds have no parents and no operator.
    """

    candidate_id: str
    text: str
    generation: int
    operator: Operator | None = None
    parents: tuple[str, ...] = ()
    fitness: FitnessScore | None = None

    def __post_init__(self) -> None:
        if self.generation == 0:
            if self.operator is not None or self.parents:
                raise ValueError("seed candidates take no operator and no parents")
        else:
            if self.operator is None or not self.parents:
                raise ValueError("offspring need an operator and at least one parent")

    def to_dict(self) -> dict:
        return {
            "id": self.candidate_id,
            "text": self.text,
            "generation": self.generation,
            "operator": self.operator.value if self.operator else None,
            "parents": list(self.parents),
            "fitness": self.fitness.to_dict() if self.fitness else None,
        }


@runtime_checkable
class RewriterBackend(Protocol):
    """Executes rewrite requests; must return non-empty text."""

    name: str

    def rewrite(self, request: RewriteRequest) -> str: ...


def call_backend(
    backend: RewriterBackend,
    request: RewriteRequest,
    retries: int = DEFAULT_RETRIES,
    backoff_seconds: float = DEFAULT_BACKOFF_SECONDS,
) -> str:
    """Run one rewrite with retry on transient failures.

    Retryable errors are retried up to ``retries`` times with exponential
    backoff; the last error propagates. Empty backend output is an error:
    backends must be total.
    """
    attempt = 0
    while True:
        try:
            text = backend.rewrite(request)
        except BackendError as err:
            if not err.retryable or attempt >= retries:
                raise
            delay = backoff_seconds * (2**attempt)
            logger.warning(
                "retrying %s after backend error (attempt %d): %s",
                request.operator.value,
                attempt + 1,
                err,
            )
            time.sleep(delay)
            attempt += 1
            continue
        if not text or not text.strip():
            raise BackendError(
                f"backend {backend.name} returned empty text for {request.operator.value}"
            )
        return text


def _child(
    text: str,
    candidate_id: str,
    operator: Operator,
    parents: tuple[Candidate, ...],
) -> Candidate:
    return Candidate(
        candidate_id=candidate_id,
        text=text,
        generation=1 + max(p.generation for p in parents),
        operator=operator,
        parents=tuple(p.candidate_id for p in parents),
    )


def random_mutate(
    backend: RewriterBackend,
    parent: Candidate,
    candidate_id: str,
    retries: int = DEFAULT_RETRIES,
) -> Candidate:
    """Summarize one parent, query-blind."""
    request = make_request(Operator.RANDOM_MUTATION, None, (parent.text,))
    text = call_backend(backend, request, retries=retries)
    return _child(text, candidate_id, Operator.RANDOM_MUTATION, (parent,))


def controlled_mutate(
    backend: RewriterBackend,
    parent: Candidate,
    query: str,
    candidate_id: str,
    retries: int = DEFAULT_RETRIES,
) -> Candidate:
    """Rewrite one parent toward the query."""
    request = make_request(Operator.CONTROLLED_MUTATION, query, (parent.text,))
    text = call_backend(backend, request, retries=retries)
    return _child(text, candidate_id, Operator.CONTROLLED_MUTATION, (parent,))


def crossover(
    backend: RewriterBackend,
    parents: tuple[Candidate, ...],
    query: str,
    candidate_id: str,
    retries: int = DEFAULT_RETRIES,
) -> Candidate:
    """Combine two or more parents into one query-directed rewrite."""
    request = make_request(Operator.CROSSOVER, query, tuple(p.text for p in parents))
    text = call_backend(backend, request, retries=retries)
    return _child(text, candidate_id, Operator.CROSSOVER, parents)


def _matching_sentences(text: str, query: str) -> list[str]:
    """Sentences sharing at least one token with the query, in order.

    Falls back to the first sentence when nothing matches, so the result
    is never empty.
    """
    query_terms = set(tokenize(query))
    sentences = split_sentences(text)
    matched = [s for s in sentences if query_terms & set(tokenize(s))]
    return matched or sentences[:1]


def _interleave(sentence_lists: list[list[str]]) -> str:
    """Round-robin merge, first list first."""
    merged = []
    for i in range(max(len(lst) for lst in sentence_lists)):
        for lst in sentence_lists:
            if i < len(lst):
                merged.append(lst[i])
    return " ".join(merged)


@dataclass(frozen=True)
class ExtractiveMockBackend:
    """Offline rewriter built from sentence selection.

    Random mutation keeps the first sentence; controlled mutation keeps
    the query-matching sentences; crossover interleaves each input's
    query-matching sentences, first input first. Fully deterministic, and
    every output sentence appears verbatim in some input.
    """

    name: str = "extractive-mock"

    def rewrite(self, request: RewriteRequest) -> str:
        if request.operator is Operator.RANDOM_MUTATION:
            return split_sentences(request.inputs[0])[0]
        assert request.query is not None
        if request.operator is Operator.CONTROLLED_MUTATION:
            return " ".join(_matching_sentences(request.inputs[0], request.query))
        return _interleave(
            [_matching_sentences(text, request.query) for text in request.inputs]
        )


# Out-of-corpus replacement vocabulary for the noisy backend. Deliberately
# junk tokens so replacements never collide with real corpus or query terms.
_GARBLE = ("zxq", "vrblx", "qwop", "flrm", "snurf", "grelb", "plonk", "wubz")

_WORD_RE = re.compile(r"\S+")


@dataclass(frozen=True)
class NoisyMockBackend:
    """Extractive rewrites corrupted by seeded token replacement.

    Each whitespace token of the extractive output is replaced with a junk
    token with probability ``p``. The RNG is seeded per request from a hash
    of the run seed and the full request, so results are reproducible
    across processes and independent of call order.
    """

    p: float = 0.1
    rng_seed: int = 0
    name: str = "noisy-mock"

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"replacement probability must be in [0,1], got {self.p}")

    def _rng(self, request: RewriteRequest) -> random.Random:
        payload = "\x1f".join(
            [
                str(self.rng_seed),
                f"{self.p!r}",
                request.operator.value,
                request.prompt,
                request.query or "",
                *request.inputs,
            ]
        )
        digest = hashlib.sha256(payload.encode("utf-8")).digest()
        return random.Random(int.from_bytes(digest[:8], "big"))

    def rewrite(self, request: RewriteRequest) -> str:
        base = ExtractiveMockBackend().rewrite(request)
        rng = self._rng(request)
        out = _WORD_RE.sub(
            lambda m: rng.choice(_GARBLE) if rng.random() < self.p else m.group(0),
            base,
        )
        return out


@dataclass(frozen=True)
class IdentityMockBackend:
    """Returns the first input verbatim; drives immediate convergence."""

    name: str = "identity-mock"

    def rewrite(self, request: RewriteRequest) -> str:
        return request.inputs[0]
