"""Embedded scoring models and the registry that loads them by identifier.

Every implementation is a pure function of its inputs, so responses are
reproducible across processes and the service stays stateless. Real
neural checkpoints slot in behind the same registry: an identifier either
resolves to a loadable model at startup or the process refuses to start.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

from .errors import ModelLoadError

_TOKEN_RE = re.compile(r"[a-z0-9]+")

# Verdict vocabulary, spelled exactly as it travels over HTTP.
LABEL_SUPPORTS = "SUPPORTS"
LABEL_REFUTES = "REFUTES"
LABEL_NOT_ENOUGH_INFO = "NOT ENOUGH INFO"
LABELS = (LABEL_SUPPORTS, LABEL_REFUTES, LABEL_NOT_ENOUGH_INFO)

NEGATION_MARKERS = frozenset({"no", "not", "never", "cannot", "neither", "nor"})

SUPPORT_THRESHOLD = 0.6

_BILINEAR_PREFIX = "hashed-bilinear-"


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@runtime_checkable
class RelevanceModel(Protocol):
    name: str

    def score(self, query: str, texts: Sequence[str]) -> list[float]: ...


@runtime_checkable
class VerifierModel(Protocol):
    name: str

    def classify(self, claim: str, evidence: Sequence[str]) -> str: ...


@dataclass(frozen=True)
class HashedBilinearModel:
    """Cross-encoder stand-in: feature-hashed bag embeddings under a dot product.

    Scores are raw logits in [-scale, scale]; normalization is the
    client's business.
    """

    name: str
    dim: int
    scale: float = 4.0

    def _embed(self, text: str) -> list[float]:
        vec = [0.0] * self.dim
        for token in tokenize(text):
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            index = int.from_bytes(digest[:4], "big") % self.dim
            sign = 1.0 if digest[4] % 2 == 0 else -1.0
            vec[index] += sign
        norm = math.sqrt(sum(v * v for v in vec))
        if norm == 0.0:
            return vec
        return [v / norm for v in vec]

    def score(self, query: str, texts: Sequence[str]) -> list[float]:
        q = self._embed(query)
        return [
            self.scale * sum(a * b for a, b in zip(q, self._embed(text)))
            for text in texts
        ]


@dataclass(frozen=True)
class TokenOverlapModel:
    """Lexical stand-in: query-vocabulary coverage mapped to a logit in [-scale, scale]."""

    name: str
    scale: float = 4.0

    def score(self, query: str, texts: Sequence[str]) -> list[float]:
        wanted = set(tokenize(query))
        scores: list[float] = []
        for text in texts:
            if not wanted:
                scores.append(0.0)
                continue
            fraction = len(wanted & set(tokenize(text))) / len(wanted)
            scores.append(self.scale * (2.0 * fraction - 1.0))
        return scores


@dataclass(frozen=True)
class TokenCoverageVerifier:
    """Entailment stand-in: content-token coverage decides support; a
    negation-marker mismatch between claim and evidence flips it to a
    refutation."""

    name: str
    support_threshold: float = SUPPORT_THRESHOLD

    def classify(self, claim: str, evidence: Sequence[str]) -> str:
        claim_tokens = tokenize(claim)
        content = [t for t in claim_tokens if t not in NEGATION_MARKERS]
        if not content:
            return LABEL_NOT_ENOUGH_INFO
        pooled: set[str] = set()
        for text in evidence:
            pooled.update(tokenize(text))
        coverage = sum(1 for t in content if t in pooled) / len(content)
        if coverage < self.support_threshold:
            return LABEL_NOT_ENOUGH_INFO
        claim_negations = {t for t in claim_tokens if t in NEGATION_MARKERS}
        if claim_negations != pooled & NEGATION_MARKERS:
            return LABEL_REFUTES
        return LABEL_SUPPORTS


@dataclass(frozen=True)
class ModelBundle:
    relevance: RelevanceModel
    verifier: VerifierModel


def load_relevance_model(identifier: str) -> RelevanceModel:
    if identifier == "token-overlap":
        return TokenOverlapModel(name=identifier)
    if identifier.startswith(_BILINEAR_PREFIX):
        suffix = identifier[len(_BILINEAR_PREFIX) :]
        if not suffix.isdigit() or int(suffix) < 1:
            raise ModelLoadError(
                f"bad embedding width in relevance model {identifier!r}"
            )
        return HashedBilinearModel(name=identifier, dim=int(suffix))
    raise ModelLoadError(f"unknown relevance model {identifier!r}")


def load_verifier_model(identifier: str) -> VerifierModel:
    if identifier == "token-coverage":
        return TokenCoverageVerifier(name=identifier)
    raise ModelLoadError(f"unknown verifier model {identifier!r}")


def load_models(relevance_identifier: str, verifier_identifier: str) -> ModelBundle:
    return ModelBundle(
        relevance=load_relevance_model(relevance_identifier),
        verifier=load_verifier_model(verifier_identifier),
    )
