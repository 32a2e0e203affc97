"""Balanced fitness: normalized relevance plus scaled n-gram grounding.

A candidate's fitness is ``relevance + lambda * grounding`` where relevance
comes from a pluggable scorer normalized into [0,1] and grounding is a
ROUGE F1 against the seed documents. Grounding against multiple seeds is
aggregated either as the best per-seed F1 (standard multi-reference ROUGE)
or as a union-bag precision paired with the best per-seed recall, which
credits answers that legitimately draw from several seeds at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Protocol, runtime_checkable

from collections import Counter

from .corpus import Document, Query
from .text import ngrams, split_sentences, tokenize


class RougeVariant(str, Enum):
    ROUGE1 = "rouge1"
    ROUGE2 = "rouge2"
    ROUGE_L = "rougeL"


class GroundingMode(str, Enum):
    MAX_OVER_SEEDS = "max_over_seeds"
    UNION_PRECISION_F1 = "union_precision_f1"


@dataclass(frozen=True)
class FitnessScore:
    """Relevance and grounding components of one candidate's fitness.

    ``combined`` is always ``relevance + lambda_ * grounding`` by
    construction.
    """

    relevance: float
    grounding: float
    lambda_: float

    @property
    def combined(self) -> float:
        return self.relevance + self.lambda_ * self.grounding

    def to_dict(self) -> dict:
        return {
            "relevance": self.relevance,
            "grounding": self.grounding,
            "lambda": self.lambda_,
            "combined": self.combined,
        }


@runtime_checkable
class RelevanceScorer(Protocol):
    """Scores (query, text) pairs; must be deterministic within a run.

    ``name`` identifies the scorer configuration (the evaluation judge must
    differ from the fitness scorer); ``normalization`` says how raw scores
    map into [0,1].
    """

    name: str
    normalization: str

    def score_batch(self, query: str, texts: list[str]) -> list[float]: ...


def _f1(overlap: float, cand_total: int, ref_total: int) -> float:
    if overlap == 0 or cand_total == 0 or ref_total == 0:
        return 0.0
    precision = overlap / cand_total
    recall = overlap / ref_total
    return 2.0 * precision * recall / (precision + recall)


def rouge_n_f1(candidate: list[str], reference: list[str], n: int) -> float:
    """Count-clipped n-gram overlap F1 between two token sequences.

    Returns 0.0 when either side has no n-grams or nothing overlaps.
    Symmetric in its arguments.
    """
    cand_counts = ngrams(candidate, n)
    ref_counts = ngrams(reference, n)
    overlap = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
    return _f1(overlap, sum(cand_counts.values()), sum(ref_counts.values()))


def lcs_length(a: list[str], b: list[str]) -> int:
    """Longest common subsequence length via a rolling-row DP."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for token in a:
        curr = [0] * (len(b) + 1)
        for j, other in enumerate(b, start=1):
            if token == other:
                curr[j] = prev[j - 1] + 1
            else:
                curr[j] = max(prev[j], curr[j - 1])
        prev = curr
    return prev[-1]


def rouge_l_f1(candidate: list[str], reference: list[str]) -> float:
    """Longest-common-subsequence F1 between two token sequences."""
    return _f1(lcs_length(candidate, reference), len(candidate), len(reference))


def union_ngram_precision(candidate: list[str], seed_token_lists: list[list[str]], n: int) -> float:
    """Count-clipped fraction of candidate n-grams present in the union bag
    of all seeds' n-grams. 0.0 when the candidate has no n-grams."""
    cand_counts = ngrams(candidate, n)
    total = sum(cand_counts.values())
    if total == 0:
        return 0.0
    union = ngrams([], n)
    for tokens in seed_token_lists:
        union.update(ngrams(tokens, n))
    matched = sum(min(count, union[gram]) for gram, count in cand_counts.items())
    return matched / total


def _sentence_ngrams(text: str, n: int) -> Counter[tuple[str, ...]]:
    """N-gram bag of a text, counted within sentence boundaries.

    Rewrites assemble answers sentence by sentence, so an n-gram spanning
    two stitched-together sentences is an artifact of concatenation, not
    new content; grounding must not punish (or credit) it.
    """
    counts: Counter[tuple[str, ...]] = Counter()
    for sentence in split_sentences(text):
        counts.update(ngrams(tokenize(sentence), n))
    return counts


def _counts_f1(cand: Counter[tuple[str, ...]], ref: Counter[tuple[str, ...]]) -> float:
    overlap = sum(min(count, ref[gram]) for gram, count in cand.items())
    return _f1(overlap, sum(cand.values()), sum(ref.values()))


def grounding_score(
    candidate: str,
    seeds: list[Document],
    variant: RougeVariant = RougeVariant.ROUGE1,
    mode: GroundingMode = GroundingMode.MAX_OVER_SEEDS,
) -> float:
    """ROUGE grounding of ``candidate`` against the seed documents.

    ``max_over_seeds`` takes the best per-seed F1. ``union_precision_f1``
    pairs the union-bag n-gram precision with the best per-seed recall;
    it is undefined for ROUGE-L, which has no n-gram bag. The n-gram
    variants count within sentences (see ``_sentence_ngrams``); ROUGE-L
    runs over the full token sequences.
    """
    if not seeds:
        raise ValueError("grounding requires at least one seed document")
    if variant is RougeVariant.ROUGE_L:
        if mode is not GroundingMode.MAX_OVER_SEEDS:
            raise ValueError(
                "union_precision_f1 grounding requires an n-gram variant, not rougeL"
            )
        cand_tokens = tokenize(candidate)
        return max(rouge_l_f1(cand_tokens, tokenize(seed.text)) for seed in seeds)
    n = 1 if variant is RougeVariant.ROUGE1 else 2
    cand_counts = _sentence_ngrams(candidate, n)
    seed_counts = [_sentence_ngrams(seed.text, n) for seed in seeds]
    if mode is GroundingMode.MAX_OVER_SEEDS:
        return max(_counts_f1(cand_counts, ref) for ref in seed_counts)
    cand_total = sum(cand_counts.values())
    union: Counter[tuple[str, ...]] = Counter()
    for ref in seed_counts:
        union.update(ref)
    matched = sum(min(count, union[gram]) for gram, count in cand_counts.items())
    precision = matched / cand_total if cand_total else 0.0
    best_recall = 0.0
    for ref in seed_counts:
        ref_total = sum(ref.values())
        if ref_total == 0:
            continue
        overlap = sum(min(count, ref[gram]) for gram, count in cand_counts.items())
        best_recall = max(best_recall, overlap / ref_total)
    if precision == 0.0 or best_recall == 0.0:
        return 0.0
    return 2.0 * precision * best_recall / (precision + best_recall)


def normalize_relevance(raw: float, mode: str = "logistic") -> float:
    """Map a raw scorer output into [0,1].

    ``logistic`` for unbounded cross-encoder logits; ``identity`` clamps,
    for scorers that already emit [0,1].
    """
    if mode == "logistic":
        if raw >= 0:
            return 1.0 / (1.0 + math.exp(-raw))
        # exp(raw) is safe for large negative raw; avoids overflow.
        e = math.exp(raw)
        return e / (1.0 + e)
    if mode == "identity":
        return min(1.0, max(0.0, raw))
    raise ValueError(f"unknown normalization mode {mode!r}")


def fitness_batch(
    query: Query,
    texts: list[str],
    seeds: list[Document],
    scorer: RelevanceScorer,
    variant: RougeVariant,
    lambda_: float,
    mode: GroundingMode = GroundingMode.MAX_OVER_SEEDS,
) -> list[FitnessScore]:
    """Score a batch of candidate texts with one scorer round trip."""
    if lambda_ < 0:
        raise ValueError(f"lambda must be >= 0, got {lambda_}")
    if not seeds:
        raise ValueError("fitness requires at least one seed document")
    if not texts:
        return []
    raw_scores = scorer.score_batch(query.text, texts)
    if len(raw_scores) != len(texts):
        raise ValueError(
            f"scorer returned {len(raw_scores)} scores for {len(texts)} texts"
        )
    results = []
    for text, raw in zip(texts, raw_scores):
        relevance = normalize_relevance(raw, scorer.normalization)
        grounding = grounding_score(text, seeds, variant, mode)
        results.append(FitnessScore(relevance=relevance, grounding=grounding, lambda_=lambda_))
    return results


def fitness(
    query: Query,
    candidate: str,
    seeds: list[Document],
    scorer: RelevanceScorer,
    variant: RougeVariant,
    lambda_: float,
    mode: GroundingMode = GroundingMode.MAX_OVER_SEEDS,
) -> FitnessScore:
    """Balanced fitness of one candidate text."""
    return fitness_batch(query, [candidate], seeds, scorer, variant, lambda_, mode)[0]


@dataclass(frozen=True)
class LexicalRelevanceScorer:
    """Deterministic offline relevance: query coverage scaled by how densely
    the text sticks to query terms.

    score = coverage * density ** density_power, all in [0,1]. Different
    ``density_power`` values give distinct scorer identities, which lets the
    evaluation judge differ from the fitness scorer.
    """

    density_power: float = 0.5
    normalization: str = "identity"

    @property
    def name(self) -> str:
        return f"lexical-mock-p{self.density_power:g}"

    def score_batch(self, query: str, texts: list[str]) -> list[float]:
        query_terms = set(tokenize(query))
        scores = []
        for text in texts:
            tokens = tokenize(text)
            if not query_terms or not tokens:
                scores.append(0.0)
                continue
            hits = [t for t in tokens if t in query_terms]
            coverage = len(set(hits)) / len(query_terms)
            density = len(hits) / len(tokens)
            scores.append(coverage * density**self.density_power)
        return scores
