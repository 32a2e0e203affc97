"""Answer evaluation: grounding verdicts, pairwise preference, reports.

Final answers are judged two ways. A grounding verifier classifies each
answer against its seed evidence as supported, refuted, or undecidable. A
relevance judge compares the final answer with the run's baseline (the
rank-1 seed before any evolution) and records which one it prefers. The
judge must not be the scorer that drove the evolution, or the comparison
is circular; that case is flagged.

Reports aggregate one run into a table row: SUPPORTS/NEI/REFUTES counts
with accuracy, preference counts, and a separate tally of queries that
could not be evaluated.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Protocol, runtime_checkable

from .errors import AlignmentError, BackendError
from .evolution import EvolutionTrace
from .fitness import RelevanceScorer, normalize_relevance, union_ngram_precision
from .text import tokenize

logger = logging.getLogger(__name__)

DEFAULT_PREFERENCE_EPSILON = 0.01


class Verdict(str, Enum):
    """Grounding verdict labels, spelled exactly as they travel over HTTP."""

    SUPPORTS = "SUPPORTS"
    REFUTES = "REFUTES"
    NOT_ENOUGH_INFO = "NOT ENOUGH INFO"


class PreferenceOutcome(str, Enum):
    """Judge comparison of the model answer against the retrieval baseline,
    rendered as +/=/- in reports."""

    MODEL_PREFERRED = "+"
    EQUIVALENT = "="
    BASELINE_PREFERRED = "-"


@runtime_checkable
class GroundingVerifier(Protocol):
    """Classifies a claim against evidence texts."""

    name: str

    def verify(self, claim: str, evidence: list[str]) -> Verdict: ...


# Tokens the mock verifier reads as explicit contradiction markers.
DEFAULT_CONTRADICTION_LEXICON = frozenset(
    {"not", "no", "never", "false", "wrong", "incorrect", "deny", "denies", "refuted"}
)


@dataclass(frozen=True)
class RougeMockVerifier:
    """Deterministic offline verifier.

    A claim whose unigrams all appear in the evidence union is SUPPORTS;
    otherwise a contradiction-marker token makes it REFUTES, and anything
    else is NOT ENOUGH INFO.
    """

    contradiction_lexicon: frozenset[str] = DEFAULT_CONTRADICTION_LEXICON
    name: str = "rouge-mock-verifier"

    def verify(self, claim: str, evidence: list[str]) -> Verdict:
        claim_tokens = tokenize(claim)
        evidence_tokens = [tokenize(text) for text in evidence]
        if union_ngram_precision(claim_tokens, evidence_tokens, 1) == 1.0:
            return Verdict.SUPPORTS
        if self.contradiction_lexicon & set(claim_tokens):
            return Verdict.REFUTES
        return Verdict.NOT_ENOUGH_INFO


def classify_grounding(verifier: GroundingVerifier, answer: str, evidence: list[str]) -> Verdict:
    """Verdict for one answer against its seed evidence, in rank order."""
    if not evidence:
        raise ValueError("grounding classification requires evidence texts")
    return verifier.verify(answer, evidence)


def pairwise_preference(
    judge: RelevanceScorer,
    query_text: str,
    model_answer: str,
    baseline: str,
    epsilon: float = DEFAULT_PREFERENCE_EPSILON,
) -> tuple[PreferenceOutcome, float, float]:
    """Compare two answers under the judge; ties within ``epsilon``.

    Returns the outcome plus both normalized judge scores, model answer
    first.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    if not model_answer.strip() or not baseline.strip():
        raise ValueError("pairwise preference requires two non-empty texts")
    raw = judge.score_batch(query_text, [model_answer, baseline])
    model_score = normalize_relevance(raw[0], judge.normalization)
    baseline_score = normalize_relevance(raw[1], judge.normalization)
    delta = model_score - baseline_score
    if delta > epsilon:
        outcome = PreferenceOutcome.MODEL_PREFERRED
    elif delta < -epsilon:
        outcome = PreferenceOutcome.BASELINE_PREFERRED
    else:
        outcome = PreferenceOutcome.EQUIVALENT
    return outcome, model_score, baseline_score


def accuracy(verdicts: list[Verdict]) -> float:
    """Fraction of verdicts that are SUPPORTS."""
    if not verdicts:
        raise ValueError("accuracy is undefined for an empty verdict list")
    return sum(1 for v in verdicts if v is Verdict.SUPPORTS) / len(verdicts)


@dataclass(frozen=True)
class QueryEvaluation:
    """Evaluation row for one query."""

    query_id: str
    verdict: Verdict
    preference: PreferenceOutcome
    model_score: float
    baseline_score: float
    final_answer: str
    baseline_answer: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "query_id": self.query_id,
            "verdict": self.verdict.value,
            "preference": self.preference.value,
            "model_score": self.model_score,
            "baseline_score": self.baseline_score,
            "final_answer": self.final_answer,
            "baseline_answer": self.baseline_answer,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> QueryEvaluation:
        return cls(
            query_id=data["query_id"],
            verdict=Verdict(data["verdict"]),
            preference=PreferenceOutcome(data["preference"]),
            model_score=float(data["model_score"]),
            baseline_score=float(data["baseline_score"]),
            final_answer=data["final_answer"],
            baseline_answer=data["baseline_answer"],
        )


@dataclass
class EvalReport:
    """One run's evaluation: per-query rows plus aggregate counts.

    ``unevaluated`` lists query ids with no trace or with a persistent
    verifier/judge failure; they are excluded from every aggregate.
    """

    judge_name: str
    verifier_name: str
    epsilon: float
    rows: list[QueryEvaluation]
    unevaluated: list[str]
    label: str = "run"

    @property
    def sup_count(self) -> int:
        return sum(1 for r in self.rows if r.verdict is Verdict.SUPPORTS)

    @property
    def nei_count(self) -> int:
        return sum(1 for r in self.rows if r.verdict is Verdict.NOT_ENOUGH_INFO)

    @property
    def ref_count(self) -> int:
        return sum(1 for r in self.rows if r.verdict is Verdict.REFUTES)

    @property
    def plus_count(self) -> int:
        return sum(1 for r in self.rows if r.preference is PreferenceOutcome.MODEL_PREFERRED)

    @property
    def equal_count(self) -> int:
        return sum(1 for r in self.rows if r.preference is PreferenceOutcome.EQUIVALENT)

    @property
    def minus_count(self) -> int:
        return sum(1 for r in self.rows if r.preference is PreferenceOutcome.BASELINE_PREFERRED)

    @property
    def accuracy(self) -> float:
        if not self.rows:
            return 0.0
        return accuracy([row.verdict for row in self.rows])

    @property
    def preferred_rate(self) -> float:
        if not self.rows:
            return 0.0
        return self.plus_count / len(self.rows)

    def aggregates(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "evaluated": len(self.rows),
            "sup": self.sup_count,
            "nei": self.nei_count,
            "ref": self.ref_count,
            "accuracy": round(self.accuracy, 3),
            "plus": self.plus_count,
            "equal": self.equal_count,
            "minus": self.minus_count,
            "unevaluated": len(self.unevaluated),
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "judge": self.judge_name,
            "verifier": self.verifier_name,
            "epsilon": self.epsilon,
            "rows": [row.to_dict() for row in self.rows],
            "unevaluated": list(self.unevaluated),
            "summary": self.aggregates(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EvalReport:
        return cls(
            label=data.get("label", "run"),
            judge_name=data["judge"],
            verifier_name=data["verifier"],
            epsilon=float(data["epsilon"]),
            rows=[QueryEvaluation.from_dict(row) for row in data["rows"]],
            unevaluated=list(data["unevaluated"]),
        )


def evaluate_traces(
    traces: list[EvolutionTrace],
    judge: RelevanceScorer,
    verifier: GroundingVerifier,
    expected_query_ids: list[str] | None = None,
    fitness_scorer_name: str | None = None,
    epsilon: float = DEFAULT_PREFERENCE_EPSILON,
    label: str = "run",
) -> EvalReport:
    """Build the evaluation report for a set of run traces.

    The baseline for each query is the rank-1 candidate of generation 0,
    i.e. what retrieval alone would have answered; the evidence is the
    full seed population in rank order. Duplicate traces, or traces for
    queries outside ``expected_query_ids``, are alignment errors naming
    the query id. Expected queries with no trace, and queries whose
    verifier or judge failed, land in the unevaluated list.
    """
    if fitness_scorer_name is not None and judge.name == fitness_scorer_name:
        logger.warning(
            "judge %r is the same scorer that drove evolution; "
            "preference results will be circular",
            judge.name,
        )
    seen: dict[str, EvolutionTrace] = {}
    for trace in traces:
        if trace.query_id in seen:
            raise AlignmentError(f"duplicate trace for query {trace.query_id!r}")
        seen[trace.query_id] = trace
    if expected_query_ids is not None:
        expected = list(dict.fromkeys(expected_query_ids))
        if len(expected) != len(expected_query_ids):
            raise AlignmentError("expected query ids contain duplicates")
        unexpected = sorted(set(seen) - set(expected))
        if unexpected:
            raise AlignmentError(f"trace for unknown query {unexpected[0]!r}")
        ordered = [qid for qid in expected if qid in seen]
        unevaluated = [qid for qid in expected if qid not in seen]
    else:
        ordered = sorted(seen)
        unevaluated = []

    rows = []
    for qid in ordered:
        trace = seen[qid]
        gen0 = trace.generations[0]
        if not gen0.population:
            raise AlignmentError(f"trace for query {qid!r} has an empty generation 0")
        evidence = [c.text for c in gen0.population]
        baseline = gen0.population[0].text
        try:
            verdict = classify_grounding(verifier, trace.final_answer, evidence)
            outcome, model_score, baseline_score = pairwise_preference(
                judge, trace.query_text, trace.final_answer, baseline, epsilon
            )
        except BackendError as err:
            logger.warning("query %s left unevaluated: %s", qid, err)
            unevaluated.append(qid)
            continue
        rows.append(
            QueryEvaluation(
                query_id=qid,
                verdict=verdict,
                preference=outcome,
                model_score=model_score,
                baseline_score=baseline_score,
                final_answer=trace.final_answer,
                baseline_answer=baseline,
            )
        )
    return EvalReport(
        label=label,
        judge_name=judge.name,
        verifier_name=verifier.name,
        epsilon=epsilon,
        rows=rows,
        unevaluated=unevaluated,
    )


_TSV_COLUMNS = (
    "label",
    "evaluated",
    "sup",
    "nei",
    "ref",
    "accuracy",
    "plus",
    "equal",
    "minus",
    "unevaluated",
)


def emit_report(report: EvalReport, format: str = "json") -> str:
    """Serialize a report as ``json``, ``tsv``, or ``markdown``.

    JSON is canonical and round-trips through ``EvalReport.from_dict``.
    TSV and Markdown render the aggregate table row (verdict counts,
    accuracy, preference counts); Markdown adds the per-query detail.
    """
    if format == "json":
        return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
    agg = report.aggregates()
    if format == "tsv":
        header = "\t".join(_TSV_COLUMNS)
        row = "\t".join(
            f"{agg[col]:.3f}" if col == "accuracy" else str(agg[col])
            for col in _TSV_COLUMNS
        )
        return header + "\n" + row + "\n"
    if format == "markdown":
        lines = [
            "# Evaluation report",
            "",
            f"- Judge: `{report.judge_name}`",
            f"- Verifier: `{report.verifier_name}`",
            f"- Tie margin: {report.epsilon}",
            "",
            "| label | evaluated | Sup | NEI | Ref | Acc | + | = | - | unevaluated |",
            "| --- | --- | --- | --- | --- | --- | --- | --- | --- | --- |",
            f"| {agg['label']} | {agg['evaluated']} | {agg['sup']} | {agg['nei']} "
            f"| {agg['ref']} | {agg['accuracy']:.3f} | {agg['plus']} | {agg['equal']} "
            f"| {agg['minus']} | {agg['unevaluated']} |",
        ]
        if report.rows:
            lines += [
                "",
                "## Per-query detail",
                "",
                "| query | verdict | preference | model | baseline |",
                "| --- | --- | --- | --- | --- |",
            ]
            for row in report.rows:
                lines.append(
                    f"| {row.query_id} | {row.verdict.value} | {row.preference.value} "
                    f"| {row.model_score:.4f} | {row.baseline_score:.4f} |"
                )
        if report.unevaluated:
            lines += ["", "## Unevaluated queries", ""]
            for qid in report.unevaluated:
                lines.append(f"- {qid}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {format!r}")


def parse_tsv_aggregates(text: str) -> dict[str, Any]:
    """Parse a TSV report back into its aggregate values."""
    lines = [line for line in text.splitlines() if line]
    if len(lines) != 2 or lines[0].split("\t") != list(_TSV_COLUMNS):
        raise ValueError("not a report TSV")
    values = lines[1].split("\t")
    parsed: dict[str, Any] = {}
    for col, value in zip(_TSV_COLUMNS, values):
        if col == "label":
            parsed[col] = value
        elif col == "accuracy":
            parsed[col] = float(value)
        else:
            parsed[col] = int(value)
    return parsed
