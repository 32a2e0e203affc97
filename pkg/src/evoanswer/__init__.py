"""Evolve grounded answers from retrieved documents.

Retrieval seeds a small population of documents for each query; LLM-style
rewrite operators mutate and recombine them; a balanced fitness (relevance
plus scaled n-gram grounding against the seeds) selects survivors until
the top of the ranking stabilizes.
"""

from .clients import HttpRelevanceScorer, HttpRewriterBackend, HttpVerifier
from .corpus import Document, Query, ingest_corpus, load_queries, write_corpus
from .errors import (
    AlignmentError,
    BackendError,
    ConfigError,
    CorpusFormatError,
    DuplicateIdError,
    EmptyCorpusError,
    EvoAnswerError,
    IterationStarvationError,
)
from .evaluation import (
    EvalReport,
    GroundingVerifier,
    PreferenceOutcome,
    QueryEvaluation,
    RougeMockVerifier,
    Verdict,
    accuracy,
    classify_grounding,
    emit_report,
    evaluate_traces,
    pairwise_preference,
    parse_tsv_aggregates,
)
from .evolution import (
    EvolutionConfig,
    EvolutionTrace,
    Generation,
    evolve,
    has_converged,
    plan_offspring,
    select_survivors,
    spawn_offspring,
)
from .fitness import (
    FitnessScore,
    GroundingMode,
    LexicalRelevanceScorer,
    RelevanceScorer,
    RougeVariant,
    fitness,
    fitness_batch,
    grounding_score,
    normalize_relevance,
    rouge_l_f1,
    rouge_n_f1,
)
from .retrieval import (
    InvertedIndex,
    ScoredDoc,
    bm25_search,
    bm25_term_weight,
    build_index,
    load_index,
    save_index,
    seed_population,
)
from .rewrite import (
    PROMPTS,
    Candidate,
    ExtractiveMockBackend,
    IdentityMockBackend,
    NoisyMockBackend,
    Operator,
    RewriteRequest,
    RewriterBackend,
    controlled_mutate,
    crossover,
    make_request,
    random_mutate,
    render_request,
)
from .text import ngrams, split_sentences, tokenize

__all__ = [
    "AlignmentError",
    "BackendError",
    "Candidate",
    "ConfigError",
    "CorpusFormatError",
    "Document",
    "DuplicateIdError",
    "EmptyCorpusError",
    "EvalReport",
    "EvoAnswerError",
    "EvolutionConfig",
    "EvolutionTrace",
    "ExtractiveMockBackend",
    "FitnessScore",
    "Generation",
    "GroundingMode",
    "GroundingVerifier",
    "HttpRelevanceScorer",
    "HttpRewriterBackend",
    "HttpVerifier",
    "IdentityMockBackend",
    "InvertedIndex",
    "IterationStarvationError",
    "LexicalRelevanceScorer",
    "NoisyMockBackend",
    "Operator",
    "PROMPTS",
    "PreferenceOutcome",
    "Query",
    "QueryEvaluation",
    "RelevanceScorer",
    "RewriteRequest",
    "RewriterBackend",
    "RougeMockVerifier",
    "RougeVariant",
    "ScoredDoc",
    "Verdict",
    "accuracy",
    "bm25_search",
    "bm25_term_weight",
    "build_index",
    "classify_grounding",
    "controlled_mutate",
    "crossover",
    "emit_report",
    "evaluate_traces",
    "evolve",
    "fitness",
    "fitness_batch",
    "grounding_score",
    "has_converged",
    "ingest_corpus",
    "load_index",
    "load_queries",
    "make_request",
    "ngrams",
    "normalize_relevance",
    "pairwise_preference",
    "parse_tsv_aggregates",
    "plan_offspring",
    "random_mutate",
    "render_request",
    "rouge_l_f1",
    "rouge_n_f1",
    "save_index",
    "seed_population",
    "select_survivors",
    "spawn_offspring",
    "split_sentences",
    "tokenize",
    "write_corpus",
]
