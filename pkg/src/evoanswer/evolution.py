"""Evolution loop: spawn offspring, score, select survivors, converge.

Each iteration rewrites the current best candidates through the three
operators, scores every newcomer with the balanced fitness, merges old and
new populations elitist-style, and stops once the top of the ranking stops
moving (or an iteration cap is hit). The whole run is recorded in a trace
that serializes to canonical JSON, so identical inputs produce identical
bytes.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

from .corpus import Document, Query
from .errors import BackendError, ConfigError, IterationStarvationError
from .fitness import (
    FitnessScore,
    GroundingMode,
    RelevanceScorer,
    RougeVariant,
    fitness_batch,
)
from .rewrite import (
    OPCODES,
    Candidate,
    Operator,
    RewriterBackend,
    controlled_mutate,
    crossover,
    random_mutate,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvolutionConfig:
    """Knobs for one evolution run.

    ``top_d`` is the prefix of the ranking whose stability ends the run;
    ``population_cap`` bounds survivors per generation. ``lambda_`` scales
    grounding against relevance in the fitness.
    """

    lambda_: float = 1.0
    rouge_variant: RougeVariant = RougeVariant.ROUGE1
    grounding_mode: GroundingMode = GroundingMode.MAX_OVER_SEEDS
    offspring_per_iteration: int = 12
    parent_count: int = 2
    population_cap: int = 10
    top_d: int = 2
    max_iterations: int = 8
    rng_seed: int = 0
    parallelism: int = 4

    def validate(self) -> None:
        if self.lambda_ < 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lambda_}")
        if self.parent_count < 1:
            raise ConfigError(f"parent_count must be >= 1, got {self.parent_count}")
        if self.offspring_per_iteration < self.parent_count:
            raise ConfigError(
                "offspring_per_iteration must be >= parent_count, got "
                f"{self.offspring_per_iteration} < {self.parent_count}"
            )
        if self.population_cap < self.parent_count:
            raise ConfigError(
                "population_cap must be >= parent_count, got "
                f"{self.population_cap} < {self.parent_count}"
            )
        if not 1 <= self.top_d <= self.population_cap:
            raise ConfigError(
                f"top_d must be in [1, population_cap], got {self.top_d}"
            )
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.parallelism < 1:
            raise ConfigError(f"parallelism must be >= 1, got {self.parallelism}")
        if (
            self.grounding_mode is GroundingMode.UNION_PRECISION_F1
            and self.rouge_variant is RougeVariant.ROUGE_L
        ):
            raise ConfigError("union_precision_f1 grounding requires rouge1 or rouge2")

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda": self.lambda_,
            "rouge_variant": self.rouge_variant.value,
            "grounding_mode": self.grounding_mode.value,
            "offspring_per_iteration": self.offspring_per_iteration,
            "parent_count": self.parent_count,
            "population_cap": self.population_cap,
            "top_d": self.top_d,
            "max_iterations": self.max_iterations,
            "rng_seed": self.rng_seed,
            "parallelism": self.parallelism,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EvolutionConfig:
        known = {
            "lambda",
            "rouge_variant",
            "grounding_mode",
            "offspring_per_iteration",
            "parent_count",
            "population_cap",
            "top_d",
            "max_iterations",
            "rng_seed",
            "parallelism",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown evolution config keys: {sorted(unknown)}")
        kwargs: dict[str, Any] = {}
        if "lambda" in data:
            kwargs["lambda_"] = float(data["lambda"])
        if "rouge_variant" in data:
            kwargs["rouge_variant"] = RougeVariant(data["rouge_variant"])
        if "grounding_mode" in data:
            kwargs["grounding_mode"] = GroundingMode(data["grounding_mode"])
        for key in (
            "offspring_per_iteration",
            "parent_count",
            "population_cap",
            "top_d",
            "max_iterations",
            "rng_seed",
            "parallelism",
        ):
            if key in data:
                kwargs[key] = int(data[key])
        config = cls(**kwargs)
        config.validate()
        return config


def candidate_sort_key(candidate: Candidate) -> tuple[float, float, str]:
    """Ranking order: combined fitness desc, grounding desc, id asc.

    The id tiebreak is total, so equal-fitness populations still rank
    deterministically, and earlier-generation ids win ties by sorting
    first.
    """
    score = candidate.fitness
    if score is None:
        raise ValueError(f"candidate {candidate.candidate_id} has no fitness")
    return (-score.combined, -score.grounding, candidate.candidate_id)


@dataclass
class Generation:
    """One ranked population snapshot."""

    index: int
    population: list[Candidate]

    @property
    def top_ids(self) -> tuple[str, ...]:
        return tuple(c.candidate_id for c in self.population)

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "population": [c.to_dict() for c in self.population],
        }


@dataclass
class EvolutionTrace:
    """Full record of one query's run; serializes to canonical JSON."""

    query_id: str
    query_text: str
    termination_reason: str
    final_answer: str
    config: EvolutionConfig
    generations: list[Generation]

    def to_dict(self) -> dict[str, Any]:
        return {
            "query_id": self.query_id,
            "query_text": self.query_text,
            "termination_reason": self.termination_reason,
            "final_answer": self.final_answer,
            "config": self.config.to_dict(),
            "generations": [g.to_dict() for g in self.generations],
        }

    def to_json(self) -> str:
        # Canonical form: sorted keys, fixed separators, no timestamps.
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EvolutionTrace:
        generations = []
        for gen in data["generations"]:
            population = [_candidate_from_dict(c) for c in gen["population"]]
            generations.append(Generation(index=int(gen["index"]), population=population))
        return cls(
            query_id=data["query_id"],
            query_text=data["query_text"],
            termination_reason=data["termination_reason"],
            final_answer=data["final_answer"],
            config=EvolutionConfig.from_dict(data["config"]),
            generations=generations,
        )

    @classmethod
    def from_json(cls, text: str) -> EvolutionTrace:
        return cls.from_dict(json.loads(text))


def _candidate_from_dict(data: dict[str, Any]) -> Candidate:
    fitness = None
    if data.get("fitness") is not None:
        f = data["fitness"]
        fitness = FitnessScore(
            relevance=float(f["relevance"]),
            grounding=float(f["grounding"]),
            lambda_=float(f["lambda"]),
        )
    operator = Operator(data["operator"]) if data.get("operator") else None
    return Candidate(
        candidate_id=data["id"],
        text=data["text"],
        generation=int(data["generation"]),
        operator=operator,
        parents=tuple(data.get("parents", ())),
        fitness=fitness,
    )


def plan_offspring(parent_count: int, total: int) -> list[tuple[Operator, tuple[int, ...]]]:
    """Assign operators and parent indices to ``total`` offspring slots.

    The budget splits evenly across the three operators, remainder going to
    random mutation first, then controlled. Mutation slots round-robin over
    the parents; crossover slots rotate the parent order so each slot sees
    a different document ordering. With a single parent the crossover share
    folds into the mutations.
    """
    if parent_count < 1:
        raise ValueError("need at least one parent")
    if total < 1:
        raise ValueError("need at least one offspring slot")
    base, rem = divmod(total, 3)
    n_random = base + (1 if rem >= 1 else 0)
    n_controlled = base + (1 if rem >= 2 else 0)
    n_cross = base
    if parent_count < 2:
        n_random += n_cross - n_cross // 2
        n_controlled += n_cross // 2
        n_cross = 0
    slots: list[tuple[Operator, tuple[int, ...]]] = []
    for i in range(n_random):
        slots.append((Operator.RANDOM_MUTATION, (i % parent_count,)))
    for i in range(n_controlled):
        slots.append((Operator.CONTROLLED_MUTATION, (i % parent_count,)))
    order = tuple(range(parent_count))
    for i in range(n_cross):
        k = i % parent_count
        slots.append((Operator.CROSSOVER, order[k:] + order[:k]))
    return slots


def _spawn_slot(
    slot: int,
    operator: Operator,
    parent_indices: tuple[int, ...],
    parents: list[Candidate],
    query: Query,
    backend: RewriterBackend,
    iteration: int,
) -> Candidate:
    candidate_id = f"g{iteration}-{slot:02d}-{OPCODES[operator]}"
    if operator is Operator.RANDOM_MUTATION:
        return random_mutate(backend, parents[parent_indices[0]], candidate_id)
    if operator is Operator.CONTROLLED_MUTATION:
        return controlled_mutate(backend, parents[parent_indices[0]], query.text, candidate_id)
    chosen = tuple(parents[i] for i in parent_indices)
    return crossover(backend, chosen, query.text, candidate_id)


def spawn_offspring(
    parents: list[Candidate],
    query: Query,
    backend: RewriterBackend,
    config: EvolutionConfig,
    iteration: int,
) -> list[Candidate]:
    """Produce one iteration's offspring, in slot order.

    Individual rewrite failures drop their slot with a warning; if every
    slot fails the iteration cannot proceed and starvation is raised.
    """
    slots = plan_offspring(len(parents), config.offspring_per_iteration)
    results: list[Candidate | None] = [None] * len(slots)

    def run(slot: int) -> Candidate:
        operator, parent_indices = slots[slot]
        return _spawn_slot(slot, operator, parent_indices, parents, query, backend, iteration)

    if config.parallelism > 1 and len(slots) > 1:
        with ThreadPoolExecutor(max_workers=min(config.parallelism, len(slots))) as pool:
            futures = [pool.submit(run, slot) for slot in range(len(slots))]
            for slot, future in enumerate(futures):
                try:
                    results[slot] = future.result()
                except BackendError as err:
                    logger.warning("iteration %d slot %d failed: %s", iteration, slot, err)
    else:
        for slot in range(len(slots)):
            try:
                results[slot] = run(slot)
            except BackendError as err:
                logger.warning("iteration %d slot %d failed: %s", iteration, slot, err)

    offspring = [c for c in results if c is not None]
    if not offspring:
        raise IterationStarvationError(
            f"iteration {iteration}: all {len(slots)} rewrites failed"
        )
    return offspring


def select_survivors(
    previous: list[Candidate], offspring: list[Candidate], population_cap: int
) -> list[Candidate]:
    """Elitist merge: pool old and new, rank, keep the best ``cap``.

    A previous-generation candidate is only displaced by strictly fitter
    offspring; on exact ties the earlier id survives. Candidates whose
    text exactly duplicates a better-ranked one are dropped: a clone has
    identical fitness by construction and would only crowd out distinct
    texts, so a backend that returns its input unchanged leaves the
    population unchanged.
    """
    pool = list(previous) + list(offspring)
    pool.sort(key=candidate_sort_key)
    survivors: list[Candidate] = []
    seen_texts = set()
    for candidate in pool:
        if candidate.text in seen_texts:
            continue
        seen_texts.add(candidate.text)
        survivors.append(candidate)
        if len(survivors) == population_cap:
            break
    return survivors


def has_converged(previous: Generation, current: Generation, top_d: int) -> bool:
    """True when the ranked top-d ids are unchanged, order included."""
    return previous.top_ids[:top_d] == current.top_ids[:top_d]


def evolve(
    query: Query,
    seeds: list[Document],
    backend: RewriterBackend,
    scorer: RelevanceScorer,
    config: EvolutionConfig | None = None,
) -> EvolutionTrace:
    """Run the full loop for one query and return its trace.

    ``seeds`` are the retrieved documents in rank order; they form
    generation 0 and stay the grounding reference for every later
    generation. The final answer is the rank-1 candidate of the last
    generation.
    """
    config = config or EvolutionConfig()
    config.validate()
    if not seeds:
        raise ValueError(f"query {query.query_id}: cannot evolve without seeds")

    def score(candidates: list[Candidate]) -> None:
        scores = fitness_batch(
            query,
            [c.text for c in candidates],
            seeds,
            scorer,
            config.rouge_variant,
            config.lambda_,
            config.grounding_mode,
        )
        for candidate, fitness in zip(candidates, scores):
            candidate.fitness = fitness

    seed_candidates = [
        Candidate(candidate_id=f"g0-{doc.doc_id}", text=doc.text, generation=0)
        for doc in seeds
    ]
    score(seed_candidates)
    population = sorted(seed_candidates, key=candidate_sort_key)[: config.population_cap]
    generations = [Generation(index=0, population=population)]

    termination_reason = "iteration_cap"
    for iteration in range(1, config.max_iterations + 1):
        parents = population[: config.parent_count]
        try:
            offspring = spawn_offspring(parents, query, backend, config, iteration)
        except IterationStarvationError as err:
            partial = EvolutionTrace(
                query_id=query.query_id,
                query_text=query.text,
                termination_reason="starved",
                final_answer=population[0].text,
                config=config,
                generations=generations,
            )
            raise IterationStarvationError(str(err), partial_trace=partial) from err
        score(offspring)
        population = select_survivors(population, offspring, config.population_cap)
        current = Generation(index=iteration, population=population)
        generations.append(current)
        if has_converged(generations[-2], current, config.top_d):
            termination_reason = "converged"
            break

    return EvolutionTrace(
        query_id=query.query_id,
        query_text=query.text,
        termination_reason=termination_reason,
        final_answer=generations[-1].population[0].text,
        config=config,
        generations=generations,
    )
