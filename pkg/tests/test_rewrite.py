"""Rewrite operators, request plumbing, and the mock backends."""

from __future__ import annotations

from dataclasses import dataclass

import pytest

from evoanswer import (
    BackendError,
    Candidate,
    ExtractiveMockBackend,
    IdentityMockBackend,
    NoisyMockBackend,
    Operator,
    PROMPTS,
    RewriteRequest,
    controlled_mutate,
    crossover,
    make_request,
    random_mutate,
    render_request,
    tokenize,
)
from evoanswer.fitness import union_ngram_precision
from evoanswer.rewrite import call_backend

SEED_A = Candidate("g0-a", "Cats purr. Dogs bark.", 0)
SEED_B = Candidate("g0-b", "Cats nap. Fish swim.", 0)


def test_operator_prompts_are_fixed_strings():
    assert PROMPTS[Operator.RANDOM_MUTATION] == "Summarize the document"
    assert PROMPTS[Operator.CONTROLLED_MUTATION] == "Re-write the document to better answer the query"
    assert PROMPTS[Operator.CROSSOVER] == "Re-write the given documents to better answer the query"


def test_request_crossover_needs_two_inputs():
    with pytest.raises(ValueError, match="at least 2"):
        make_request(Operator.CROSSOVER, "q", ("only one",))


def test_request_mutations_take_exactly_one_input():
    with pytest.raises(ValueError, match="exactly 1"):
        make_request(Operator.RANDOM_MUTATION, None, ("a", "b"))


def test_request_query_directed_operators_require_a_query():
    with pytest.raises(ValueError, match="query"):
        make_request(Operator.CONTROLLED_MUTATION, None, ("text",))
    with pytest.raises(ValueError, match="query"):
        make_request(Operator.CROSSOVER, None, ("a", "b"))


def test_request_random_mutation_is_query_blind():
    with pytest.raises(ValueError, match="does not take a query"):
        RewriteRequest(
            operator=Operator.RANDOM_MUTATION,
            prompt=PROMPTS[Operator.RANDOM_MUTATION],
            query="q",
            inputs=("text",),
        )


def test_request_inputs_must_be_nonempty():
    with pytest.raises(ValueError, match="non-empty"):
        make_request(Operator.CONTROLLED_MUTATION, "q", ("   ",))


def test_render_request_layout_for_crossover():
    request = make_request(Operator.CROSSOVER, "cats", ("Cats purr.", "Cats nap."))
    assert render_request(request) == (
        "Re-write the given documents to better answer the query"
        "\n\nQuery: cats"
        "\n\nDocument 1: Cats purr."
        "\n\nDocument 2: Cats nap."
    )


def test_render_request_omits_the_query_line_for_random_mutation():
    request = make_request(Operator.RANDOM_MUTATION, None, ("Cats purr.",))
    assert render_request(request) == "Summarize the document\n\nDocument 1: Cats purr."


def test_random_mutate_summarizes_to_the_first_sentence():
    child = random_mutate(ExtractiveMockBackend(), SEED_A, "g1-00-rnd")
    assert child.text == "Cats purr."
    assert child.generation == 1
    assert child.operator is Operator.RANDOM_MUTATION
    assert child.parents == ("g0-a",)


def test_controlled_mutate_keeps_query_matching_sentences():
    child = controlled_mutate(ExtractiveMockBackend(), SEED_A, "cats", "g1-04-ctl")
    assert child.text == "Cats purr."


def test_controlled_mutate_falls_back_to_the_first_sentence():
    child = controlled_mutate(ExtractiveMockBackend(), SEED_A, "volcano", "g1-04-ctl")
    assert child.text == "Cats purr."


def test_crossover_interleaves_matching_sentences_first_input_first():
    a = Candidate("g0-a", "Cats purr.", 0)
    b = Candidate("g0-b", "Cats nap.", 0)
    child = crossover(ExtractiveMockBackend(), (a, b), "cats", "g1-08-xov")
    assert child.text == "Cats purr. Cats nap."
    assert child.parents == ("g0-a", "g0-b")


def test_crossover_requires_at_least_two_parents():
    with pytest.raises(ValueError, match="at least 2"):
        crossover(ExtractiveMockBackend(), (SEED_A,), "cats", "g1-08-xov")


def test_child_generation_is_one_past_the_deepest_parent():
    deep = Candidate("g2-01-ctl", "Cats nap.", 2, operator=Operator.CONTROLLED_MUTATION, parents=("g0-b",))
    child = crossover(ExtractiveMockBackend(), (SEED_A, deep), "cats", "g3-02-xov")
    assert child.generation == 3


def test_seed_candidates_take_no_operator_or_parents():
    with pytest.raises(ValueError):
        Candidate("g0-x", "text", 0, operator=Operator.RANDOM_MUTATION, parents=("p",))
    with pytest.raises(ValueError):
        Candidate("g1-x", "text", 1)


def test_extractive_output_sentences_appear_verbatim_in_some_input():
    child = crossover(ExtractiveMockBackend(), (SEED_A, SEED_B), "cats fish", "g1-08-xov")
    sources = {SEED_A.text, SEED_B.text}
    for sentence in child.text.split(". "):
        sentence = sentence if sentence.endswith(".") else sentence + "."
        assert any(sentence in source for source in sources)


def test_identity_backend_returns_the_first_input():
    request = make_request(Operator.CROSSOVER, "cats", ("Cats purr.", "Cats nap."))
    assert IdentityMockBackend().rewrite(request) == "Cats purr."


def test_noisy_backend_with_zero_noise_is_extractive():
    noisy = NoisyMockBackend(p=0.0, rng_seed=7)
    clean = ExtractiveMockBackend()
    for request in (
        make_request(Operator.RANDOM_MUTATION, None, (SEED_A.text,)),
        make_request(Operator.CONTROLLED_MUTATION, "cats", (SEED_A.text,)),
        make_request(Operator.CROSSOVER, "cats", (SEED_A.text, SEED_B.text)),
    ):
        assert noisy.rewrite(request) == clean.rewrite(request)


def test_noisy_backend_with_full_noise_shares_nothing_with_the_inputs():
    request = make_request(Operator.CROSSOVER, "cats", (SEED_A.text, SEED_B.text))
    garbled = NoisyMockBackend(p=1.0, rng_seed=3).rewrite(request)
    seed_tokens = [tokenize(SEED_A.text), tokenize(SEED_B.text)]
    assert union_ngram_precision(tokenize(garbled), seed_tokens, 1) == 0.0


def test_noisy_backend_is_deterministic_per_request():
    request = make_request(Operator.CONTROLLED_MUTATION, "cats", (SEED_A.text,))
    first = NoisyMockBackend(p=0.5, rng_seed=11)
    second = NoisyMockBackend(p=0.5, rng_seed=11)
    assert first.rewrite(request) == first.rewrite(request) == second.rewrite(request)


def test_noisy_backend_validates_probability():
    with pytest.raises(ValueError):
        NoisyMockBackend(p=1.5)


@dataclass
class FlakyBackend:
    """Fails the first ``failures`` calls with a retryable error."""

    failures: int
    retryable: bool = True
    calls: int = 0
    name: str = "flaky"

    def rewrite(self, request: RewriteRequest) -> str:
        self.calls += 1
        if self.calls <= self.failures:
            raise BackendError("transient", retryable=self.retryable)
        return "recovered"


@dataclass
class EmptyBackend:
    name: str = "empty"

    def rewrite(self, request: RewriteRequest) -> str:
        return "   "


def test_call_backend_retries_transient_failures_with_backoff(monkeypatch):
    delays: list[float] = []
    monkeypatch.setattr("evoanswer.rewrite.time.sleep", delays.append)
    backend = FlakyBackend(failures=2)
    request = make_request(Operator.RANDOM_MUTATION, None, ("Cats purr.",))
    assert call_backend(backend, request, retries=2) == "recovered"
    assert backend.calls == 3
    assert delays == [0.25, 0.5]


def test_call_backend_raises_after_exhausting_retries(monkeypatch):
    monkeypatch.setattr("evoanswer.rewrite.time.sleep", lambda _: None)
    backend = FlakyBackend(failures=10)
    request = make_request(Operator.RANDOM_MUTATION, None, ("Cats purr.",))
    with pytest.raises(BackendError):
        call_backend(backend, request, retries=2)
    assert backend.calls == 3


def test_call_backend_does_not_retry_contract_violations():
    backend = FlakyBackend(failures=10, retryable=False)
    request = make_request(Operator.RANDOM_MUTATION, None, ("Cats purr.",))
    with pytest.raises(BackendError):
        call_backend(backend, request, retries=2)
    assert backend.calls == 1


def test_empty_backend_output_is_an_error_and_yields_no_child():
    with pytest.raises(BackendError, match="empty"):
        random_mutate(EmptyBackend(), SEED_A, "g1-00-rnd")
