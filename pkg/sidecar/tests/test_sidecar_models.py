"""The model registry and the embedded scoring implementations."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from scoring_sidecar import (
    LABELS,
    ModelLoadError,
    load_models,
    load_relevance_model,
    load_verifier_model,
)
from scoring_sidecar.models import (
    LABEL_NOT_ENOUGH_INFO,
    LABEL_REFUTES,
    LABEL_SUPPORTS,
    HashedBilinearModel,
    TokenCoverageVerifier,
    TokenOverlapModel,
)

words = st.text(alphabet="abcdefg ", min_size=1, max_size=30)


def test_registry_loads_the_bilinear_family():
    model = load_relevance_model("hashed-bilinear-64")
    assert isinstance(model, HashedBilinearModel)
    assert model.name == "hashed-bilinear-64"
    assert model.dim == 64


def test_registry_loads_token_overlap():
    model = load_relevance_model("token-overlap")
    assert isinstance(model, TokenOverlapModel)
    assert model.name == "token-overlap"


def test_registry_loads_the_coverage_verifier():
    model = load_verifier_model("token-coverage")
    assert isinstance(model, TokenCoverageVerifier)
    assert model.name == "token-coverage"


@pytest.mark.parametrize(
    "identifier",
    ["electra-base", "hashed-bilinear-", "hashed-bilinear-abc", "hashed-bilinear-0", ""],
)
def test_unresolvable_relevance_identifiers_refuse_to_load(identifier):
    with pytest.raises(ModelLoadError, match="relevance model"):
        load_relevance_model(identifier)


def test_unresolvable_verifier_identifier_refuses_to_load():
    with pytest.raises(ModelLoadError, match="albert-base"):
        load_verifier_model("albert-base")


def test_bundle_carries_both_models():
    bundle = load_models("token-overlap", "token-coverage")
    assert bundle.relevance.name == "token-overlap"
    assert bundle.verifier.name == "token-coverage"


def test_bilinear_identical_bags_score_at_scale():
    model = load_relevance_model("hashed-bilinear-256")
    [score] = model.score("cats purr", ["cats purr"])
    assert score == pytest.approx(4.0)


def test_bilinear_ranks_matching_text_above_disjoint_text():
    model = load_relevance_model("hashed-bilinear-256")
    matching, disjoint = model.score(
        "cats purr", ["cats purr softly", "granite erodes slowly"]
    )
    assert matching > disjoint


def test_bilinear_is_a_bag_of_words():
    model = load_relevance_model("hashed-bilinear-256")
    forward, shuffled = model.score("cats purr", ["cats purr loudly", "loudly purr cats"])
    assert forward == pytest.approx(shuffled)


def test_bilinear_empty_token_text_scores_zero():
    model = load_relevance_model("hashed-bilinear-64")
    assert model.score("cats", ["!!!"]) == [0.0]


def test_overlap_full_coverage_is_the_top_logit():
    model = load_relevance_model("token-overlap")
    assert model.score("cats purr", ["cats purr softly"]) == [4.0]


def test_overlap_no_coverage_is_the_bottom_logit():
    model = load_relevance_model("token-overlap")
    assert model.score("cats purr", ["granite erodes"]) == [-4.0]


def test_overlap_half_coverage_is_the_midpoint():
    model = load_relevance_model("token-overlap")
    assert model.score("cats purr", ["cats"]) == [0.0]


def test_overlap_empty_query_scores_zero():
    model = load_relevance_model("token-overlap")
    assert model.score("!!!", ["cats"]) == [0.0]


@given(query=words, texts=st.lists(words, min_size=1, max_size=6))
def test_scores_align_with_texts_and_repeat_exactly(query, texts):
    for identifier in ("hashed-bilinear-32", "token-overlap"):
        model = load_relevance_model(identifier)
        scores = model.score(query, texts)
        assert len(scores) == len(texts)
        assert scores == model.score(query, texts)


@given(query=words, texts=st.lists(words, min_size=2, max_size=6))
def test_scores_depend_only_on_the_individual_text(query, texts):
    model = load_relevance_model("hashed-bilinear-32")
    whole = model.score(query, texts)
    singles = [model.score(query, [text])[0] for text in texts]
    assert whole == singles


def test_verbatim_claim_is_supported():
    verifier = load_verifier_model("token-coverage")
    assert verifier.classify("cats purr", ["cats purr when content"]) == LABEL_SUPPORTS


def test_negated_claim_is_refuted():
    verifier = load_verifier_model("token-coverage")
    assert verifier.classify("cats never purr", ["cats purr when content"]) == LABEL_REFUTES


def test_negated_evidence_refutes_a_positive_claim():
    verifier = load_verifier_model("token-coverage")
    assert verifier.classify("cats purr", ["cats never purr"]) == LABEL_REFUTES


def test_matching_negations_support():
    verifier = load_verifier_model("token-coverage")
    assert (
        verifier.classify("cats never purr", ["cats never purr indoors"])
        == LABEL_SUPPORTS
    )


def test_off_topic_claim_is_undecidable():
    verifier = load_verifier_model("token-coverage")
    assert (
        verifier.classify("volcanoes erupt basalt", ["cats purr when content"])
        == LABEL_NOT_ENOUGH_INFO
    )


def test_coverage_pools_across_evidence_texts():
    verifier = load_verifier_model("token-coverage")
    assert (
        verifier.classify("cats purr softly", ["cats purr", "softly padding cats"])
        == LABEL_SUPPORTS
    )


def test_all_negation_claim_is_undecidable():
    verifier = load_verifier_model("token-coverage")
    assert verifier.classify("never not", ["cats purr"]) == LABEL_NOT_ENOUGH_INFO


def test_support_threshold_boundary():
    verifier = TokenCoverageVerifier(name="token-coverage")
    covered_three_of_five = verifier.classify(
        "ants bees crows dogs emus", ["ants bees crows"]
    )
    covered_two_of_five = verifier.classify("ants bees crows dogs emus", ["ants bees"])
    assert covered_three_of_five == LABEL_SUPPORTS
    assert covered_two_of_five == LABEL_NOT_ENOUGH_INFO


@given(claim=words, evidence=st.lists(words, min_size=1, max_size=4))
def test_labels_always_come_from_the_vocabulary(claim, evidence):
    verifier = load_verifier_model("token-coverage")
    assert verifier.classify(claim, evidence) in LABELS
