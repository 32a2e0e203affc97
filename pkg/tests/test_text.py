"""Tokenization, n-gram counting, and sentence splitting."""

from __future__ import annotations

from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from evoanswer import ngrams, split_sentences, tokenize


def test_tokenize_lowercases_and_drops_punctuation():
    assert tokenize("Cats purr!") == ["cats", "purr"]


def test_tokenize_empty_string():
    assert tokenize("") == []


def test_tokenize_splits_on_nonalphanumeric_runs():
    assert tokenize("GPT-3 wins") == ["gpt", "3", "wins"]


def test_tokenize_treats_underscore_as_a_separator():
    assert tokenize("snake_case") == ["snake", "case"]


def test_tokenize_stemming_is_off_by_default():
    assert tokenize("jumping dogs") == ["jumping", "dogs"]
    assert tokenize("jumping dogs", stem=True) == ["jump", "dog"]


def test_ngrams_counts_unigrams_with_multiplicity():
    assert ngrams(["a", "b", "a"], 1) == Counter({("a",): 2, ("b",): 1})


def test_ngrams_counts_bigrams():
    assert ngrams(["a", "b", "c"], 2) == Counter({("a", "b"): 1, ("b", "c"): 1})


def test_ngrams_of_a_too_short_sequence_is_empty():
    assert ngrams(["a"], 2) == Counter()


def test_ngrams_rejects_order_below_one():
    with pytest.raises(ValueError):
        ngrams(["a", "b"], 0)


@given(st.text(max_size=80))
def test_tokenize_is_stable_under_rejoining(text):
    tokens = tokenize(text)
    assert tokenize(" ".join(tokens)) == tokens


@given(
    st.lists(st.sampled_from(["a", "b", "c", "d"]), max_size=30),
    st.integers(min_value=1, max_value=5),
)
def test_ngrams_total_count(tokens, n):
    assert sum(ngrams(tokens, n).values()) == max(0, len(tokens) - n + 1)


def test_split_sentences_keeps_terminal_punctuation():
    assert split_sentences("Cats purr. Dogs bark!") == ["Cats purr.", "Dogs bark!"]


def test_split_sentences_on_blank_input():
    assert split_sentences("   ") == []


def test_split_sentences_without_a_final_stop():
    assert split_sentences("one sentence, no stop") == ["one sentence, no stop"]
