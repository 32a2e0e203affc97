"""Run configuration: loading, validation, env overrides, component builders."""

from __future__ import annotations

import pytest

from evoanswer import (
    ConfigError,
    EvolutionConfig,
    ExtractiveMockBackend,
    HttpRelevanceScorer,
    HttpRewriterBackend,
    HttpVerifier,
    IdentityMockBackend,
    LexicalRelevanceScorer,
    NoisyMockBackend,
    RougeMockVerifier,
)
from evoanswer.config import (
    ENV_API_KEY,
    ENV_SIDECAR_URL,
    RunConfig,
    apply_env_overrides,
    build_backend,
    build_judge,
    build_scorer,
    build_verifier,
    load_config,
)


def test_defaults_validate_and_select_mock_components():
    config = RunConfig()
    config.validate()
    assert config.backend == "extractive_mock"
    assert config.scorer == "lexical_mock"
    assert config.verifier == "rouge_mock"
    assert config.judge == "lexical_mock"


def test_config_round_trips_through_dicts():
    config = RunConfig(
        corpus_path="corpus.jsonl",
        queries_path="queries.tsv",
        backend="noisy_mock",
        noise_p=0.3,
        evolution=EvolutionConfig(lambda_=0.5, top_d=3),
    )
    assert RunConfig.from_dict(config.to_dict()) == config


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="mystery"):
        RunConfig.from_dict({"mystery": 1})


def test_from_dict_rejects_unknown_nested_evolution_keys():
    with pytest.raises(ConfigError, match="unknown"):
        RunConfig.from_dict({"evolution": {"lambda": 1.0, "mystery": 5}})


@pytest.mark.parametrize(
    "kwargs, fragment",
    [
        ({"backend": "gpt4"}, "backend"),
        ({"scorer": "bm25"}, "scorer"),
        ({"verifier": "human"}, "verifier"),
        ({"judge": "human"}, "judge"),
        ({"noise_p": 1.5}, "noise_p"),
        ({"scorer_density_power": -1.0}, "scorer_density_power"),
        ({"judge_density_power": -0.5}, "judge_density_power"),
        ({"seed_count": 0}, "seed_count"),
        ({"first_k": 5, "seed_count": 10}, "first_k"),
    ],
)
def test_validation_names_the_offending_knob(kwargs, fragment):
    with pytest.raises(ConfigError, match=fragment):
        RunConfig(**kwargs).validate()


@pytest.mark.parametrize("component", ["backend", "scorer", "verifier", "judge"])
def test_any_http_component_requires_a_sidecar_url(component):
    config = RunConfig(**{component: "http"})
    with pytest.raises(ConfigError, match="sidecar_url"):
        config.validate()
    RunConfig(**{component: "http"}, sidecar_url="http://scorer.test").validate()


def test_env_overrides_replace_url_and_key_only():
    config = RunConfig(sidecar_url="http://file.test", api_key="file-key", noise_p=0.3)
    env = {
        ENV_SIDECAR_URL: "http://env.test",
        ENV_API_KEY: "env-key",
        "EVOANSWER_NOISE_P": "0.9",
    }
    overridden = apply_env_overrides(config, env)
    assert overridden.sidecar_url == "http://env.test"
    assert overridden.api_key == "env-key"
    assert overridden.noise_p == 0.3


def test_env_overrides_ignore_empty_values():
    config = RunConfig(sidecar_url="http://file.test")
    assert apply_env_overrides(config, {ENV_SIDECAR_URL: ""}) == config
    assert apply_env_overrides(config, {}) == config


def test_load_config_without_a_path_returns_defaults():
    assert load_config(None, env={}) == RunConfig()


def test_load_config_reads_json_and_applies_env(tmp_path):
    path = tmp_path / "run.json"
    path.write_text('{"backend": "http", "sidecar_url": "http://file.test"}', encoding="utf-8")
    config = load_config(path, env={ENV_SIDECAR_URL: "http://env.test"})
    assert config.backend == "http"
    assert config.sidecar_url == "http://env.test"


def test_load_config_env_can_satisfy_the_http_url_requirement(tmp_path):
    path = tmp_path / "run.json"
    path.write_text('{"backend": "http"}', encoding="utf-8")
    with pytest.raises(ConfigError, match="sidecar_url"):
        load_config(path, env={})
    config = load_config(path, env={ENV_SIDECAR_URL: "http://env.test"})
    assert config.sidecar_url == "http://env.test"


def test_load_config_rejects_a_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.json", env={})


def test_load_config_rejects_invalid_json(tmp_path):
    path = tmp_path / "run.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(path, env={})


def test_load_config_rejects_a_non_object_document(tmp_path):
    path = tmp_path / "run.json"
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError, match="JSON object"):
        load_config(path, env={})


def test_build_backend_covers_every_kind():
    assert isinstance(build_backend(RunConfig()), ExtractiveMockBackend)
    assert isinstance(build_backend(RunConfig(backend="identity_mock")), IdentityMockBackend)
    noisy = build_backend(
        RunConfig(backend="noisy_mock", noise_p=0.3, evolution=EvolutionConfig(rng_seed=7))
    )
    assert isinstance(noisy, NoisyMockBackend)
    assert noisy.p == 0.3
    assert noisy.rng_seed == 7
    http = build_backend(RunConfig(backend="http", sidecar_url="http://scorer.test"))
    assert isinstance(http, HttpRewriterBackend)


def test_build_scorer_and_judge_use_their_own_density_powers():
    config = RunConfig(scorer_density_power=0.5, judge_density_power=0.25)
    scorer = build_scorer(config)
    judge = build_judge(config)
    assert isinstance(scorer, LexicalRelevanceScorer)
    assert isinstance(judge, LexicalRelevanceScorer)
    assert scorer.density_power == 0.5
    assert judge.density_power == 0.25
    assert scorer.name != judge.name


def test_build_http_scorer_and_verifier():
    config = RunConfig(
        scorer="http", verifier="http", sidecar_url="http://scorer.test", api_key="k"
    )
    assert isinstance(build_scorer(config), HttpRelevanceScorer)
    assert isinstance(build_verifier(config), HttpVerifier)
    assert isinstance(build_verifier(RunConfig()), RougeMockVerifier)
