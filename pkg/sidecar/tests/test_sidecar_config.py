"""Config validation, JSON loading, and the environment overlay."""

from __future__ import annotations

import json

import pytest

from scoring_sidecar import ConfigError, SidecarConfig, load_config
from scoring_sidecar.config import ENV_UPSTREAM_API_KEY, ENV_UPSTREAM_URL

URL = "http://127.0.0.1:8800/rewrite"


def test_minimal_config_validates():
    config = SidecarConfig(upstream_url=URL)
    assert config.relevance_model == "hashed-bilinear-64"
    assert config.verifier_model == "token-coverage"
    assert config.max_batch_size >= 1
    assert config.upstream_api_key is None


def test_dict_round_trip():
    config = SidecarConfig(upstream_url=URL, port=9001, temperature=0.2)
    assert SidecarConfig.from_dict(config.to_dict()) == config


def test_unknown_key_is_rejected():
    with pytest.raises(ConfigError, match="mystery"):
        SidecarConfig.from_dict({"upstream_url": URL, "mystery": 1})


def test_missing_upstream_url_is_rejected():
    with pytest.raises(ConfigError, match="upstream_url"):
        SidecarConfig.from_dict({"port": 9001})


@pytest.mark.parametrize(
    ("field", "value"),
    [
        ("upstream_url", ""),
        ("upstream_api_key", ""),
        ("relevance_model", ""),
        ("verifier_model", "   "),
        ("host", ""),
        ("port", 0),
        ("port", 65536),
        ("port", True),
        ("max_batch_size", 0),
        ("temperature", -0.1),
        ("timeout_seconds", 0.0),
    ],
)
def test_bad_values_name_the_offending_field(field, value):
    settings: dict = {"upstream_url": URL, field: value}
    with pytest.raises(ConfigError, match=field):
        SidecarConfig(**settings)


def test_load_config_reads_json(tmp_path):
    path = tmp_path / "sidecar.json"
    path.write_text(json.dumps({"upstream_url": URL, "port": 9001}), encoding="utf-8")
    config = load_config(path, env={})
    assert config.port == 9001
    assert config.upstream_url == URL


def test_env_overrides_url_and_key_only(tmp_path):
    path = tmp_path / "sidecar.json"
    path.write_text(
        json.dumps({"upstream_url": URL, "upstream_api_key": "file-key", "port": 9001}),
        encoding="utf-8",
    )
    env = {
        ENV_UPSTREAM_URL: "http://other:8900/rewrite",
        ENV_UPSTREAM_API_KEY: "env-key",
        "SIDECAR_PORT": "1234",
    }
    config = load_config(path, env=env)
    assert config.upstream_url == "http://other:8900/rewrite"
    assert config.upstream_api_key == "env-key"
    assert config.port == 9001


def test_env_alone_can_supply_the_upstream_url(tmp_path):
    path = tmp_path / "sidecar.json"
    path.write_text("{}", encoding="utf-8")
    config = load_config(path, env={ENV_UPSTREAM_URL: URL})
    assert config.upstream_url == URL


def test_empty_env_values_are_ignored(tmp_path):
    path = tmp_path / "sidecar.json"
    path.write_text(json.dumps({"upstream_url": URL}), encoding="utf-8")
    config = load_config(path, env={ENV_UPSTREAM_URL: "", ENV_UPSTREAM_API_KEY: ""})
    assert config.upstream_url == URL
    assert config.upstream_api_key is None


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.json", env={})


def test_invalid_json_is_a_config_error(tmp_path):
    path = tmp_path / "sidecar.json"
    path.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(path, env={})


def test_non_object_document_is_a_config_error(tmp_path):
    path = tmp_path / "sidecar.json"
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError, match="JSON object"):
        load_config(path, env={})
