"""Service configuration: models to load, upstream LLM, bind address.

Config is a JSON object loaded at startup. The upstream URL and API key
can also arrive through the environment (``SIDECAR_UPSTREAM_URL``,
``SIDECAR_UPSTREAM_API_KEY``); the overlay happens before validation, so
a config file may leave the upstream endpoint entirely to the
environment. Everything else lives in the file.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError

DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8700
DEFAULT_MAX_BATCH_SIZE = 16
DEFAULT_TEMPERATURE = 1.0
DEFAULT_TIMEOUT_SECONDS = 30.0

ENV_UPSTREAM_URL = "SIDECAR_UPSTREAM_URL"
ENV_UPSTREAM_API_KEY = "SIDECAR_UPSTREAM_API_KEY"


def _require_str(name: str, value: Any) -> None:
    if not isinstance(value, str) or not value.strip():
        raise ConfigError(f"{name} must be a non-empty string, got {value!r}")


def _require_int(name: str, value: Any, minimum: int, maximum: int) -> None:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if not minimum <= value <= maximum:
        raise ConfigError(f"{name} must be in [{minimum}, {maximum}], got {value}")


def _require_number(name: str, value: Any, minimum: float) -> None:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")


@dataclass(frozen=True)
class SidecarConfig:
    """Static service settings; every response depends only on these and the request."""

    upstream_url: str
    upstream_api_key: str | None = None
    relevance_model: str = "hashed-bilinear-64"
    verifier_model: str = "token-coverage"
    host: str = DEFAULT_HOST
    port: int = DEFAULT_PORT
    max_batch_size: int = DEFAULT_MAX_BATCH_SIZE
    temperature: float = DEFAULT_TEMPERATURE
    timeout_seconds: float = DEFAULT_TIMEOUT_SECONDS

    def __post_init__(self) -> None:
        _require_str("upstream_url", self.upstream_url)
        if self.upstream_api_key is not None:
            _require_str("upstream_api_key", self.upstream_api_key)
        _require_str("relevance_model", self.relevance_model)
        _require_str("verifier_model", self.verifier_model)
        _require_str("host", self.host)
        _require_int("port", self.port, 1, 65535)
        _require_int("max_batch_size", self.max_batch_size, 1, 1_000_000)
        _require_number("temperature", self.temperature, 0.0)
        _require_number("timeout_seconds", self.timeout_seconds, 0.001)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> SidecarConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "upstream_url" not in data:
            raise ConfigError("upstream_url is required")
        return cls(**dict(data))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _env_updates(env: Mapping[str, str]) -> dict[str, str]:
    updates: dict[str, str] = {}
    url = env.get(ENV_UPSTREAM_URL, "")
    if url:
        updates["upstream_url"] = url
    key = env.get(ENV_UPSTREAM_API_KEY, "")
    if key:
        updates["upstream_api_key"] = key
    return updates


def load_config(path: str | Path, env: Mapping[str, str] | None = None) -> SidecarConfig:
    """Read a JSON config file and overlay environment overrides.

    The overlay merges before validation, so the upstream endpoint and
    credentials may come from the environment alone.
    """
    if env is None:
        env = os.environ
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: {err}") from err
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return SidecarConfig.from_dict({**data, **_env_updates(env)})
