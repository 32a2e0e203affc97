"""Run configuration: one JSON document that selects and parameterizes
every pluggable component.

Mock components need no network; selecting any ``http`` component requires
a service base URL. The base URL and API credential can also come from the
environment (``EVOANSWER_SIDECAR_URL``, ``EVOANSWER_API_KEY``), which wins
over the file so deployments can rewire a checked-in config without
editing it.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .clients import HttpRelevanceScorer, HttpRewriterBackend, HttpVerifier
from .errors import ConfigError
from .evaluation import GroundingVerifier, RougeMockVerifier
from .evolution import EvolutionConfig
from .fitness import LexicalRelevanceScorer, RelevanceScorer
from .rewrite import (
    ExtractiveMockBackend,
    IdentityMockBackend,
    NoisyMockBackend,
    RewriterBackend,
)

ENV_SIDECAR_URL = "EVOANSWER_SIDECAR_URL"
ENV_API_KEY = "EVOANSWER_API_KEY"

BACKEND_KINDS = ("extractive_mock", "noisy_mock", "identity_mock", "http")
SCORER_KINDS = ("lexical_mock", "http")
VERIFIER_KINDS = ("rouge_mock", "http")


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs beyond the corpus and queries.

    ``judge`` picks the evaluation-time relevance scorer; it defaults to a
    different configuration than the fitness ``scorer`` so preference
    results are not judged by the same model that drove the search.
    """

    corpus_path: str | None = None
    queries_path: str | None = None
    backend: str = "extractive_mock"
    scorer: str = "lexical_mock"
    verifier: str = "rouge_mock"
    judge: str = "lexical_mock"
    noise_p: float = 0.1
    scorer_density_power: float = 0.5
    judge_density_power: float = 0.25
    sidecar_url: str | None = None
    api_key: str | None = None
    first_k: int = 100
    seed_count: int = 10
    output_dir: str = "runs"
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)

    def validate(self) -> None:
        if self.backend not in BACKEND_KINDS:
            raise ConfigError(f"unknown backend {self.backend!r}, expected one of {BACKEND_KINDS}")
        if self.scorer not in SCORER_KINDS:
            raise ConfigError(f"unknown scorer {self.scorer!r}, expected one of {SCORER_KINDS}")
        if self.verifier not in VERIFIER_KINDS:
            raise ConfigError(
                f"unknown verifier {self.verifier!r}, expected one of {VERIFIER_KINDS}"
            )
        if self.judge not in SCORER_KINDS:
            raise ConfigError(f"unknown judge {self.judge!r}, expected one of {SCORER_KINDS}")
        if not 0.0 <= self.noise_p <= 1.0:
            raise ConfigError(f"noise_p must be in [0,1], got {self.noise_p}")
        for label, power in (
            ("scorer_density_power", self.scorer_density_power),
            ("judge_density_power", self.judge_density_power),
        ):
            if power < 0:
                raise ConfigError(f"{label} must be >= 0, got {power}")
        if self.seed_count < 1:
            raise ConfigError(f"seed_count must be >= 1, got {self.seed_count}")
        if self.first_k < self.seed_count:
            raise ConfigError(
                f"first_k must be >= seed_count, got {self.first_k} < {self.seed_count}"
            )
        needs_url = "http" in (self.backend, self.scorer, self.verifier, self.judge)
        if needs_url and not self.sidecar_url:
            raise ConfigError("an http component is selected but sidecar_url is not set")
        self.evolution.validate()

    def to_dict(self) -> dict[str, Any]:
        return {
            "corpus_path": self.corpus_path,
            "queries_path": self.queries_path,
            "backend": self.backend,
            "scorer": self.scorer,
            "verifier": self.verifier,
            "judge": self.judge,
            "noise_p": self.noise_p,
            "scorer_density_power": self.scorer_density_power,
            "judge_density_power": self.judge_density_power,
            "sidecar_url": self.sidecar_url,
            "api_key": self.api_key,
            "first_k": self.first_k,
            "seed_count": self.seed_count,
            "output_dir": self.output_dir,
            "evolution": self.evolution.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        known = {
            "corpus_path",
            "queries_path",
            "backend",
            "scorer",
            "verifier",
            "judge",
            "noise_p",
            "scorer_density_power",
            "judge_density_power",
            "sidecar_url",
            "api_key",
            "first_k",
            "seed_count",
            "output_dir",
            "evolution",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs: dict[str, Any] = {}
        for key in ("backend", "scorer", "verifier", "judge", "output_dir"):
            if key in data:
                kwargs[key] = str(data[key])
        for key in ("noise_p", "scorer_density_power", "judge_density_power"):
            if key in data:
                kwargs[key] = float(data[key])
        for key in ("first_k", "seed_count"):
            if key in data:
                kwargs[key] = int(data[key])
        for key in ("corpus_path", "queries_path", "sidecar_url", "api_key"):
            if key in data and data[key] is not None:
                kwargs[key] = str(data[key])
        if "evolution" in data:
            kwargs["evolution"] = EvolutionConfig.from_dict(data["evolution"])
        config = cls(**kwargs)
        config.validate()
        return config

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _env_updates(env: dict[str, str] | None) -> dict[str, str]:
    env = os.environ if env is None else env
    updates: dict[str, str] = {}
    if env.get(ENV_SIDECAR_URL):
        updates["sidecar_url"] = env[ENV_SIDECAR_URL]
    if env.get(ENV_API_KEY):
        updates["api_key"] = env[ENV_API_KEY]
    return updates


def apply_env_overrides(config: RunConfig, env: dict[str, str] | None = None) -> RunConfig:
    """Overlay the two supported environment overrides, if present."""
    updates = _env_updates(env)
    return replace(config, **updates) if updates else config


def load_config(path: str | Path | None, env: dict[str, str] | None = None) -> RunConfig:
    """Read a config file (or start from defaults) and apply env overrides.

    The overlay happens before validation, so a config that selects http
    components may leave the service URL to the environment.
    """
    if path is None:
        data: dict[str, Any] = {}
    else:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as err:
            raise ConfigError(f"cannot read config {path}: {err}") from err
        except json.JSONDecodeError as err:
            raise ConfigError(f"config {path} is not valid JSON: {err}") from err
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must be a JSON object")
    return RunConfig.from_dict({**data, **_env_updates(env)})


def build_backend(config: RunConfig) -> RewriterBackend:
    if config.backend == "extractive_mock":
        return ExtractiveMockBackend()
    if config.backend == "noisy_mock":
        return NoisyMockBackend(p=config.noise_p, rng_seed=config.evolution.rng_seed)
    if config.backend == "identity_mock":
        return IdentityMockBackend()
    assert config.sidecar_url is not None
    return HttpRewriterBackend(config.sidecar_url, api_key=config.api_key)


def build_scorer(config: RunConfig) -> RelevanceScorer:
    if config.scorer == "lexical_mock":
        return LexicalRelevanceScorer(density_power=config.scorer_density_power)
    assert config.sidecar_url is not None
    return HttpRelevanceScorer(config.sidecar_url, api_key=config.api_key)


def build_judge(config: RunConfig) -> RelevanceScorer:
    if config.judge == "lexical_mock":
        return LexicalRelevanceScorer(density_power=config.judge_density_power)
    assert config.sidecar_url is not None
    return HttpRelevanceScorer(config.sidecar_url, api_key=config.api_key)


def build_verifier(config: RunConfig) -> GroundingVerifier:
    if config.verifier == "rouge_mock":
        return RougeMockVerifier()
    assert config.sidecar_url is not None
    return HttpVerifier(config.sidecar_url, api_key=config.api_key)
