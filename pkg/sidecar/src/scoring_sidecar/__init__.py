"""HTTP sidecar serving the engine's scoring contracts.

One process exposes three scoring routes and a health check:
``POST /relevance {query, texts} -> {scores}``,
``POST /verify {claim, evidence} -> {label}``,
``POST /rewrite {prompt, query, documents} -> {text}`` (proxied to an
upstream LLM), and ``GET /healthz``. Model selection is configuration,
not routing: identifiers resolve against a registry at startup, and an
unresolvable identifier stops the process from starting.
"""

from __future__ import annotations

from .config import SidecarConfig, load_config
from .errors import ConfigError, ModelLoadError, SidecarError
from .models import (
    LABELS,
    ModelBundle,
    RelevanceModel,
    VerifierModel,
    load_models,
    load_relevance_model,
    load_verifier_model,
)
from .service import create_app

__all__ = [
    "ConfigError",
    "LABELS",
    "ModelBundle",
    "ModelLoadError",
    "RelevanceModel",
    "SidecarConfig",
    "SidecarError",
    "VerifierModel",
    "create_app",
    "load_config",
    "load_models",
    "load_relevance_model",
    "load_verifier_model",
]

__version__ = "0.1.0"
