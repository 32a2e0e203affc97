"""Shared fixtures: config factory and an app client over a fake upstream."""

from __future__ import annotations

import json

import httpx
import pytest
from fastapi.testclient import TestClient

from scoring_sidecar import SidecarConfig, create_app

UPSTREAM_URL = "http://upstream.test/rewrite"


def build_config(**overrides) -> SidecarConfig:
    settings = {"upstream_url": UPSTREAM_URL, "max_batch_size": 4, "temperature": 0.7}
    settings.update(overrides)
    return SidecarConfig(**settings)


def echo_transport() -> httpx.MockTransport:
    def handler(request: httpx.Request) -> httpx.Response:
        payload = json.loads(request.content.decode("utf-8"))
        return httpx.Response(200, json={"text": " ".join(payload["documents"])})

    return httpx.MockTransport(handler)


@pytest.fixture()
def make_config():
    return build_config


@pytest.fixture()
def client():
    app = create_app(build_config(), upstream_transport=echo_transport())
    with TestClient(app) as test_client:
        yield test_client
