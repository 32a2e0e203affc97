"""HTTP backends for rewriting, relevance scoring, and verification.

All three speak to a scoring service over the same small JSON contract:
``POST /rewrite {prompt, query, documents} -> {text}``,
``POST /relevance {query, texts} -> {scores}``, and
``POST /verify {claim, evidence} -> {label}``. Transport failures are
retried with exponential backoff; any non-200 response or malformed body
is a backend error with the status attached.
"""

from __future__ import annotations

import time

import httpx

from .errors import BackendError
from .evaluation import Verdict
from .rewrite import RewriteRequest

DEFAULT_TIMEOUT_SECONDS = 30.0
DEFAULT_RETRIES = 2
DEFAULT_BACKOFF_SECONDS = 0.25


class _JsonEndpointClient:
    """Shared POST-with-retry plumbing for the three endpoint clients."""

    def __init__(
        self,
        base_url: str,
        api_key: str | None = None,
        timeout: float = DEFAULT_TIMEOUT_SECONDS,
        retries: int = DEFAULT_RETRIES,
        backoff_seconds: float = DEFAULT_BACKOFF_SECONDS,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        if not base_url:
            raise ValueError("base_url is required")
        headers = {}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._retries = retries
        self._backoff = backoff_seconds
        self._client = httpx.Client(
            base_url=base_url, headers=headers, timeout=timeout, transport=transport
        )
        self.base_url = base_url

    def close(self) -> None:
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def _post(self, path: str, payload: dict) -> dict:
        attempt = 0
        while True:
            try:
                response = self._client.post(path, json=payload)
            except httpx.TransportError as err:
                if attempt >= self._retries:
                    raise BackendError(
                        f"{path}: transport failure after {attempt + 1} attempts: {err}"
                    ) from err
                time.sleep(self._backoff * (2**attempt))
                attempt += 1
                continue
            if response.status_code != 200:
                raise BackendError(
                    f"{path}: HTTP {response.status_code}: {response.text[:200]}",
                    status=response.status_code,
                )
            try:
                body = response.json()
            except ValueError as err:
                raise BackendError(f"{path}: response is not JSON") from err
            if not isinstance(body, dict):
                raise BackendError(f"{path}: response is not a JSON object")
            return body


class HttpRewriterBackend(_JsonEndpointClient):
    """Rewriter backed by the service's ``/rewrite`` endpoint."""

    @property
    def name(self) -> str:
        return f"http-rewriter:{self.base_url}"

    def rewrite(self, request: RewriteRequest) -> str:
        body = self._post(
            "/rewrite",
            {
                "prompt": request.prompt,
                "query": request.query,
                "documents": list(request.inputs),
            },
        )
        text = body.get("text")
        if not isinstance(text, str):
            raise BackendError("/rewrite: response missing string field 'text'")
        return text


class HttpRelevanceScorer(_JsonEndpointClient):
    """Relevance scorer backed by ``/relevance``.

    Raw scores are whatever model the service hosts; ``normalization``
    says how the engine maps them into [0,1] (cross-encoder logits want
    ``logistic``).
    """

    def __init__(self, *args, normalization: str = "logistic", **kwargs) -> None:
        super().__init__(*args, **kwargs)
        self.normalization = normalization

    @property
    def name(self) -> str:
        return f"http-scorer:{self.base_url}"

    def score_batch(self, query: str, texts: list[str]) -> list[float]:
        if not texts:
            return []
        body = self._post("/relevance", {"query": query, "texts": list(texts)})
        scores = body.get("scores")
        if not isinstance(scores, list) or not all(
            isinstance(s, (int, float)) for s in scores
        ):
            raise BackendError("/relevance: response missing numeric list 'scores'")
        if len(scores) != len(texts):
            raise BackendError(
                f"/relevance: got {len(scores)} scores for {len(texts)} texts"
            )
        return [float(s) for s in scores]


class HttpVerifier(_JsonEndpointClient):
    """Grounding verifier backed by ``/verify``."""

    @property
    def name(self) -> str:
        return f"http-verifier:{self.base_url}"

    def verify(self, claim: str, evidence: list[str]) -> Verdict:
        body = self._post("/verify", {"claim": claim, "evidence": list(evidence)})
        label = body.get("label")
        try:
            return Verdict(label)
        except ValueError:
            raise BackendError(f"/verify: unknown verdict label {label!r}") from None
