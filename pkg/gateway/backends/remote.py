"""
This module contains the HTTP backends: hosted chat APIs and a local Ollama-style runtime.
"""

import logging
import os
import time
from typing import Any, Dict, Optional, Tuple

import httpx

from gateway.backends.base import ModelBackend
from gateway.errors import (
    AuthMissingError,
    ContextOverflowError,
    ProviderError,
    TransientProviderError,
)
from gateway.models import ApiStyle, BackendResponse, FaultLocTask, ModelSpec

logger = logging.getLogger(__name__)

TRANSIENT_STATUS = frozenset({408, 409, 425, 429, 500, 502, 503, 504, 529})
OVERFLOW_HINTS = ("context length", "context_length", "too many tokens", "prompt is too long")
ANTHROPIC_VERSION = "2023-06-01"


def _raise_for_status(response: httpx.Response, model_name: str) -> None:
    if response.status_code < 400:
        return
    body = response.text[:300]
    if response.status_code in TRANSIENT_STATUS:
        raise TransientProviderError(f"{model_name}: HTTP {response.status_code}: {body}")
    if response.status_code in (400, 413) and any(h in body.lower() for h in OVERFLOW_HINTS):
        raise ContextOverflowError(f"{model_name}: prompt exceeds the context window: {body}")
    raise ProviderError(f"{model_name}: HTTP {response.status_code}: {body}")


class HttpBackend(ModelBackend):
    """
    Shared plumbing for JSON-over-HTTP backends. A client can be injected for tests.
    """

    def __init__(self, spec: ModelSpec, client: Optional[httpx.AsyncClient] = None) -> None:
        super().__init__(spec)
        self._client = client or httpx.AsyncClient(timeout=spec.timeout_s)
        self._owns_client = client is None

    def _url(self) -> str:
        return str(self.spec.endpoint)

    def _headers(self) -> Dict[str, str]:
        return {"Content-Type": "application/json"}

    def _payload(self, prompt: str) -> Dict[str, Any]:
        raise NotImplementedError

    def _reply(self, data: Dict[str, Any]) -> Tuple[str, Optional[int], Optional[int]]:
        raise NotImplementedError

    async def complete(self, prompt: str, task: Optional[FaultLocTask] = None) -> BackendResponse:
        start = time.monotonic()
        try:
            response = await self._client.post(
                self._url(), json=self._payload(prompt), headers=self._headers()
            )
        except httpx.TransportError as e:
            raise TransientProviderError(f"{self.name}: {type(e).__name__}: {e}")
        latency_ms = int((time.monotonic() - start) * 1000)
        _raise_for_status(response, self.name)
        try:
            text, prompt_tokens, completion_tokens = self._reply(response.json())
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise ProviderError(f"{self.name}: unexpected response body: {e}")
        return BackendResponse(text, prompt_tokens, completion_tokens, latency_ms)

    async def aclose(self) -> None:
        if self._owns_client:
            await self._client.aclose()


class RemoteApiBackend(HttpBackend):
    """
    Hosted chat APIs in OpenAI chat-completions or Anthropic messages style.
    """

    def __init__(self, spec: ModelSpec, client: Optional[httpx.AsyncClient] = None) -> None:
        if not spec.credential_env:
            raise AuthMissingError(f"Profile '{spec.model_name}' names no credential_env.")
        key = os.environ.get(spec.credential_env)
        if not key:
            raise AuthMissingError(
                f"Environment variable '{spec.credential_env}' for '{spec.model_name}' is unset."
            )
        super().__init__(spec, client)
        self._key = key

    def _headers(self) -> Dict[str, str]:
        headers = super()._headers()
        if self.spec.api_style == ApiStyle.anthropic_messages:
            headers["x-api-key"] = self._key
            headers["anthropic-version"] = ANTHROPIC_VERSION
        elif self.spec.auth_header.lower() == "authorization":
            headers["Authorization"] = f"Bearer {self._key}"
        else:
            headers[self.spec.auth_header] = self._key
        return headers

    def _payload(self, prompt: str) -> Dict[str, Any]:
        return {
            "model": self.spec.remote_model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.spec.temperature,
            "max_tokens": self.spec.max_output_tokens,
        }

    def _reply(self, data: Dict[str, Any]) -> Tuple[str, Optional[int], Optional[int]]:
        usage = data.get("usage") or {}
        if self.spec.api_style == ApiStyle.anthropic_messages:
            text = "".join(
                block.get("text", "") for block in data["content"] if block.get("type") == "text"
            )
            return text, usage.get("input_tokens"), usage.get("output_tokens")
        text = data["choices"][0]["message"]["content"] or ""
        return text, usage.get("prompt_tokens"), usage.get("completion_tokens")


class LocalRuntimeBackend(HttpBackend):
    """
    Models served by a local Ollama-style runtime through its /api/generate endpoint.
    """

    def _url(self) -> str:
        return str(self.spec.endpoint).rstrip("/") + "/api/generate"

    def _payload(self, prompt: str) -> Dict[str, Any]:
        return {
            "model": self.spec.remote_model,
            "prompt": prompt,
            "stream": False,
            "options": {
                "temperature": self.spec.temperature,
                "num_predict": self.spec.max_output_tokens,
            },
        }

    def _reply(self, data: Dict[str, Any]) -> Tuple[str, Optional[int], Optional[int]]:
        if "error" in data:
            raise ValueError(data["error"])
        return data["response"], data.get("prompt_eval_count"), data.get("eval_count")
