"""Upstream model backends.

The stub backend makes the pipeline testable end-to-end: given the same
seed, prompt and count it always emits the same corpus picks, so
scenario tests and the demo are reproducible. The HTTP backend forwards
to a real upstream service.
"""

from __future__ import annotations

import hashlib
import random
from typing import Protocol

import httpx

from ..errors import TransportError


class ModelBackend(Protocol):
    def generate(self, model_id: str, prompt: str, n: int) -> list[str]: ...


class StubBackend:
    """Deterministic sampler over a configured sequence corpus."""

    def __init__(self, corpus: list[str], seed: int = 0):
        if not corpus:
            raise ValueError("stub backend needs a non-empty corpus")
        self.corpus = list(corpus)
        self.seed = seed

    def generate(self, model_id: str, prompt: str, n: int) -> list[str]:
        material = f"{self.seed}:{model_id}:{prompt}".encode("utf-8")
        rng = random.Random(int.from_bytes(hashlib.sha256(material).digest()[:8], "big"))
        start = rng.randrange(len(self.corpus))
        return [self.corpus[(start + i) % len(self.corpus)] for i in range(n)]


class HttpBackend:
    """Thin client for a live upstream generation service."""

    def __init__(self, url: str, timeout: float = 30.0):
        self.url = url.rstrip("/")
        self._client = httpx.Client(timeout=timeout)

    def generate(self, model_id: str, prompt: str, n: int) -> list[str]:
        try:
            resp = self._client.post(
                f"{self.url}/generate",
                json={"model_id": model_id, "prompt": prompt, "n": n})
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            raise TransportError(f"backend unreachable: {exc}")
        return list(resp.json()["sequences"])


class FailingBackend:
    """Test double that always fails, for fail-closed pipeline checks."""

    def generate(self, model_id: str, prompt: str, n: int) -> list[str]:
        raise TransportError("injected backend fault")
