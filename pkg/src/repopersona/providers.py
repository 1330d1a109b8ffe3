"""Completion and image providers, call accounting, and the retry seam.

Every engine talks to providers through :class:`Completer`, which owns the
retry policy, the concurrent-request cap, and the call ledger. The mock
provider replays fixture files keyed on (stage, hash of substituted
placeholder values), which makes full pipeline runs deterministic and
offline.
"""

from __future__ import annotations

import json
import math
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Protocol

from .errors import ParseError, ProviderError
from .parsing import parse_stage_output
from .prompts import PromptBundle
from .util import stable_hash, to_rfc3339, utcnow

REPAIR_INSTRUCTION = "Return only valid JSON matching the requested format."


@dataclass(frozen=True)
class ProviderCall:
    """One provider round trip, recorded for every attempt including retries."""

    stage: str
    call_type: str  # text | image
    input_tokens: int
    output_tokens: int
    succeeded: bool
    latency_s: float
    job_id: str | None = None
    at: datetime = field(default_factory=utcnow)

    def to_json(self) -> dict[str, Any]:
        return {
            "stage": self.stage,
            "call_type": self.call_type,
            "input_tokens": self.input_tokens,
            "output_tokens": self.output_tokens,
            "succeeded": self.succeeded,
            "latency_s": self.latency_s,
            "job_id": self.job_id,
            "at": to_rfc3339(self.at),
        }


class CallLedger:
    """Thread-safe record of every provider call, with optional persistence."""

    def __init__(self, sink: Callable[[ProviderCall], None] | None = None) -> None:
        self._calls: list[ProviderCall] = []
        self._lock = threading.Lock()
        self._sink = sink

    def record(self, call: ProviderCall) -> None:
        with self._lock:
            self._calls.append(call)
        if self._sink is not None:
            self._sink(call)

    def calls(self, *, job_id: str | None = None, call_type: str | None = None) -> list[ProviderCall]:
        with self._lock:
            snapshot = list(self._calls)
        if job_id is not None:
            snapshot = [c for c in snapshot if c.job_id == job_id]
        if call_type is not None:
            snapshot = [c for c in snapshot if c.call_type == call_type]
        return snapshot

    def count(self, **filters: str | None) -> int:
        return len(self.calls(**filters))

    def cost(self, price_per_input_token: float, price_per_output_token: float) -> float:
        total = 0.0
        for call in self.calls(call_type="text"):
            total += call.input_tokens * price_per_input_token
            total += call.output_tokens * price_per_output_token
        return total


def estimate_tokens(text: str) -> int:
    return max(1, math.ceil(len(text) / 4))


class TransientProviderFailure(ProviderError):
    """Retryable failure (timeout, flaky upstream); the policy retries once."""


class TextProvider(Protocol):
    name: str

    def complete(self, bundle: PromptBundle) -> str: ...


class ImageProvider(Protocol):
    name: str

    def generate(self, prompt: str) -> str: ...


class MockTextProvider:
    """Replays completions from a fixture directory; misses are errors.

    Fixture file format: one JSON file per key of the shape
    ``{"stage": ..., "key": ..., "response_text": ...}``.
    """

    name = "mock"

    def __init__(self, fixtures_dir: str | Path) -> None:
        self.fixtures_dir = Path(fixtures_dir)

    def fixture_path(self, stage: str, key: str) -> Path:
        return self.fixtures_dir / f"{stage}__{key}.json"

    def complete(self, bundle: PromptBundle) -> str:
        path = self.fixture_path(bundle.stage, bundle.context_key)
        if not path.is_file():
            raise ProviderError(
                f"no fixture for stage={bundle.stage} key={bundle.context_key}"
            )
        payload = json.loads(path.read_text(encoding="utf-8"))
        return payload["response_text"]


class RecordingTextProvider(MockTextProvider):
    """Mock provider that writes missing fixtures from scripted responses.

    Used by the fixture-refresh tool: ``script`` maps a stage to either one
    response or a callable that receives the rendered bundle and returns the
    response text.
    """

    name = "recording"

    def __init__(
        self,
        fixtures_dir: str | Path,
        script: dict[str, str | Callable[[PromptBundle], str]],
    ) -> None:
        super().__init__(fixtures_dir)
        self.script = script

    def complete(self, bundle: PromptBundle) -> str:
        path = self.fixture_path(bundle.stage, bundle.context_key)
        if path.is_file():
            return json.loads(path.read_text(encoding="utf-8"))["response_text"]
        handler = self.script.get(bundle.stage)
        if handler is None:
            raise ProviderError(f"no scripted response for stage {bundle.stage}")
        text = handler(bundle) if callable(handler) else handler
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            json.dumps(
                {"stage": bundle.stage, "key": bundle.context_key, "response_text": text},
                indent=2,
                ensure_ascii=False,
            )
            + "\n",
            encoding="utf-8",
        )
        return text


class ScriptedTextProvider:
    """In-memory provider for tests: responses keyed by stage, in order."""

    name = "scripted"

    def __init__(self, responses: dict[str, list[str]]) -> None:
        self._responses = {stage: list(items) for stage, items in responses.items()}
        self._lock = threading.Lock()

    def complete(self, bundle: PromptBundle) -> str:
        with self._lock:
            queue = self._responses.get(bundle.stage)
            if not queue:
                raise ProviderError(f"no scripted response left for {bundle.stage}")
            return queue.pop(0)


class FlakyProvider:
    """Wraps a provider and fails the first ``failures`` calls transiently."""

    name = "flaky"

    def __init__(self, inner: TextProvider, failures: int) -> None:
        self.inner = inner
        self.remaining = failures
        self._lock = threading.Lock()

    def complete(self, bundle: PromptBundle) -> str:
        with self._lock:
            if self.remaining > 0:
                self.remaining -= 1
                raise TransientProviderFailure("injected timeout")
        return self.inner.complete(bundle)


class MockImageProvider:
    """Deterministic stand-in for the image-generation endpoint."""

    name = "mock-image"

    def generate(self, prompt: str) -> str:
        return f"image:{stable_hash(prompt)}.png"


class FailingImageProvider:
    name = "failing-image"

    def generate(self, prompt: str) -> str:
        raise ProviderError("image generation unavailable")


class Completer:
    """Runs completions with retry, a concurrency cap, and call accounting."""

    def __init__(
        self,
        provider: TextProvider,
        ledger: CallLedger | None = None,
        *,
        max_concurrent: int = 4,
        retries: int = 1,
    ) -> None:
        self.provider = provider
        self.ledger = ledger or CallLedger()
        self.retries = retries
        self._gate = threading.Semaphore(max_concurrent)

    def complete(self, bundle: PromptBundle, *, job_id: str | None = None) -> str:
        last_error: ProviderError | None = None
        for attempt in range(self.retries + 1):
            started = time.monotonic()
            succeeded = False
            output = ""
            try:
                with self._gate:
                    output = self.provider.complete(bundle)
                succeeded = True
                return output
            except TransientProviderFailure as exc:
                last_error = exc
            except ProviderError as exc:
                last_error = exc
                break  # deterministic failure: retrying cannot help
            except Exception as exc:  # unexpected provider bug: record, don't retry
                last_error = ProviderError(str(exc))
                break
            finally:
                self.ledger.record(
                    ProviderCall(
                        stage=bundle.stage,
                        call_type="text",
                        input_tokens=estimate_tokens(bundle.system_text + bundle.user_text),
                        output_tokens=estimate_tokens(output) if succeeded else 0,
                        succeeded=succeeded,
                        latency_s=time.monotonic() - started,
                        job_id=job_id,
                    )
                )
        raise ProviderError(f"completion failed after retry: {last_error}")

    def complete_parsed(
        self,
        bundle: PromptBundle,
        *,
        job_id: str | None = None,
        allowed_persona_ids: list[str] | None = None,
    ) -> Any:
        """Complete and parse; one re-ask on malformed or invalid output."""
        raw = self.complete(bundle, job_id=job_id)
        try:
            return parse_stage_output(bundle.stage, raw, allowed_persona_ids)
        except ParseError:
            repair = PromptBundle(
                stage=bundle.stage,
                system_text=bundle.system_text,
                user_text=f"{bundle.user_text}\n\n{REPAIR_INSTRUCTION}",
                context_key=bundle.context_key,
            )
            raw = self.complete(repair, job_id=job_id)
            return parse_stage_output(bundle.stage, raw, allowed_persona_ids)

    def generate_image(
        self, provider: ImageProvider, prompt: str, *, stage: str = "headshot", job_id: str | None = None
    ) -> str:
        started = time.monotonic()
        succeeded = False
        try:
            locator = provider.generate(prompt)
            succeeded = True
            return locator
        finally:
            self.ledger.record(
                ProviderCall(
                    stage=stage,
                    call_type="image",
                    input_tokens=estimate_tokens(prompt),
                    output_tokens=0,
                    succeeded=succeeded,
                    latency_s=time.monotonic() - started,
                    job_id=job_id,
                )
            )
