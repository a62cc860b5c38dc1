"""Chat-completion client: streaming, schema validation, retries, replay mock.

Two provider backends share one client:

* ``HttpChatProvider`` speaks the usual chat-completions wire protocol with
  ``stream: true`` (SSE ``data:`` lines carrying delta fragments).
* ``ReplayProvider`` serves recorded transcripts from a directory, keyed by a
  stable hash of (system_text, user_text, expected_schema), so the whole test
  suite runs offline and deterministically.

The stream contract: zero or more ``delta`` events, then exactly one terminal
event, ``done`` (payload = the full schema-valid text) or ``error``. When the
concatenated deltas fail schema validation the client re-asks once, bumping
the ``attempt`` counter so consumers discard the stale fragments.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Protocol

import httpx

from ..errors import ProviderError, SchemaError
from . import schemas

logger = logging.getLogger(__name__)

REASK_SUFFIX = (
    "Your previous response was not valid JSON in the required format. "
    "Respond again with only a single valid JSON object in the required format."
)


@dataclass(frozen=True)
class Sampling:
    temperature: float = 0.2
    max_output_tokens: int | None = None


@dataclass(frozen=True)
class ChatRequest:
    system_text: str
    user_text: str
    expected_schema: str
    sampling: Sampling = Sampling()

    def __post_init__(self):
        if not self.system_text.strip():
            raise ValueError("system_text must be non-empty")
        if not self.user_text.strip():
            raise ValueError("user_text must be non-empty")
        if self.expected_schema not in schemas.REGISTERED_SCHEMAS:
            raise ValueError(f"unregistered schema {self.expected_schema!r}")


@dataclass(frozen=True)
class StreamEvent:
    kind: str  # delta | done | error
    payload: str
    attempt: int = 1


def error_descriptor(code: str, message: str) -> str:
    return json.dumps({"code": code, "message": message})


def raise_from_descriptor(payload: str) -> None:
    """Re-raise the exception an error event describes."""
    try:
        data = json.loads(payload)
        code, message = data.get("code", ""), data.get("message", "")
    except (json.JSONDecodeError, AttributeError):
        code, message = "ProviderError", payload
    if code == "SchemaError":
        raise SchemaError(message)
    raise ProviderError(message)


def request_key(req: ChatRequest) -> str:
    """Stable replay-store key over the request's text content."""
    blob = json.dumps(
        [req.system_text, req.user_text, req.expected_schema], ensure_ascii=False
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


class TransportFailure(Exception):
    """Transient provider/transport failure; the client retries these."""


class ChatProvider(Protocol):
    def stream(self, req: ChatRequest) -> Iterator[str]:
        """Yield response text fragments; raise TransportFailure on trouble."""
        ...


# ---------------------------------------------------------------------------
# Replay store
# ---------------------------------------------------------------------------

class ReplayStore:
    """Directory of recorded transcripts, one JSON file per request hash."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, req: ChatRequest) -> Path:
        return self.root / f"{request_key(req)}.json"

    def record(
        self, req: ChatRequest, response: str, chunks: list[str] | None = None
    ) -> Path:
        if chunks is not None and "".join(chunks) != response:
            raise ValueError("chunks must concatenate to the response text")
        entry = {
            "system_text": req.system_text,
            "user_text": req.user_text,
            "expected_schema": req.expected_schema,
            "response": response,
        }
        if chunks is not None:
            entry["chunks"] = chunks
        path = self._path(req)
        path.write_text(json.dumps(entry, ensure_ascii=False, indent=1))
        return path

    def get(self, req: ChatRequest) -> dict | None:
        path = self._path(req)
        if not path.exists():
            return None
        return json.loads(path.read_text())


class ReplayProvider:
    """Deterministic stand-in for the provider, backed by a ReplayStore."""

    def __init__(self, store: ReplayStore, chunk_size: int = 48):
        self.store = store
        self.chunk_size = chunk_size

    def stream(self, req: ChatRequest) -> Iterator[str]:
        entry = self.store.get(req)
        if entry is None:
            raise TransportFailure(
                f"no replay transcript recorded for request {request_key(req)}"
            )
        chunks = entry.get("chunks")
        if chunks is None:
            text = entry["response"]
            chunks = [
                text[i : i + self.chunk_size]
                for i in range(0, len(text), self.chunk_size)
            ]
        yield from chunks


# ---------------------------------------------------------------------------
# Live HTTP provider
# ---------------------------------------------------------------------------

class HttpChatProvider:
    """Streams from a chat-completions endpoint (OpenAI-compatible wire)."""

    def __init__(
        self,
        endpoint: str,
        api_key: str = "",
        model: str = "gpt-4",
        timeout: float = 60.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        headers = {"Accept": "text/event-stream"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._client = httpx.Client(
            headers=headers, timeout=timeout, transport=transport
        )

    def stream(self, req: ChatRequest) -> Iterator[str]:
        body = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": req.system_text},
                {"role": "user", "content": req.user_text},
            ],
            "temperature": req.sampling.temperature,
            "stream": True,
            "response_format": {"type": "json_object"},
        }
        if req.sampling.max_output_tokens is not None:
            body["max_tokens"] = req.sampling.max_output_tokens
        try:
            with self._client.stream(
                "POST", f"{self.endpoint}/chat/completions", json=body
            ) as response:
                if response.status_code >= 400:
                    response.read()
                    raise TransportFailure(
                        f"provider returned HTTP {response.status_code}"
                    )
                for line in response.iter_lines():
                    if not line.startswith("data:"):
                        continue
                    data = line[len("data:") :].strip()
                    if data == "[DONE]":
                        break
                    try:
                        parsed = json.loads(data)
                    except json.JSONDecodeError:
                        continue
                    for choice in parsed.get("choices", []):
                        fragment = (choice.get("delta") or {}).get("content")
                        if fragment:
                            yield fragment
        except httpx.HTTPError as exc:
            raise TransportFailure(str(exc)) from exc

    def close(self):
        self._client.close()


# ---------------------------------------------------------------------------
# Client
# ---------------------------------------------------------------------------

@dataclass
class LLMClient:
    """Provider wrapper adding retries, schema validation, and one re-ask."""

    provider: ChatProvider
    max_transport_retries: int = 3
    backoff_base: float = 0.25
    sleep: Callable[[float], None] = time.sleep
    #: Every outbound request, re-asks included; tests inspect payloads here.
    request_log: list[ChatRequest] = field(default_factory=list)

    def complete_stream(self, req: ChatRequest) -> Iterator[StreamEvent]:
        attempt = 0
        schema_failure: Exception | None = None
        for ask_round, ask in enumerate(self._asks(req)):
            self.request_log.append(ask)
            transport_error: Exception | None = None
            full: str | None = None
            for retry in range(self.max_transport_retries):
                attempt += 1
                parts: list[str] = []
                try:
                    # Deltas are forwarded live; a retry or re-ask bumps
                    # ``attempt`` so consumers drop the stale fragments.
                    for fragment in self.provider.stream(ask):
                        parts.append(fragment)
                        yield StreamEvent("delta", fragment, attempt)
                    full = "".join(parts)
                    break
                except TransportFailure as exc:
                    transport_error = exc
                    logger.warning(
                        "provider transport failure (try %d/%d): %s",
                        retry + 1,
                        self.max_transport_retries,
                        exc,
                    )
                    if retry + 1 < self.max_transport_retries:
                        self.sleep(self.backoff_base * (2**retry))
            if full is None:
                if ask_round > 0 and schema_failure is not None:
                    # The re-ask could not be transported; surface the original
                    # schema failure, which is the actionable cause.
                    yield StreamEvent(
                        "error",
                        error_descriptor("SchemaError", str(schema_failure)),
                        attempt,
                    )
                else:
                    yield StreamEvent(
                        "error",
                        error_descriptor("ProviderError", str(transport_error)),
                        attempt,
                    )
                return
            try:
                schemas.validate(req.expected_schema, json.loads(full))
            except (json.JSONDecodeError, schemas.SchemaViolation) as exc:
                schema_failure = exc
                logger.warning("schema validation failed (ask %d): %s", ask_round, exc)
                continue
            yield StreamEvent("done", full, attempt)
            return
        yield StreamEvent(
            "error", error_descriptor("SchemaError", str(schema_failure)), attempt
        )

    def complete(self, req: ChatRequest) -> str:
        """Drain the stream; return the validated text or raise."""
        final = None
        for event in self.complete_stream(req):
            if event.kind == "done":
                final = event.payload
            elif event.kind == "error":
                raise_from_descriptor(event.payload)
        if final is None:
            raise ProviderError("stream produced no terminal event")
        return final

    # -- internals ----------------------------------------------------------

    def _asks(self, req: ChatRequest) -> Iterator[ChatRequest]:
        yield req
        yield ChatRequest(
            system_text=req.system_text,
            user_text=req.user_text + "\n\n" + REASK_SUFFIX,
            expected_schema=req.expected_schema,
            sampling=req.sampling,
        )
