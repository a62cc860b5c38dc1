"""Chat-completion provider abstraction: streaming, validation, replay."""

from .client import (
    ChatRequest,
    HttpChatProvider,
    LLMClient,
    ReplayProvider,
    ReplayStore,
    Sampling,
    StreamEvent,
    TransportFailure,
    request_key,
)
from .schemas import ASPECT_KEYS, REGISTERED_SCHEMAS, SchemaViolation, validate
from .stream import FinalResult, PartialField, incremental_parse

__all__ = [
    "ASPECT_KEYS",
    "ChatRequest",
    "FinalResult",
    "HttpChatProvider",
    "LLMClient",
    "PartialField",
    "REGISTERED_SCHEMAS",
    "ReplayProvider",
    "ReplayStore",
    "Sampling",
    "SchemaViolation",
    "StreamEvent",
    "TransportFailure",
    "incremental_parse",
    "request_key",
    "validate",
]
