"""HTTP service, session/event bookkeeping, persistence wiring, and CLI."""

from .app import build_state, create_app
from .config import ServiceConfig
from .extraction import HttpExtractionClient, StaticExtractionClient
from .registry import DocumentRegistry
from .sessions import (
    EVENT_KINDS,
    InteractionEvent,
    ReviewSession,
    SessionStore,
    compute_metrics,
    export_review,
)

__all__ = [
    "EVENT_KINDS",
    "DocumentRegistry",
    "HttpExtractionClient",
    "InteractionEvent",
    "ReviewSession",
    "ServiceConfig",
    "SessionStore",
    "StaticExtractionClient",
    "build_state",
    "compute_metrics",
    "create_app",
    "export_review",
]
