"""Review sessions, the interaction event log, metrics, and export formats."""

from __future__ import annotations

import threading
import uuid
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Callable

from ..errors import (
    ChecklistIncomplete,
    EmptyReview,
    SessionSubmitted,
    UnknownSession,
)
from ..synthesis import checklist_complete
from ..storage import MemoryBackend, StorageBackend

EVENT_KINDS = (
    "note_created",
    "note_edited",
    "cue_requested",
    "cue_answered",
    "citation_clicked",
    "recommendation_viewed",
    "summarize_clicked",
    "expand_clicked",
    "trace_clicked",
    "draft_edit_focus",
    "draft_edit_blur",
    "submit",
)


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass(frozen=True)
class InteractionEvent:
    event_id: str
    session_id: str
    kind: str
    at: datetime
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ReviewSession:
    session_id: str
    doc_id: str
    condition_label: str | None
    started_at: datetime
    submitted_at: datetime | None = None
    final_review_text: str | None = None
    checklist: dict | None = None
    latest_draft_id: str | None = None
    metrics_snapshot: dict | None = None

    @property
    def submitted(self) -> bool:
        return self.submitted_at is not None


def session_to_dict(s: ReviewSession) -> dict:
    return {
        "session_id": s.session_id,
        "doc_id": s.doc_id,
        "condition_label": s.condition_label,
        "started_at": s.started_at.isoformat(),
        "submitted_at": s.submitted_at.isoformat() if s.submitted_at else None,
        "final_review_text": s.final_review_text,
        "checklist": s.checklist,
        "latest_draft_id": s.latest_draft_id,
        "metrics_snapshot": s.metrics_snapshot,
    }


def _session_from_dict(d: dict) -> ReviewSession:
    return ReviewSession(
        session_id=d["session_id"],
        doc_id=d["doc_id"],
        condition_label=d.get("condition_label"),
        started_at=datetime.fromisoformat(d["started_at"]),
        submitted_at=(
            datetime.fromisoformat(d["submitted_at"]) if d.get("submitted_at") else None
        ),
        final_review_text=d.get("final_review_text"),
        checklist=d.get("checklist"),
        latest_draft_id=d.get("latest_draft_id"),
        metrics_snapshot=d.get("metrics_snapshot"),
    )


def event_to_dict(e: InteractionEvent) -> dict:
    return {
        "event_id": e.event_id,
        "session_id": e.session_id,
        "kind": e.kind,
        "at": e.at.isoformat(),
        "detail": e.detail,
    }


def _event_from_dict(d: dict) -> InteractionEvent:
    return InteractionEvent(
        event_id=d["event_id"],
        session_id=d["session_id"],
        kind=d["kind"],
        at=datetime.fromisoformat(d["at"]),
        detail=d.get("detail", {}),
    )


def compute_metrics(
    session: ReviewSession, events: list[InteractionEvent], note_count: int
) -> dict:
    """Metrics as a pure function of the event log.

    Writing time sums draft_edit_focus -> draft_edit_blur intervals (an
    unclosed focus counts until session end); reading time is the session
    duration minus writing time.
    """
    ordered = sorted(events, key=lambda e: e.at)
    end = session.submitted_at
    if end is None:
        end = ordered[-1].at if ordered else session.started_at
    writing = 0.0
    focus_at: datetime | None = None
    for event in ordered:
        if event.kind == "draft_edit_focus" and focus_at is None:
            focus_at = event.at
        elif event.kind == "draft_edit_blur" and focus_at is not None:
            writing += (event.at - focus_at).total_seconds()
            focus_at = None
    if focus_at is not None:
        writing += max(0.0, (end - focus_at).total_seconds())
    total = max(0.0, (end - session.started_at).total_seconds())
    writing = min(writing, total)
    counts = Counter(e.kind for e in ordered)
    return {
        "reading_minutes": (total - writing) / 60.0,
        "writing_minutes": writing / 60.0,
        "note_count": note_count,
        "feature_counts": dict(sorted(counts.items())),
    }


class SessionStore:
    """Sessions plus their append-only event logs."""

    def __init__(
        self,
        backend: StorageBackend | None = None,
        clock: Callable[[], datetime] = utcnow,
    ):
        self.backend = backend or MemoryBackend()
        self.clock = clock
        self._sessions: dict[str, ReviewSession] = {}
        self._events: dict[str, list[InteractionEvent]] = {}
        self._lock = threading.RLock()
        for key, record in self.backend.load_all("sessions").items():
            self._sessions[key] = _session_from_dict(record)
        for key, record in self.backend.load_all("events").items():
            self._events[key] = [_event_from_dict(d) for d in record]

    def _persist_session(self, session: ReviewSession) -> None:
        self._sessions[session.session_id] = session
        self.backend.save("sessions", session.session_id, session_to_dict(session))

    def _persist_events(self, session_id: str) -> None:
        self.backend.save(
            "events",
            session_id,
            [event_to_dict(e) for e in self._events.get(session_id, [])],
        )

    # -- lifecycle -------------------------------------------------------------

    def create(
        self,
        doc_id: str,
        condition_label: str | None = None,
        started_at: datetime | None = None,
    ) -> ReviewSession:
        with self._lock:
            session = ReviewSession(
                session_id=f"sess-{uuid.uuid4().hex[:10]}",
                doc_id=doc_id,
                condition_label=condition_label,
                started_at=started_at or self.clock(),
            )
            self._events[session.session_id] = []
            self._persist_session(session)
            return session

    def get(self, session_id: str) -> ReviewSession:
        with self._lock:
            try:
                return self._sessions[session_id]
            except KeyError:
                raise UnknownSession(f"no session {session_id!r}") from None

    def require_open(self, session_id: str) -> ReviewSession:
        session = self.get(session_id)
        if session.submitted:
            raise SessionSubmitted(f"session {session_id} is submitted and immutable")
        return session

    def set_latest_draft(self, session_id: str, draft_id: str) -> None:
        with self._lock:
            session = self.require_open(session_id)
            self._persist_session(replace(session, latest_draft_id=draft_id))

    # -- events -----------------------------------------------------------------

    def log_event(
        self,
        session_id: str,
        kind: str,
        at: datetime | None = None,
        detail: dict | None = None,
        allow_submitted: bool = False,
    ) -> InteractionEvent:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        with self._lock:
            session = self.get(session_id)
            if session.submitted and not allow_submitted:
                raise SessionSubmitted(
                    f"session {session_id} is submitted and immutable"
                )
            log = self._events.setdefault(session_id, [])
            stamp = at or self.clock()
            if log and stamp < log[-1].at:
                raise ValueError(
                    "event timestamps must be monotone per session "
                    f"({stamp.isoformat()} < {log[-1].at.isoformat()})"
                )
            event = InteractionEvent(
                event_id=f"e-{uuid.uuid4().hex[:10]}",
                session_id=session_id,
                kind=kind,
                at=stamp,
                detail=detail or {},
            )
            log.append(event)
            self._persist_events(session_id)
            return event

    def events(self, session_id: str) -> list[InteractionEvent]:
        with self._lock:
            self.get(session_id)
            return list(self._events.get(session_id, []))

    # -- submission ----------------------------------------------------------------

    def submit(
        self,
        session_id: str,
        final_review_text: str,
        checklist: dict,
        note_count: int,
        submitted_at: datetime | None = None,
    ) -> ReviewSession:
        with self._lock:
            session = self.require_open(session_id)
            if not final_review_text.strip():
                raise EmptyReview("final review text is empty")
            if not checklist_complete(checklist):
                missing = sorted(
                    k for k, v in dict(checklist).items() if not v
                ) or ["all"]
                raise ChecklistIncomplete(
                    f"reflection checklist incomplete: {missing}"
                )
            stamp = submitted_at or self.clock()
            self.log_event(session_id, "submit", at=stamp)
            submitted = replace(
                session,
                submitted_at=stamp,
                final_review_text=final_review_text,
                checklist={k: bool(v) for k, v in checklist.items()},
            )
            metrics = compute_metrics(
                submitted, self._events[session_id], note_count
            )
            submitted = replace(submitted, metrics_snapshot=metrics)
            self._persist_session(submitted)
            return submitted

    def metrics(self, session_id: str, note_count: int) -> dict:
        session = self.get(session_id)
        return compute_metrics(session, self.events(session_id), note_count)


# --- export ---------------------------------------------------------------------

_SECTION_MARKERS = ("summary", "strengths", "weaknesses")


def _split_review_sections(text: str) -> dict[str, list[str]]:
    """Partition review text by Summary:/Strengths:/Weaknesses: marker lines."""
    sections: dict[str, list[str]] = {m: [] for m in _SECTION_MARKERS}
    current: str | None = None
    seen_marker = False
    for line in text.splitlines():
        bare = line.strip().strip("#").strip().rstrip(":").lower()
        if bare in _SECTION_MARKERS:
            current = bare
            seen_marker = True
            continue
        if current is not None:
            sections[current].append(line)
    if not seen_marker:
        sections["summary"] = text.splitlines()
    return {k: _trim(v) for k, v in sections.items()}


def _trim(lines: list[str]) -> list[str]:
    while lines and not lines[0].strip():
        lines.pop(0)
    while lines and not lines[-1].strip():
        lines.pop()
    return lines


def export_review(session: ReviewSession, fmt: str) -> str:
    """The submitted review as Markdown or plain text, always with the
    Summary / Strengths / Weaknesses structure."""
    if fmt not in ("md", "txt"):
        raise ValueError(f"format must be 'md' or 'txt', got {fmt!r}")
    text = session.final_review_text or ""
    sections = _split_review_sections(text)
    out: list[str] = []
    if fmt == "md":
        out.append("# Peer Review")
        for marker in _SECTION_MARKERS:
            out.append("")
            out.append(f"## {marker.capitalize()}")
            out.extend(sections[marker] or [])
    else:
        for n, marker in enumerate(_SECTION_MARKERS):
            if n:
                out.append("")
            out.append(f"{marker.capitalize()}:")
            out.extend(sections[marker] or [])
    return "\n".join(out).rstrip() + "\n"
