"""HTTP service tying the modules together.

Endpoints cover document upload and retrieval, annotation CRUD, cue /
citation / synthesis features, review submission, metrics, and export.
Streaming endpoints (cues, outline, expansion) emit newline-delimited JSON
frames: zero or more ``partial`` frames, then exactly one ``done`` or
``error`` frame.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Callable, Iterator

from fastapi import FastAPI, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse, PlainTextResponse, Response, StreamingResponse
from pydantic import BaseModel, Field

from ..annotation import AnnotationStore, highlight_to_dict, note_to_dict
from ..citations import CitationService, MetadataClient, card_to_dict, recommendation_to_dict
from ..cues import Cue, CueService, cue_to_dict
from ..errors import (
    AlreadyExpanded,
    Busy,
    ChecklistIncomplete,
    EmptyDocument,
    EmptyReview,
    ExtractionServiceError,
    InvalidRect,
    LookupFailed,
    MissingAspect,
    MissingContent,
    NoNotes,
    NotAPdf,
    NotFound,
    ParseError,
    ProviderError,
    ProvenanceError,
    ReviewDeskError,
    SchemaError,
    SessionSubmitted,
    UnknownCue,
    UnknownDocument,
    UnknownDraft,
    UnknownHighlight,
    UnknownItem,
    UnknownNote,
    UnknownReference,
    UnknownSession,
    UnknownSpan,
    UnknownTag,
)
from ..ingest import PageRect, doc_to_dict, parse_tei
from ..limits import DEFAULT_LIMITS, Limits
from ..llm import HttpChatProvider, LLMClient, PartialField, ReplayProvider, ReplayStore
from ..storage import JsonDirBackend, MemoryBackend
from ..synthesis import (
    OutlineDraft,
    SynthesisService,
    draft_to_dict,
    render_draft_text,
    trace_to_dict,
)
from .config import ServiceConfig
from .extraction import ExtractionClient, HttpExtractionClient
from .registry import DocumentRegistry
from .sessions import (
    EVENT_KINDS,
    SessionStore,
    event_to_dict,
    export_review,
    session_to_dict,
    utcnow,
)

logger = logging.getLogger(__name__)

_STATUS_BY_ERROR = {
    UnknownDocument: 404,
    UnknownSpan: 404,
    UnknownHighlight: 404,
    UnknownNote: 404,
    UnknownCue: 404,
    UnknownReference: 404,
    UnknownDraft: 404,
    UnknownItem: 404,
    UnknownSession: 404,
    NotFound: 404,
    InvalidRect: 400,
    UnknownTag: 400,
    MissingAspect: 400,
    MissingContent: 400,
    EmptyReview: 400,
    NotAPdf: 400,
    NoNotes: 409,
    ChecklistIncomplete: 409,
    SessionSubmitted: 409,
    Busy: 409,
    AlreadyExpanded: 409,
    ParseError: 422,
    EmptyDocument: 422,
    LookupFailed: 502,
    ExtractionServiceError: 502,
    ProviderError: 502,
    SchemaError: 502,
    ProvenanceError: 502,
}


@dataclass
class AppState:
    config: ServiceConfig
    documents: DocumentRegistry
    annotations: AnnotationStore
    llm: LLMClient
    cues: CueService
    citations: CitationService | None
    synthesis: SynthesisService
    sessions: SessionStore
    extractor: ExtractionClient | None
    limits: Limits


def build_state(
    config: ServiceConfig | None = None,
    *,
    llm_client: LLMClient | None = None,
    metadata_client: MetadataClient | None = None,
    extractor: ExtractionClient | None = None,
    clock: Callable[[], datetime] = utcnow,
    limits: Limits = DEFAULT_LIMITS,
) -> AppState:
    """Wire the module services; injected clients override configuration."""
    config = config or ServiceConfig.from_env()
    backend = JsonDirBackend(config.data_dir) if config.data_dir else MemoryBackend()

    if llm_client is None:
        if config.replay_dir:
            provider = ReplayProvider(ReplayStore(config.replay_dir))
        elif config.provider_url:
            provider = HttpChatProvider(
                config.provider_url, config.provider_key, config.provider_model
            )
        else:
            raise ValueError(
                "no chat provider configured: set a provider URL or a replay dir"
            )
        llm_client = LLMClient(provider=provider)

    if metadata_client is None and (config.recorded_metadata or config.metadata_key):
        metadata_client = MetadataClient(
            base_url=config.metadata_url,
            api_key=config.metadata_key,
            recorded=config.recorded_metadata,
        )

    if extractor is None and config.extraction_url:
        extractor = HttpExtractionClient(config.extraction_url)

    documents = DocumentRegistry(backend)
    annotations = AnnotationStore(backend=backend, limits=limits, clock=clock)
    for doc_id in documents.ids():
        annotations.register_document(doc_id)
    cues = CueService(
        llm_client,
        documents,
        annotations,
        limits=limits,
        backend=backend,
        temperature=config.temperature,
    )
    citations = (
        CitationService(
            metadata_client, documents, limits=limits, default_venue=config.default_venue
        )
        if metadata_client is not None
        else None
    )
    synthesis = SynthesisService(
        llm_client,
        documents,
        annotations,
        limits=limits,
        backend=backend,
        temperature=config.temperature,
        clock=clock,
    )
    sessions = SessionStore(backend=backend, clock=clock)
    return AppState(
        config=config,
        documents=documents,
        annotations=annotations,
        llm=llm_client,
        cues=cues,
        citations=citations,
        synthesis=synthesis,
        sessions=sessions,
        extractor=extractor,
        limits=limits,
    )


# --- request bodies -----------------------------------------------------------


class RectIn(BaseModel):
    page: int
    x0: float
    y0: float
    x1: float
    y1: float


class HighlightIn(BaseModel):
    doc_id: str
    rects: list[RectIn]
    extracted_text: str
    session_id: str | None = None


class NoteIn(BaseModel):
    text: str = ""
    structure_tag: str
    criteria_tag: str | None = None
    session_id: str | None = None


class NoteEditIn(BaseModel):
    text: str | None = None
    structure_tag: str | None = None
    criteria_tag: str | None = None
    clear_criteria: bool = False
    session_id: str | None = None


class AnswerIn(BaseModel):
    answer_text: str
    session_id: str | None = None


class SessionIn(BaseModel):
    doc_id: str
    condition_label: str | None = None


class EventIn(BaseModel):
    kind: str
    at: datetime | None = None
    detail: dict = Field(default_factory=dict)


class ReflectionIn(BaseModel):
    final_text: str


class SubmitIn(BaseModel):
    final_review_text: str
    checklist: dict[str, bool]


# --- app factory -----------------------------------------------------------------


def create_app(
    config: ServiceConfig | None = None,
    *,
    llm_client: LLMClient | None = None,
    metadata_client: MetadataClient | None = None,
    extractor: ExtractionClient | None = None,
    clock: Callable[[], datetime] = utcnow,
    limits: Limits = DEFAULT_LIMITS,
    eager_cue_thread: bool = True,
) -> FastAPI:
    state = build_state(
        config,
        llm_client=llm_client,
        metadata_client=metadata_client,
        extractor=extractor,
        clock=clock,
        limits=limits,
    )
    app = FastAPI(title="reviewdesk", version="0.1.0")
    app.state.ctx = state

    @app.exception_handler(ReviewDeskError)
    def _domain_error(request: Request, exc: ReviewDeskError):
        status = _STATUS_BY_ERROR.get(type(exc), 500)
        headers = {}
        if isinstance(exc, ExtractionServiceError) and exc.retry_after:
            headers["Retry-After"] = str(int(exc.retry_after))
        return JSONResponse(
            {"error": exc.code, "message": exc.message},
            status_code=status,
            headers=headers or None,
        )

    @app.exception_handler(ValueError)
    def _value_error(request: Request, exc: ValueError):
        return JSONResponse({"error": "BadRequest", "message": str(exc)}, status_code=400)

    @app.exception_handler(IndexError)
    def _index_error(request: Request, exc: IndexError):
        return JSONResponse({"error": "NotFound", "message": str(exc)}, status_code=404)

    # -- helpers ---------------------------------------------------------------

    def _log(session_id: str | None, kind: str, detail: dict | None = None) -> None:
        if session_id:
            state.sessions.log_event(session_id, kind, detail=detail)

    def _log_if_open(session_id: str | None, kind: str, detail: dict | None = None) -> None:
        if not session_id:
            return
        session = state.sessions.get(session_id)
        if not session.submitted:
            state.sessions.log_event(session_id, kind, detail=detail)

    def _require_open(session_id: str | None) -> None:
        if session_id:
            state.sessions.require_open(session_id)

    def _ndjson(stream: Iterator[Any], finalize: Callable[[Any], Any]) -> StreamingResponse:
        def frames():
            terminal = False
            try:
                finals = []
                for item in stream:
                    if isinstance(item, PartialField):
                        frame = {
                            "kind": "partial",
                            "field": item.field,
                            "index": item.index,
                            "value": item.value,
                        }
                        yield json.dumps(frame, ensure_ascii=False) + "\n"
                    else:
                        finals.append(item)
                result = finalize(finals)
                yield json.dumps(
                    {"kind": "done", "result": result}, ensure_ascii=False
                ) + "\n"
                terminal = True
            except ReviewDeskError as exc:
                if not terminal:
                    yield json.dumps(
                        {"kind": "error", "code": exc.code, "message": exc.message}
                    ) + "\n"
                    terminal = True
            except Exception as exc:  # defensive: a stream must always terminate
                logger.exception("streaming endpoint failed")
                if not terminal:
                    yield json.dumps(
                        {"kind": "error", "code": "InternalError", "message": str(exc)}
                    ) + "\n"
                    terminal = True

        return StreamingResponse(frames(), media_type="application/x-ndjson")

    def _rects(rect_models: list[RectIn]) -> list[PageRect]:
        return [
            PageRect(page=r.page, x0=r.x0, y0=r.y0, x1=r.x1, y1=r.y1)
            for r in rect_models
        ]

    # -- documents ----------------------------------------------------------------

    @app.post("/documents", status_code=201)
    async def upload_document(
        request: Request, venue: str | None = None, eager: bool = True
    ):
        pdf = await request.body()
        if not pdf.startswith(b"%PDF-"):
            raise NotAPdf("payload does not look like a PDF")
        if state.extractor is None:
            raise ExtractionServiceError("no extraction service configured")
        tei = await run_in_threadpool(state.extractor.extract, pdf)
        doc = await run_in_threadpool(parse_tei, tei)
        state.documents.add(doc, pdf=pdf)
        state.annotations.register_document(doc.doc_id)
        if venue and state.citations is not None:
            state.citations.set_venue(doc.doc_id, venue)
        if eager and eager_cue_thread:
            threading.Thread(
                target=state.cues.generate_all, args=(doc.doc_id,), daemon=True
            ).start()
        return {
            "doc_id": doc.doc_id,
            "title": doc.title,
            "sections": len(doc.sections),
            "word_count": doc.word_count,
        }

    @app.get("/documents/{doc_id}")
    def get_document(doc_id: str):
        return doc_to_dict(state.documents.get(doc_id))

    @app.get("/documents/{doc_id}/pdf")
    def get_pdf(doc_id: str):
        pdf = state.documents.get_pdf(doc_id)
        if pdf is None:
            raise NotFound(f"no stored PDF for {doc_id}")
        return Response(content=pdf, media_type="application/pdf")

    @app.get("/documents/{doc_id}/cues/status")
    def cue_status(doc_id: str):
        return {str(k): v for k, v in state.cues.readiness(doc_id).items()}

    @app.get("/documents/{doc_id}/sections/{section_index}/cues")
    def section_cues(doc_id: str, section_index: int, session_id: str | None = None):
        stream = state.cues.section_cues_stream(doc_id, section_index)
        _log_if_open(session_id, "cue_requested", {"section_index": section_index})
        return _ndjson(
            stream, lambda finals: [cue_to_dict(c) for c in finals if isinstance(c, Cue)]
        )

    # -- annotations ------------------------------------------------------------------

    @app.post("/highlights", status_code=201)
    def create_highlight(body: HighlightIn):
        _require_open(body.session_id)
        h = state.annotations.create_highlight(
            body.doc_id, _rects(body.rects), body.extracted_text
        )
        return highlight_to_dict(h)

    @app.post("/highlights/{highlight_id}/notes", status_code=201)
    def create_note(highlight_id: str, body: NoteIn):
        _require_open(body.session_id)
        note = state.annotations.create_note(
            highlight_id, body.text, body.structure_tag, body.criteria_tag
        )
        _log(body.session_id, "note_created", {"note_id": note.note_id})
        return note_to_dict(note)

    @app.patch("/notes/{note_id}")
    def edit_note(note_id: str, body: NoteEditIn):
        _require_open(body.session_id)
        kwargs: dict[str, Any] = {}
        if body.text is not None:
            kwargs["text"] = body.text
        if body.structure_tag is not None:
            kwargs["structure_tag"] = body.structure_tag
        if body.clear_criteria:
            kwargs["criteria_tag"] = None
        elif body.criteria_tag is not None:
            kwargs["criteria_tag"] = body.criteria_tag
        note = state.annotations.edit_note(note_id, **kwargs)
        _log(body.session_id, "note_edited", {"note_id": note_id})
        return note_to_dict(note)

    @app.delete("/notes/{note_id}", status_code=204)
    def delete_note(note_id: str, session_id: str | None = None):
        _require_open(session_id)
        state.annotations.delete_note(note_id)
        _log(session_id, "note_edited", {"note_id": note_id, "action": "deleted"})
        return Response(status_code=204)

    @app.get("/documents/{doc_id}/annotations")
    def list_annotations(doc_id: str):
        return [
            {
                "highlight": highlight_to_dict(h),
                "note": note_to_dict(n) if n is not None else None,
            }
            for h, n in state.annotations.list_annotations(doc_id)
        ]

    # -- cues ------------------------------------------------------------------------

    @app.post("/highlights/{highlight_id}/cue")
    def phrase_cue(
        highlight_id: str, aspect: str | None = None, session_id: str | None = None
    ):
        highlight = state.annotations.get_highlight(highlight_id)
        stream = state.cues.phrase_cue_stream(highlight.doc_id, highlight_id, aspect)
        _log_if_open(session_id, "cue_requested", {"highlight_id": highlight_id})
        return _ndjson(
            stream, lambda finals: cue_to_dict(next(c for c in finals if isinstance(c, Cue)))
        )

    @app.post("/cues/{cue_id}/answer")
    def answer_cue(cue_id: str, body: AnswerIn):
        _require_open(body.session_id)
        cue = state.cues.answer_cue(cue_id, body.answer_text)
        _log(body.session_id, "cue_answered", {"cue_id": cue_id})
        return cue_to_dict(cue)

    # -- citations ----------------------------------------------------------------------

    @app.get("/documents/{doc_id}/references/{ref_id}/card")
    def citation_card(doc_id: str, ref_id: str, session_id: str | None = None):
        if state.citations is None:
            raise LookupFailed("no metadata client configured")
        card = state.citations.citation_card(doc_id, ref_id)
        _log_if_open(session_id, "citation_clicked", {"ref_id": ref_id})
        return card_to_dict(card)

    @app.get("/documents/{doc_id}/recommendations")
    def recommendations(doc_id: str, session_id: str | None = None):
        if state.citations is None:
            raise LookupFailed("no metadata client configured")
        recs = state.citations.recommend_missing(doc_id)
        _log_if_open(session_id, "recommendation_viewed", {"count": len(recs)})
        return [recommendation_to_dict(r) for r in recs]

    # -- sessions -----------------------------------------------------------------------

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionIn):
        state.documents.get(body.doc_id)
        session = state.sessions.create(body.doc_id, body.condition_label)
        return session_to_dict(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return session_to_dict(state.sessions.get(session_id))

    @app.post("/sessions/{session_id}/events", status_code=201)
    def log_client_event(session_id: str, body: EventIn):
        if body.kind == "submit":
            raise ValueError("submit events are logged by the submit endpoint")
        if body.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {body.kind!r}")
        event = state.sessions.log_event(
            session_id, body.kind, at=body.at, detail=body.detail
        )
        return event_to_dict(event)

    @app.get("/sessions/{session_id}/events")
    def list_events(session_id: str):
        return [event_to_dict(e) for e in state.sessions.events(session_id)]

    # -- synthesis ----------------------------------------------------------------------

    @app.post("/sessions/{session_id}/outline")
    def summarize(session_id: str):
        session = state.sessions.require_open(session_id)
        if state.synthesis.is_busy(session.doc_id):
            raise Busy(f"a synthesis stream is already open for {session.doc_id}")
        stream = state.synthesis.summarize_notes_stream(session.doc_id)
        state.sessions.log_event(session_id, "summarize_clicked")

        def finalize(finals):
            draft = next(d for d in finals if isinstance(d, OutlineDraft))
            state.sessions.set_latest_draft(session_id, draft.draft_id)
            payload = draft_to_dict(draft)
            payload["draft_text"] = render_draft_text(draft)
            return payload

        return _ndjson(stream, finalize)

    @app.post("/sessions/{session_id}/drafts/{draft_id}/expand")
    def expand(session_id: str, draft_id: str):
        session = state.sessions.require_open(session_id)
        if state.synthesis.is_busy(session.doc_id):
            raise Busy(f"a synthesis stream is already open for {session.doc_id}")
        stream = state.synthesis.expand_outline_stream(draft_id)
        state.sessions.log_event(session_id, "expand_clicked", detail={"draft_id": draft_id})

        def finalize(finals):
            draft = next(d for d in finals if isinstance(d, OutlineDraft))
            payload = draft_to_dict(draft)
            payload["draft_text"] = render_draft_text(draft)
            return payload

        return _ndjson(stream, finalize)

    @app.get("/drafts/{draft_id}")
    def get_draft(draft_id: str):
        draft = state.synthesis.get_draft(draft_id)
        payload = draft_to_dict(draft)
        payload["draft_text"] = render_draft_text(draft)
        return payload

    @app.get("/drafts/{draft_id}/items/{item_id}/trace")
    def trace(draft_id: str, item_id: str, session_id: str | None = None):
        result = state.synthesis.trace(draft_id, item_id)
        _log_if_open(session_id, "trace_clicked", {"item_id": item_id})
        return trace_to_dict(result)

    @app.post("/drafts/{draft_id}/reflection")
    def reflection(draft_id: str, body: ReflectionIn):
        checklist = state.synthesis.reflection_gate(draft_id, body.final_text)
        return {"draft_id": checklist.draft_id, "items": checklist.items}

    @app.post("/sessions/{session_id}/submit")
    def submit(session_id: str, body: SubmitIn):
        session = state.sessions.get(session_id)
        note_count = state.annotations.note_count(session.doc_id)
        submitted = state.sessions.submit(
            session_id, body.final_review_text, body.checklist, note_count
        )
        return session_to_dict(submitted)

    @app.get("/sessions/{session_id}/metrics")
    def metrics(session_id: str):
        session = state.sessions.get(session_id)
        return state.sessions.metrics(
            session_id, state.annotations.note_count(session.doc_id)
        )

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str, format: str = "md"):
        session = state.sessions.get(session_id)
        if not session.submitted:
            raise EmptyReview("session has no submitted review to export")
        text = export_review(session, format)
        media = "text/markdown" if format == "md" else "text/plain"
        return PlainTextResponse(text, media_type=media)

    @app.get("/healthz")
    def health():
        return {"status": "ok", "documents": len(state.documents.ids())}

    return app
