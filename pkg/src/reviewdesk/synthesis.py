"""Synthesize tagged notes into a review outline with verifiable provenance.

The summarize stage turns the reviewer's notes (plus their highlighted paper
content and the abstract, never the paper body) into summary bullets and
strength/weakness topics, each topic carrying the note ids it combines. The
expand stage adds a detail sentence per topic without touching topic text or
provenance. Every item can be traced back to its notes and their PDF
rectangles, and submission is gated behind a five-criterion reflection
checklist.
"""

from __future__ import annotations

import json
import logging
import re
import threading
import uuid
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Callable, Iterator

from .annotation import AnnotationStore, Highlight, Note
from .errors import (
    AlreadyExpanded,
    Busy,
    EmptyReview,
    NoNotes,
    ProvenanceError,
    ProviderError,
    SchemaError,
    UnknownDraft,
    UnknownItem,
)
from .ingest import PageRect, ParsedDocument, abstract_or_lead, rect_from_dict, rect_to_dict, section_text
from .limits import DEFAULT_LIMITS, Limits, word_count
from .llm import ChatRequest, FinalResult, LLMClient, PartialField, Sampling, incremental_parse
from .storage import MemoryBackend, StorageBackend

logger = logging.getLogger(__name__)

REFLECTION_CRITERIA = ("tone", "comprehensive", "constructive", "justified", "accurate")

SYNTHESIS_SYSTEM_ROLE = (
    "I am building a web application that helps novice peer reviewers write "
    "better peer reviews. Your task is to synthesize the reviewer's notes into "
    "an outline. Please provide an outline with sections of the summary of the "
    "paper, strengths, and weaknesses. To accomplish this task, I am providing "
    "an abstract of the reviewed paper, each of reviewer's notes and "
    "corresponding contents of the reviewed paper for context, and the topics "
    "that should be used to generate the weakness part of the outline."
)
SUMMARIZE_TEMPLATE = (
    "Here is the paper abstract:{abstract}; Here are the user annotations that "
    "contain Note and paper content only as context:\n{notes}\n"
    "Please create three to five concise bullet points for each section "
    "(strengths, weaknesses) out of the reviewer's notes for the templated "
    "outline, plus a short summary of the paper as bullet points. The topics "
    "should have a length of at most 10 words. For each strengths or weaknesses "
    "bullet point, list the ids of the notes it combines and summarizes.\n"
    'Respond with a JSON object of the form {{"summary": ["..."], '
    '"strengths": [{{"topic": "...", "note_ids": ["..."]}}], '
    '"weaknesses": [{{"topic": "...", "note_ids": ["..."]}}]}}.'
)
EXPAND_TEMPLATE = (
    "Here is the paper abstract:{abstract}\n"
    "Here is the current review draft:\n{draft}\n"
    "Here are the user annotations that contain Note and paper content only as "
    "context:\n{notes}\n"
    "Please expand the draft with more details based on the user's notes and "
    "topics, specifically for the strength and weakness sections, with detailed "
    "descriptions using only the notes under each topic. Keep every topic "
    "exactly as written. The details should have a least 10 words and be a "
    "complete sentence.\n"
    'Respond with a JSON object of the form {{"strengths": [{{"topic": "...", '
    '"detail": "..."}}], "weaknesses": [{{"topic": "...", "detail": "..."}}]}}.'
)
_TOPIC_LIMIT_REMINDER = (
    "Some topics exceeded the limit. Every topic must be at most {max_words} "
    "words. Rewrite the outline accordingly."
)
_DETAIL_LENGTH_REMINDER = (
    "Some details were too short. Every detail must have at least {min_words} "
    "words and be a complete sentence. Rewrite the details accordingly."
)


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass(frozen=True)
class OutlineItem:
    item_id: str
    topic: str
    detail: str | None
    provenance: list[str]
    needs_revision: bool = False


@dataclass(frozen=True)
class OutlineDraft:
    draft_id: str
    doc_id: str
    summary_bullets: list[str]
    strength_items: list[OutlineItem]
    weakness_items: list[OutlineItem]
    created_at: datetime
    expanded: bool = False


@dataclass(frozen=True)
class Trace:
    item_id: str
    notes: list[tuple[str, str]]
    rects: list[PageRect]


@dataclass
class ReflectionChecklist:
    draft_id: str
    items: dict[str, bool] = field(
        default_factory=lambda: {c: False for c in REFLECTION_CRITERIA}
    )

    def acknowledge(self, criterion: str) -> None:
        if criterion not in self.items:
            raise KeyError(criterion)
        self.items[criterion] = True

    def complete(self) -> bool:
        return set(self.items) == set(REFLECTION_CRITERIA) and all(
            self.items.values()
        )


def checklist_complete(items: dict) -> bool:
    return set(items) == set(REFLECTION_CRITERIA) and all(
        bool(v) for v in items.values()
    )


def item_to_dict(item: OutlineItem) -> dict:
    return {
        "item_id": item.item_id,
        "topic": item.topic,
        "detail": item.detail,
        "provenance": list(item.provenance),
        "needs_revision": item.needs_revision,
    }


def draft_to_dict(draft: OutlineDraft) -> dict:
    return {
        "draft_id": draft.draft_id,
        "doc_id": draft.doc_id,
        "summary_bullets": list(draft.summary_bullets),
        "strength_items": [item_to_dict(i) for i in draft.strength_items],
        "weakness_items": [item_to_dict(i) for i in draft.weakness_items],
        "created_at": draft.created_at.isoformat(),
        "expanded": draft.expanded,
    }


def _item_from_dict(d: dict) -> OutlineItem:
    return OutlineItem(
        item_id=d["item_id"],
        topic=d["topic"],
        detail=d.get("detail"),
        provenance=list(d["provenance"]),
        needs_revision=d.get("needs_revision", False),
    )


def _draft_from_dict(d: dict) -> OutlineDraft:
    return OutlineDraft(
        draft_id=d["draft_id"],
        doc_id=d["doc_id"],
        summary_bullets=list(d["summary_bullets"]),
        strength_items=[_item_from_dict(i) for i in d["strength_items"]],
        weakness_items=[_item_from_dict(i) for i in d["weakness_items"]],
        created_at=datetime.fromisoformat(d["created_at"]),
        expanded=d.get("expanded", False),
    )


def trace_to_dict(trace: Trace) -> dict:
    return {
        "item_id": trace.item_id,
        "notes": [{"note_id": nid, "text": text} for nid, text in trace.notes],
        "rects": [rect_to_dict(r) for r in trace.rects],
    }


def render_draft_text(draft: OutlineDraft) -> str:
    """Plain-text outline for the draft panel, exports, and expand prompts."""
    lines = ["Summary:"]
    lines.extend(f"- {b}" for b in draft.summary_bullets)
    lines.append("Strengths:")
    for item in draft.strength_items:
        lines.append(f"- {item.topic}")
        if item.detail:
            lines.append(f"  - {item.detail}")
    lines.append("Weaknesses:")
    for item in draft.weakness_items:
        lines.append(f"- {item.topic}")
        if item.detail:
            lines.append(f"  - {item.detail}")
    return "\n".join(lines)


def note_display_text(highlight: Highlight, note: Note) -> str:
    """A note's text; symbol-only notes fall back to the highlighted excerpt."""
    return note.text.strip() or highlight.extracted_text


def format_notes_block(pairs: list[tuple[Highlight, Note]]) -> str:
    lines = []
    for highlight, note in pairs:
        lines.append(f"- note_id: {note.note_id}")
        lines.append(f"  tag: {note.structure_tag}")
        if note.criteria_tag:
            lines.append(f"  criteria: {note.criteria_tag}")
        lines.append(f"  note: {note.text.strip() or '(highlight only)'}")
        lines.append(f"  paper content: {highlight.extracted_text}")
    return "\n".join(lines)


# --- prompt builders (public: replay fixtures are keyed off these) -----------

def build_summarize_request(
    doc: ParsedDocument,
    pairs: list[tuple[Highlight, Note]],
    temperature: float = 0.2,
) -> ChatRequest:
    user_text = SUMMARIZE_TEMPLATE.format(
        abstract=abstract_or_lead(doc), notes=format_notes_block(pairs)
    )
    return ChatRequest(
        system_text=SYNTHESIS_SYSTEM_ROLE,
        user_text=user_text,
        expected_schema="outline",
        sampling=Sampling(temperature=temperature),
    )


def build_expand_request(
    doc: ParsedDocument,
    draft: OutlineDraft,
    pairs: list[tuple[Highlight, Note]],
    temperature: float = 0.2,
) -> ChatRequest:
    user_text = EXPAND_TEMPLATE.format(
        abstract=abstract_or_lead(doc),
        draft=render_draft_text(draft),
        notes=format_notes_block(pairs),
    )
    return ChatRequest(
        system_text=SYNTHESIS_SYSTEM_ROLE,
        user_text=user_text,
        expected_schema="expansion",
        sampling=Sampling(temperature=temperature),
    )


def _with_reminder(req: ChatRequest, reminder: str) -> ChatRequest:
    return ChatRequest(
        system_text=req.system_text,
        user_text=req.user_text + "\n\n" + reminder,
        expected_schema=req.expected_schema,
        sampling=req.sampling,
    )


_WORD_RE = re.compile(r"[a-z0-9]+")

_FUNCTION_WORDS = frozenset(
    """a an and are as at be but by for from has have in into is it its of on or
    our that the their this to was we where were which with not no so if then
    than there here when what who how all any each""".split()
)


def _content_tokens(text: str) -> set[str]:
    return {
        t
        for t in _WORD_RE.findall(text.lower())
        if len(t) > 2 and t not in _FUNCTION_WORDS
    }


def _tokens_match(a: str, b: str) -> bool:
    """Exact match, or a shared prefix of >= 4 chars (study/studied/studying)."""
    if a == b:
        return True
    prefix = min(len(a), len(b), 4)
    return prefix >= 4 and a[:prefix] == b[:prefix]


def _overlap_score(topic_tokens: set[str], note_tokens: set[str]) -> int:
    return sum(
        1 for t in topic_tokens if any(_tokens_match(t, n) for n in note_tokens)
    )


class SynthesisService:
    """Summarize, expand, trace, and gate review outlines for documents."""

    def __init__(
        self,
        client: LLMClient,
        documents,
        annotations: AnnotationStore,
        limits: Limits = DEFAULT_LIMITS,
        backend: StorageBackend | None = None,
        temperature: float = 0.2,
        clock: Callable[[], datetime] = utcnow,
    ):
        self.client = client
        self.documents = documents
        self.annotations = annotations
        self.limits = limits
        self.backend = backend or MemoryBackend()
        self.temperature = temperature
        self.clock = clock
        self._drafts: dict[str, OutlineDraft] = {}
        self._busy: set[str] = set()
        self._busy_lock = threading.Lock()
        for key, record in self.backend.load_all("drafts").items():
            self._drafts[key] = _draft_from_dict(record)

    # -- shared plumbing ------------------------------------------------------

    def is_busy(self, doc_id: str) -> bool:
        with self._busy_lock:
            return doc_id in self._busy

    @contextmanager
    def _exclusive(self, doc_id: str):
        with self._busy_lock:
            if doc_id in self._busy:
                raise Busy(f"a synthesis stream is already open for {doc_id}")
            self._busy.add(doc_id)
        try:
            yield
        finally:
            with self._busy_lock:
                self._busy.discard(doc_id)

    def _persist(self, draft: OutlineDraft) -> None:
        self._drafts[draft.draft_id] = draft
        self.backend.save("drafts", draft.draft_id, draft_to_dict(draft))

    def get_draft(self, draft_id: str) -> OutlineDraft:
        try:
            return self._drafts[draft_id]
        except KeyError:
            raise UnknownDraft(f"no draft {draft_id!r}") from None

    def _check_payload_minimization(self, doc: ParsedDocument, user_text: str) -> None:
        """Synthesis payloads carry notes and excerpts, never a section body.

        The sanctioned exception: a document without an abstract substitutes
        the first 150 words of its first section as the abstract stand-in.
        """
        substitute = None if doc.abstract.strip() else abstract_or_lead(doc)
        for sec in doc.sections:
            body = section_text(sec)
            if not body:
                continue
            if substitute is not None and sec.index == 0 and body in substitute:
                continue
            if body in user_text:
                raise RuntimeError(
                    f"synthesis payload contains the full body of section {sec.index}"
                )

    # -- summarize ----------------------------------------------------------------

    def summarize_notes(self, doc_id: str) -> OutlineDraft:
        draft = None
        for item in self.summarize_notes_stream(doc_id):
            if isinstance(item, OutlineDraft):
                draft = item
        assert draft is not None
        return draft

    def summarize_notes_stream(
        self, doc_id: str
    ) -> Iterator[PartialField | OutlineDraft]:
        doc = self.documents.get(doc_id)
        pairs = self.annotations.notes_for_doc(doc_id)
        if len(pairs) < self.limits.summarize_visible_after_notes:
            raise NoNotes(
                f"{len(pairs)} notes; summarization unlocks at "
                f"{self.limits.summarize_visible_after_notes}"
            )
        return self._summarize_gen(doc, pairs)

    def _summarize_gen(self, doc, pairs) -> Iterator[PartialField | OutlineDraft]:
        with self._exclusive(doc.doc_id):
            request = build_summarize_request(doc, pairs, self.temperature)
            self._check_payload_minimization(doc, request.user_text)
            final: dict | None = None
            for item in incremental_parse(self.client.complete_stream(request)):
                if isinstance(item, PartialField):
                    yield item
                else:
                    final = item.value
            assert final is not None
            final = self._repair_outline(request, final, pairs)
            draft = self._build_draft(doc, pairs, final)
            self._persist(draft)
        yield draft

    def _repair_outline(self, request: ChatRequest, parsed: dict, pairs) -> dict:
        """One re-ask when topics bust the word cap or counts fall short of
        the minimum the notes would permit; hard truncation afterwards."""
        tag_counts = {
            "strengths": sum(1 for _, n in pairs if n.structure_tag == "strength"),
            "weaknesses": sum(1 for _, n in pairs if n.structure_tag == "weakness"),
        }

        def violations(data: dict) -> bool:
            for key in ("strengths", "weaknesses"):
                items = data.get(key, [])
                if any(
                    word_count(item["topic"]) > self.limits.topic_max_words
                    for item in items
                ):
                    return True
                permitted = min(tag_counts[key], self.limits.outline_bullets_min)
                if len(items) < permitted:
                    return True
            return False

        if violations(parsed):
            try:
                retry = self.client.complete(
                    _with_reminder(
                        request,
                        _TOPIC_LIMIT_REMINDER.format(
                            max_words=self.limits.topic_max_words
                        ),
                    )
                )
                parsed = json.loads(retry)
            except (ProviderError, SchemaError) as exc:
                logger.warning("outline repair re-ask failed, truncating: %s", exc)
        for key in ("strengths", "weaknesses"):
            for item in parsed.get(key, []):
                words = item["topic"].split()
                if len(words) > self.limits.topic_max_words:
                    item["topic"] = " ".join(words[: self.limits.topic_max_words])
        return parsed

    def _build_draft(self, doc, pairs, parsed: dict) -> OutlineDraft:
        known = {note.note_id for _, note in pairs}
        strengths = self._build_items(parsed["strengths"], pairs, known, "strength")
        weaknesses = self._build_items(parsed["weaknesses"], pairs, known, "weakness")
        draft = OutlineDraft(
            draft_id=f"d-{uuid.uuid4().hex[:10]}",
            doc_id=doc.doc_id,
            summary_bullets=[str(b).strip() for b in parsed["summary"]],
            strength_items=strengths,
            weakness_items=weaknesses,
            created_at=self.clock(),
        )
        self._assert_provenance_closure(draft, known)
        return draft

    def _build_items(self, raw_items, pairs, known: set[str], tag: str) -> list[OutlineItem]:
        items: list[OutlineItem] = []
        for raw in raw_items:
            if len(items) >= self.limits.outline_bullets_max:
                break
            topic = str(raw["topic"]).strip()
            ids = [i for i in raw.get("note_ids", []) if i in known]
            if not ids:
                fuzzy = self._fuzzy_note(topic, pairs, tag)
                if fuzzy is None:
                    logger.warning(
                        "dropping untraceable outline item %r (no note match)", topic
                    )
                    continue
                ids = [fuzzy]
            items.append(
                OutlineItem(
                    item_id=f"i-{uuid.uuid4().hex[:8]}",
                    topic=topic,
                    detail=None,
                    provenance=ids,
                )
            )
        return items

    def _fuzzy_note(self, topic: str, pairs, tag: str) -> str | None:
        """Highest-token-overlap note; same-tag notes searched first."""
        topic_tokens = _content_tokens(topic)
        for candidates in (
            [(h, n) for h, n in pairs if n.structure_tag == tag],
            pairs,
        ):
            best_id, best_score = None, 0
            for highlight, note in candidates:
                tokens = _content_tokens(note.text) | _content_tokens(
                    highlight.extracted_text
                )
                score = _overlap_score(topic_tokens, tokens)
                if score > best_score:
                    best_id, best_score = note.note_id, score
            if best_id is not None:
                return best_id
        return None

    def _assert_provenance_closure(self, draft: OutlineDraft, known: set[str]) -> None:
        for item in draft.strength_items + draft.weakness_items:
            if not item.provenance:
                raise ProvenanceError(f"item {item.item_id} has empty provenance")
            bad = [i for i in item.provenance if i not in known]
            if bad:
                raise ProvenanceError(
                    f"item {item.item_id} cites nonexistent notes {bad}"
                )

    # -- expand ---------------------------------------------------------------------

    def expand_outline(self, draft_id: str) -> OutlineDraft:
        draft = None
        for item in self.expand_outline_stream(draft_id):
            if isinstance(item, OutlineDraft):
                draft = item
        assert draft is not None
        return draft

    def expand_outline_stream(
        self, draft_id: str
    ) -> Iterator[PartialField | OutlineDraft]:
        draft = self.get_draft(draft_id)
        if draft.expanded:
            raise AlreadyExpanded(f"draft {draft_id} is already expanded")
        doc = self.documents.get(draft.doc_id)
        pairs = self.annotations.notes_for_doc(draft.doc_id)
        return self._expand_gen(doc, draft, pairs)

    def _expand_gen(self, doc, draft, pairs) -> Iterator[PartialField | OutlineDraft]:
        with self._exclusive(doc.doc_id):
            request = build_expand_request(doc, draft, pairs, self.temperature)
            self._check_payload_minimization(doc, request.user_text)
            final: dict | None = None
            for item in incremental_parse(self.client.complete_stream(request)):
                if isinstance(item, PartialField):
                    yield item
                else:
                    final = item.value
            assert final is not None
            final = self._repair_details(request, final)
            expanded = replace(
                draft,
                strength_items=self._merge_details(
                    draft.strength_items, final.get("strengths", [])
                ),
                weakness_items=self._merge_details(
                    draft.weakness_items, final.get("weaknesses", [])
                ),
                expanded=True,
            )
            self._persist(expanded)
        yield expanded

    def _repair_details(self, request: ChatRequest, parsed: dict) -> dict:
        def short(data: dict) -> bool:
            return any(
                word_count(item["detail"]) < self.limits.detail_min_words
                for key in ("strengths", "weaknesses")
                for item in data.get(key, [])
            )

        if short(parsed):
            try:
                retry = self.client.complete(
                    _with_reminder(
                        request,
                        _DETAIL_LENGTH_REMINDER.format(
                            min_words=self.limits.detail_min_words
                        ),
                    )
                )
                parsed = json.loads(retry)
            except (ProviderError, SchemaError) as exc:
                logger.warning("detail-length re-ask failed: %s", exc)
        return parsed

    def _merge_details(
        self, items: list[OutlineItem], raw_items: list[dict]
    ) -> list[OutlineItem]:
        """Attach details to items by topic; topics and provenance unchanged."""
        by_topic = {raw["topic"]: raw["detail"] for raw in raw_items}
        by_normalized = {
            raw["topic"].strip().lower(): raw["detail"] for raw in raw_items
        }
        merged = []
        for pos, item in enumerate(items):
            detail = by_topic.get(item.topic)
            if detail is None:
                detail = by_normalized.get(item.topic.strip().lower())
            if detail is None and pos < len(raw_items):
                detail = raw_items[pos]["detail"]  # positional fallback
            needs_revision = False
            if detail is None:
                detail = item.topic
                needs_revision = True
            detail = detail.strip()
            if word_count(detail) < self.limits.detail_min_words:
                needs_revision = True
            if detail and detail[-1] not in ".!?":
                detail += "."
            merged.append(
                replace(item, detail=detail, needs_revision=needs_revision)
            )
        return merged

    # -- trace and reflection ----------------------------------------------------------

    def trace(self, draft_id: str, item_id: str) -> Trace:
        draft = self.get_draft(draft_id)
        item = next(
            (
                i
                for i in draft.strength_items + draft.weakness_items
                if i.item_id == item_id
            ),
            None,
        )
        if item is None:
            raise UnknownItem(f"no item {item_id!r} in draft {draft_id}")
        notes: list[tuple[str, str]] = []
        rects: list[PageRect] = []
        for note_id in item.provenance:
            if not self.annotations.has_note(note_id):
                logger.warning("trace: note %s no longer exists", note_id)
                continue
            note = self.annotations.get_note(note_id)
            highlight = self.annotations.get_highlight(note.highlight_id)
            notes.append((note_id, note_display_text(highlight, note)))
            rects.extend(highlight.rects)
        if not notes:
            raise ProvenanceError(f"item {item_id} has no surviving notes")
        unique = sorted(set(rects), key=lambda r: (r.page, r.y0, r.x0))
        return Trace(item_id=item_id, notes=notes, rects=unique)

    def reflection_gate(self, draft_id: str, final_text: str) -> ReflectionChecklist:
        self.get_draft(draft_id)
        if not final_text.strip():
            raise EmptyReview("the review text is empty")
        return ReflectionChecklist(draft_id=draft_id)
