"""Contextual reflection questions, scoped to a section or a highlighted phrase.

Section cues take the whole section plus the abstract and yield one question
per review aspect (importance, novelty, validity, clarity) from a single
provider call; phrase cues are generated on demand for a highlight and one
chosen aspect. Every served question is enforced to the 25-word cap: one
re-ask with the limit restated, then truncation.
"""

from __future__ import annotations

import json
import logging
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterator

from .errors import (
    MissingAspect,
    MissingContent,
    ProviderError,
    SchemaError,
    UnknownCue,
)
from .ingest import ParsedDocument, abstract_or_lead, section_text
from .limits import DEFAULT_LIMITS, Limits, word_count
from .llm import (
    ASPECT_KEYS,
    ChatRequest,
    FinalResult,
    LLMClient,
    PartialField,
    Sampling,
    incremental_parse,
)
from .storage import MemoryBackend, StorageBackend

logger = logging.getLogger(__name__)

CUE_SYSTEM_ROLE = (
    "You are an expert peer reviewer providing guided questions for novice peer "
    "reviewers to help them write better reviews."
)
ABSTRACT_CONTEXT = "Given this paper's abstract: {abstract}"
SECTION_CUE_TEMPLATE = (
    "What could be a helpful guided question for novice reviewers to evaluate the "
    "{aspect} of this paper for this section of the paper? Please output 1 concise "
    "question with a maximum of 25 words"
)
PHRASE_CUE_TEMPLATE = (
    "What could be a helpful guided question for novice reviewers to evaluate the "
    "{aspect} of this paper for this specific paragraph:{paragraph}. Please output "
    "1 concise question with a maximum of 25 words for this specific paragraph."
)
_SECTION_FORMAT_NOTE = (
    'Respond with a JSON object whose keys are exactly "importance", "novelty", '
    '"validity", "clarity", each mapping to its one question.'
)
_PHRASE_FORMAT_NOTE = 'Respond with a JSON object with exactly one key "question".'
_LIMIT_REMINDER = (
    "Each question exceeded the limit. Every question must be at most {max_words} "
    "words. Rewrite accordingly."
)


@dataclass(frozen=True)
class CueScope:
    kind: str  # section | phrase
    section_index: int | None = None
    highlight_id: str | None = None


@dataclass(frozen=True)
class Cue:
    cue_id: str
    doc_id: str
    scope: CueScope
    aspect: str
    question: str
    word_count: int
    answered: bool = False
    answer_text: str | None = None
    temperature: float = 0.2


def cue_to_dict(cue: Cue) -> dict:
    return {
        "cue_id": cue.cue_id,
        "doc_id": cue.doc_id,
        "scope": {
            "kind": cue.scope.kind,
            "section_index": cue.scope.section_index,
            "highlight_id": cue.scope.highlight_id,
        },
        "aspect": cue.aspect,
        "question": cue.question,
        "word_count": cue.word_count,
        "answered": cue.answered,
        "answer_text": cue.answer_text,
        "temperature": cue.temperature,
    }


def _cue_from_dict(d: dict) -> Cue:
    return Cue(
        cue_id=d["cue_id"],
        doc_id=d["doc_id"],
        scope=CueScope(
            kind=d["scope"]["kind"],
            section_index=d["scope"].get("section_index"),
            highlight_id=d["scope"].get("highlight_id"),
        ),
        aspect=d["aspect"],
        question=d["question"],
        word_count=d["word_count"],
        answered=d.get("answered", False),
        answer_text=d.get("answer_text"),
        temperature=d.get("temperature", 0.2),
    )


# --- prompt builders (public: replay fixtures are keyed off these) -----------

def build_section_cue_request(
    doc: ParsedDocument,
    section_index: int,
    limits: Limits = DEFAULT_LIMITS,
    temperature: float = 0.2,
) -> ChatRequest:
    section = doc.sections[section_index]
    lines = [
        ABSTRACT_CONTEXT.format(abstract=abstract_or_lead(doc)),
        "",
        f"Section: {section.heading}" if section.heading else "Section:",
        section_text(section),
        "",
    ]
    lines.extend(SECTION_CUE_TEMPLATE.format(aspect=a) for a in ASPECT_KEYS)
    lines.extend(["", _SECTION_FORMAT_NOTE])
    return ChatRequest(
        system_text=CUE_SYSTEM_ROLE,
        user_text="\n".join(lines),
        expected_schema="section_cues",
        sampling=Sampling(temperature=temperature),
    )


def build_phrase_cue_request(
    doc: ParsedDocument,
    highlighted_text: str,
    paragraph: str,
    aspect: str,
    limits: Limits = DEFAULT_LIMITS,
    temperature: float = 0.2,
) -> ChatRequest:
    user_text = "\n".join(
        [
            ABSTRACT_CONTEXT.format(abstract=abstract_or_lead(doc)),
            "",
            f"Highlighted text: {highlighted_text}",
            "",
            PHRASE_CUE_TEMPLATE.format(aspect=aspect, paragraph=paragraph),
            "",
            _PHRASE_FORMAT_NOTE,
        ]
    )
    return ChatRequest(
        system_text=CUE_SYSTEM_ROLE,
        user_text=user_text,
        expected_schema="phrase_cue",
        sampling=Sampling(temperature=temperature),
    )


def with_limit_reminder(req: ChatRequest, limits: Limits) -> ChatRequest:
    return ChatRequest(
        system_text=req.system_text,
        user_text=req.user_text
        + "\n\n"
        + _LIMIT_REMINDER.format(max_words=limits.max_cue_words),
        expected_schema=req.expected_schema,
        sampling=req.sampling,
    )


class CueService:
    """Generates, caches, and answers contextual cues for parsed documents."""

    def __init__(
        self,
        client: LLMClient,
        documents,
        annotations,
        limits: Limits = DEFAULT_LIMITS,
        backend: StorageBackend | None = None,
        temperature: float = 0.2,
    ):
        self.client = client
        self.documents = documents  # .get(doc_id) -> ParsedDocument
        self.annotations = annotations
        self.limits = limits
        self.backend = backend or MemoryBackend()
        self.temperature = temperature
        self._cache: dict[tuple[str, int], list[Cue]] = {}
        self._by_id: dict[str, Cue] = {}
        self._locks: dict[tuple[str, int], threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._status: dict[str, dict[int, str]] = {}
        self._load()

    def _load(self) -> None:
        for key, record in self.backend.load_all("cues").items():
            cues = [_cue_from_dict(d) for d in record["cues"]]
            if record.get("section_index") is not None:
                self._cache[(record["doc_id"], record["section_index"])] = cues
            for cue in cues:
                self._by_id[cue.cue_id] = cue

    def _persist_section(self, doc_id: str, section_index: int) -> None:
        cues = self._cache[(doc_id, section_index)]
        self.backend.save(
            "cues",
            f"{doc_id}.s{section_index}",
            {
                "doc_id": doc_id,
                "section_index": section_index,
                "cues": [cue_to_dict(c) for c in cues],
            },
        )

    def _persist_phrase(self, cue: Cue) -> None:
        self.backend.save(
            "cues",
            cue.cue_id,
            {"doc_id": cue.doc_id, "section_index": None, "cues": [cue_to_dict(cue)]},
        )

    def _section_lock(self, key: tuple[str, int]) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(key, threading.Lock())

    # -- section cues ----------------------------------------------------------

    def section_cues(self, doc_id: str, section_index: int) -> list[Cue]:
        return [
            item
            for item in self.section_cues_stream(doc_id, section_index)
            if isinstance(item, Cue)
        ]

    def section_cues_stream(
        self, doc_id: str, section_index: int
    ) -> Iterator[PartialField | Cue]:
        """Per-aspect partials while generating, then the four final cues.

        Cache hits skip the provider entirely and yield the stored cues.
        Preconditions raise eagerly, before the returned stream is consumed.
        """
        doc = self.documents.get(doc_id)
        if not 0 <= section_index < len(doc.sections):
            raise IndexError(f"no section {section_index} in {doc_id}")
        key = (doc_id, section_index)
        cached = self._cache.get(key)
        if cached is not None:
            return iter(list(cached))
        if not section_text(doc.sections[section_index]).strip():
            raise MissingContent(f"section {section_index} has no text")
        return self._section_gen(doc, key, section_index)

    def _section_gen(
        self, doc, key: tuple[str, int], section_index: int
    ) -> Iterator[PartialField | Cue]:
        doc_id = doc.doc_id
        with self._section_lock(key):
            cached = self._cache.get(key)
            if cached is not None:
                yield from cached
                return
            request = build_section_cue_request(
                doc, section_index, self.limits, self.temperature
            )
            final: dict | None = None
            for item in incremental_parse(self.client.complete_stream(request)):
                if isinstance(item, PartialField):
                    yield item
                else:
                    final = item.value
            assert final is not None
            questions = self._enforce_questions(request, final, ASPECT_KEYS)
            cues = [
                Cue(
                    cue_id=f"cue-{doc_id}-s{section_index}-{aspect}",
                    doc_id=doc_id,
                    scope=CueScope(kind="section", section_index=section_index),
                    aspect=aspect,
                    question=questions[aspect],
                    word_count=word_count(questions[aspect]),
                    temperature=request.sampling.temperature,
                )
                for aspect in ASPECT_KEYS
            ]
            self._cache[key] = cues
            for cue in cues:
                self._by_id[cue.cue_id] = cue
            self._persist_section(doc_id, section_index)
        yield from cues

    def _enforce_questions(
        self, request: ChatRequest, parsed: dict, keys: tuple[str, ...]
    ) -> dict[str, str]:
        questions = {k: str(parsed[k]).strip() for k in keys}
        over = [k for k, q in questions.items() if word_count(q) > self.limits.max_cue_words]
        if over:
            try:
                retry_text = self.client.complete(
                    with_limit_reminder(request, self.limits)
                )
                retried = json.loads(retry_text)
                for k in over:
                    candidate = str(retried.get(k, "")).strip()
                    if candidate and word_count(candidate) <= self.limits.max_cue_words:
                        questions[k] = candidate
            except (ProviderError, SchemaError) as exc:
                logger.warning("word-limit re-ask failed, truncating: %s", exc)
        for k, q in questions.items():
            if word_count(q) > self.limits.max_cue_words:
                questions[k] = self._truncate(q)
        return questions

    def _truncate(self, question: str) -> str:
        words = question.split()[: self.limits.max_cue_words]
        return " ".join(words).rstrip(".,;:!?") + "?"

    # -- eager generation --------------------------------------------------------

    def generate_all(self, doc_id: str, max_workers: int = 4) -> dict[int, str]:
        """Fan out one provider request per section; returns readiness map."""
        doc = self.documents.get(doc_id)
        status = self._status.setdefault(doc_id, {})
        for sec in doc.sections:
            status.setdefault(sec.index, "pending")

        def _one(index: int) -> None:
            try:
                self.section_cues(doc_id, index)
                status[index] = "ready"
            except Exception as exc:
                logger.warning("cue generation failed for section %d: %s", index, exc)
                status[index] = "failed"

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            list(pool.map(_one, [sec.index for sec in doc.sections]))
        return dict(status)

    def readiness(self, doc_id: str) -> dict[int, str]:
        doc = self.documents.get(doc_id)
        status = self._status.get(doc_id, {})
        out = {}
        for sec in doc.sections:
            if (doc_id, sec.index) in self._cache:
                out[sec.index] = "ready"
            else:
                out[sec.index] = status.get(sec.index, "pending")
        return out

    # -- phrase cues ---------------------------------------------------------------

    def phrase_cue(self, doc_id: str, highlight_id: str, aspect: str | None) -> Cue:
        for item in self.phrase_cue_stream(doc_id, highlight_id, aspect):
            if isinstance(item, Cue):
                return item
        raise ProviderError("phrase cue stream yielded no cue")

    def phrase_cue_stream(
        self, doc_id: str, highlight_id: str, aspect: str | None
    ) -> Iterator[PartialField | Cue]:
        """On-demand cue for a highlight; preconditions raise eagerly."""
        if not aspect:
            raise MissingAspect("an aspect must be selected for a phrase cue")
        if aspect not in ASPECT_KEYS:
            raise MissingAspect(f"aspect must be one of {ASPECT_KEYS}, got {aspect!r}")
        doc = self.documents.get(doc_id)
        highlight = self.annotations.get_highlight(highlight_id)
        return self._phrase_gen(doc, highlight, aspect)

    def _phrase_gen(self, doc, highlight, aspect: str) -> Iterator[PartialField | Cue]:
        doc_id = doc.doc_id
        highlight_id = highlight.highlight_id
        paragraph = self._containing_paragraph(doc, highlight)
        request = build_phrase_cue_request(
            doc,
            highlight.extracted_text,
            paragraph,
            aspect,
            self.limits,
            self.temperature,
        )
        final: dict | None = None
        for item in incremental_parse(self.client.complete_stream(request)):
            if isinstance(item, PartialField):
                yield item
            else:
                final = item.value
        assert final is not None
        question = self._enforce_questions(request, final, ("question",))["question"]
        cue = Cue(
            cue_id=f"cue-{uuid.uuid4().hex[:10]}",
            doc_id=doc_id,
            scope=CueScope(kind="phrase", highlight_id=highlight_id),
            aspect=aspect,
            question=question,
            word_count=word_count(question),
            temperature=request.sampling.temperature,
        )
        self._by_id[cue.cue_id] = cue
        self._persist_phrase(cue)
        yield cue

    def _containing_paragraph(self, doc: ParsedDocument, highlight) -> str:
        """Text of the paragraph whose spans the highlight rectangles touch."""
        touched: set[tuple[int, int]] = set()
        for sec in doc.sections:
            for span in sec.spans:
                if any(
                    _rects_overlap(a, b) for a in span.rects for b in highlight.rects
                ):
                    parts = span.span_id.split(".")
                    touched.add((sec.index, int(parts[1])))
        if not touched:
            return highlight.extracted_text
        pieces = []
        for sec in doc.sections:
            for span in sec.spans:
                parts = span.span_id.split(".")
                if (sec.index, int(parts[1])) in touched:
                    pieces.append(span.text)
        return " ".join(pieces)

    # -- answers ------------------------------------------------------------------

    def get_cue(self, cue_id: str) -> Cue:
        try:
            return self._by_id[cue_id]
        except KeyError:
            raise UnknownCue(f"no cue {cue_id!r}") from None

    def answer_cue(self, cue_id: str, answer_text: str) -> Cue:
        cue = self.get_cue(cue_id)
        updated = replace(cue, answered=True, answer_text=answer_text)
        self._by_id[cue_id] = updated
        scope = updated.scope
        if scope.kind == "section" and scope.section_index is not None:
            cached = self._cache.get((updated.doc_id, scope.section_index))
            if cached:
                self._cache[(updated.doc_id, scope.section_index)] = [
                    updated if c.cue_id == cue_id else c for c in cached
                ]
                self._persist_section(updated.doc_id, scope.section_index)
        else:
            self._persist_phrase(updated)
        return updated


def _rects_overlap(a, b) -> bool:
    return (
        a.page == b.page
        and a.x0 < b.x1
        and b.x0 < a.x1
        and a.y0 < b.y1
        and b.y0 < a.y1
    )
