"""Reviewer highlights and tagged notes for a document session.

A highlight pins rectangles on the PDF plus the text they cover; notes hang
off highlights and carry a mandatory structure tag (summary / strength /
weakness / other) and an optional criteria tag. Note text may be empty: the
highlight's extracted text then stands in during synthesis.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from typing import Callable

from .errors import (
    InvalidRect,
    UnknownDocument,
    UnknownHighlight,
    UnknownNote,
    UnknownTag,
)
from .ingest import PageRect, rect_from_dict, rect_to_dict
from .limits import DEFAULT_LIMITS, Limits
from .storage import MemoryBackend, StorageBackend

STRUCTURE_TAGS = ("summary", "strength", "weakness", "other")
CRITERIA_TAGS = ("importance", "novelty", "validity", "clarity")


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


_SEQ_ID = re.compile(r"^[hn]-(\d{6,})$")


@dataclass(frozen=True)
class Highlight:
    highlight_id: str
    doc_id: str
    rects: list[PageRect]
    extracted_text: str
    created_at: datetime


@dataclass(frozen=True)
class Note:
    note_id: str
    highlight_id: str
    text: str
    structure_tag: str
    criteria_tag: str | None
    created_at: datetime
    edited_at: datetime


def highlight_to_dict(h: Highlight) -> dict:
    return {
        "highlight_id": h.highlight_id,
        "doc_id": h.doc_id,
        "rects": [rect_to_dict(r) for r in h.rects],
        "extracted_text": h.extracted_text,
        "created_at": h.created_at.isoformat(),
    }


def note_to_dict(n: Note) -> dict:
    return {
        "note_id": n.note_id,
        "highlight_id": n.highlight_id,
        "text": n.text,
        "structure_tag": n.structure_tag,
        "criteria_tag": n.criteria_tag,
        "created_at": n.created_at.isoformat(),
        "edited_at": n.edited_at.isoformat(),
    }


def _highlight_from_dict(d: dict) -> Highlight:
    return Highlight(
        highlight_id=d["highlight_id"],
        doc_id=d["doc_id"],
        rects=[rect_from_dict(r) for r in d["rects"]],
        extracted_text=d["extracted_text"],
        created_at=datetime.fromisoformat(d["created_at"]),
    )


def _note_from_dict(d: dict) -> Note:
    return Note(
        note_id=d["note_id"],
        highlight_id=d["highlight_id"],
        text=d["text"],
        structure_tag=d["structure_tag"],
        criteria_tag=d.get("criteria_tag"),
        created_at=datetime.fromisoformat(d["created_at"]),
        edited_at=datetime.fromisoformat(d["edited_at"]),
    )


class AnnotationStore:
    """Per-document annotation sets with serialized writes.

    Persisted per doc_id as one JSON record holding one array per type
    (highlights, notes). Reads return snapshots, so they are safe alongside
    concurrent writes.
    """

    _UNSET = object()

    def __init__(
        self,
        backend: StorageBackend | None = None,
        limits: Limits = DEFAULT_LIMITS,
        clock: Callable[[], datetime] = utcnow,
    ):
        self.backend = backend or MemoryBackend()
        self.limits = limits
        self.clock = clock
        self._lock = threading.RLock()
        self._docs: set[str] = set()
        self._highlights: dict[str, Highlight] = {}
        self._notes: dict[str, Note] = {}
        self._doc_highlights: dict[str, list[str]] = {}
        self._highlight_notes: dict[str, list[str]] = {}
        # Sequential ids keep replay transcripts (which embed note ids in
        # prompt text) reproducible across runs.
        self._seq = {"h": 0, "n": 0}
        self._load()

    def _next_id(self, prefix: str) -> str:
        self._seq[prefix] += 1
        return f"{prefix}-{self._seq[prefix]:06d}"

    def _bump_seq(self, existing_id: str) -> None:
        match = _SEQ_ID.match(existing_id)
        if match:
            prefix = existing_id[0]
            self._seq[prefix] = max(self._seq[prefix], int(match.group(1)))

    def _load(self) -> None:
        for doc_id, record in self.backend.load_all("annotations").items():
            self._docs.add(doc_id)
            self._doc_highlights.setdefault(doc_id, [])
            for h_dict in record.get("highlights", []):
                h = _highlight_from_dict(h_dict)
                self._highlights[h.highlight_id] = h
                self._doc_highlights[doc_id].append(h.highlight_id)
                self._highlight_notes.setdefault(h.highlight_id, [])
                self._bump_seq(h.highlight_id)
            for n_dict in record.get("notes", []):
                n = _note_from_dict(n_dict)
                self._notes[n.note_id] = n
                self._highlight_notes.setdefault(n.highlight_id, []).append(n.note_id)
                self._bump_seq(n.note_id)

    def _persist(self, doc_id: str) -> None:
        record = {
            "highlights": [
                highlight_to_dict(self._highlights[hid])
                for hid in self._doc_highlights.get(doc_id, [])
            ],
            "notes": [
                note_to_dict(self._notes[nid])
                for hid in self._doc_highlights.get(doc_id, [])
                for nid in self._highlight_notes.get(hid, [])
            ],
        }
        self.backend.save("annotations", doc_id, record)

    # -- documents -----------------------------------------------------------

    def register_document(self, doc_id: str) -> None:
        with self._lock:
            self._docs.add(doc_id)
            self._doc_highlights.setdefault(doc_id, [])

    def _require_doc(self, doc_id: str) -> None:
        if doc_id not in self._docs:
            raise UnknownDocument(f"document {doc_id!r} not registered")

    # -- highlights ------------------------------------------------------------

    def create_highlight(
        self, doc_id: str, rects: list[PageRect], extracted_text: str
    ) -> Highlight:
        with self._lock:
            self._require_doc(doc_id)
            if not rects:
                raise InvalidRect("a highlight needs at least one rectangle")
            if not all(isinstance(r, PageRect) for r in rects):
                raise InvalidRect("rects must be PageRect instances")
            if not extracted_text.strip():
                raise ValueError("extracted_text must be non-empty")
            h = Highlight(
                highlight_id=self._next_id("h"),
                doc_id=doc_id,
                rects=list(rects),
                extracted_text=extracted_text,
                created_at=self.clock(),
            )
            self._highlights[h.highlight_id] = h
            self._doc_highlights[doc_id].append(h.highlight_id)
            self._highlight_notes[h.highlight_id] = []
            self._persist(doc_id)
            return h

    def get_highlight(self, highlight_id: str) -> Highlight:
        with self._lock:
            try:
                return self._highlights[highlight_id]
            except KeyError:
                raise UnknownHighlight(f"no highlight {highlight_id!r}") from None

    # -- notes -----------------------------------------------------------------

    def create_note(
        self,
        highlight_id: str,
        text: str,
        structure_tag: str,
        criteria_tag: str | None = None,
    ) -> Note:
        with self._lock:
            highlight = self.get_highlight(highlight_id)
            self._check_tags(structure_tag, criteria_tag)
            now = self.clock()
            note = Note(
                note_id=self._next_id("n"),
                highlight_id=highlight_id,
                text=text,
                structure_tag=structure_tag,
                criteria_tag=criteria_tag,
                created_at=now,
                edited_at=now,
            )
            self._notes[note.note_id] = note
            self._highlight_notes[highlight_id].append(note.note_id)
            self._persist(highlight.doc_id)
            return note

    def _check_tags(self, structure_tag: str, criteria_tag: str | None) -> None:
        if structure_tag not in STRUCTURE_TAGS:
            raise UnknownTag(
                f"structure_tag {structure_tag!r} not in {STRUCTURE_TAGS}"
            )
        if criteria_tag is not None and criteria_tag not in CRITERIA_TAGS:
            raise UnknownTag(f"criteria_tag {criteria_tag!r} not in {CRITERIA_TAGS}")

    def get_note(self, note_id: str) -> Note:
        with self._lock:
            try:
                return self._notes[note_id]
            except KeyError:
                raise UnknownNote(f"no note {note_id!r}") from None

    def edit_note(
        self,
        note_id: str,
        text: str | None = None,
        structure_tag: str | None = None,
        criteria_tag: object = _UNSET,
    ) -> Note:
        with self._lock:
            note = self.get_note(note_id)
            new_structure = structure_tag if structure_tag is not None else note.structure_tag
            new_criteria = (
                note.criteria_tag if criteria_tag is self._UNSET else criteria_tag
            )
            self._check_tags(new_structure, new_criteria)  # type: ignore[arg-type]
            updated = replace(
                note,
                text=note.text if text is None else text,
                structure_tag=new_structure,
                criteria_tag=new_criteria,  # type: ignore[arg-type]
                edited_at=self.clock(),
            )
            self._notes[note_id] = updated
            self._persist(self._highlights[note.highlight_id].doc_id)
            return updated

    def delete_note(self, note_id: str) -> None:
        """Remove the note; a highlight left with no notes is removed too."""
        with self._lock:
            note = self.get_note(note_id)
            highlight = self._highlights[note.highlight_id]
            self._notes.pop(note_id)
            siblings = self._highlight_notes[note.highlight_id]
            siblings.remove(note_id)
            if not siblings:
                self._highlight_notes.pop(note.highlight_id)
                self._highlights.pop(note.highlight_id)
                self._doc_highlights[highlight.doc_id].remove(note.highlight_id)
            self._persist(highlight.doc_id)

    # -- queries ---------------------------------------------------------------

    def list_annotations(self, doc_id: str) -> list[tuple[Highlight, Note | None]]:
        """(highlight, note) pairs in creation order.

        A highlight without notes yet appears once with note=None; one entry
        per note otherwise.
        """
        with self._lock:
            self._require_doc(doc_id)
            out: list[tuple[Highlight, Note | None]] = []
            for hid in self._doc_highlights.get(doc_id, []):
                h = self._highlights[hid]
                note_ids = self._highlight_notes.get(hid, [])
                if not note_ids:
                    out.append((h, None))
                for nid in note_ids:
                    out.append((h, self._notes[nid]))
            return out

    def notes_for_doc(self, doc_id: str) -> list[tuple[Highlight, Note]]:
        return [(h, n) for h, n in self.list_annotations(doc_id) if n is not None]

    def note_count(self, doc_id: str) -> int:
        return len(self.notes_for_doc(doc_id))

    def summarize_available(self, doc_id: str) -> bool:
        """The Summarize Notes affordance unlocks at the configured count."""
        return self.note_count(doc_id) >= self.limits.summarize_visible_after_notes

    def has_note(self, note_id: str) -> bool:
        with self._lock:
            return note_id in self._notes
