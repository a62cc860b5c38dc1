"""Helpers shared by module tests: doc registries and replay seeding."""

import json

from reviewdesk.errors import UnknownDocument
from reviewdesk.cues import build_phrase_cue_request, build_section_cue_request
from reviewdesk.llm import ReplayStore

# Four questions used to seed the Method-section transcript; each <= 25 words.
SECTION_QUESTIONS = {
    "importance": (
        "Is the problem addressed in the submission, concerning the video "
        "explicitness of a video conferencing interface for virtual studying, "
        "important to the CSCW community?"
    ),
    "novelty": (
        "How does this study relate to existing work in the field of virtual "
        "social activities and video streaming? Does it introduce a novel approach?"
    ),
    "validity": (
        "Does the Method section provide clear and well-justified explanations of "
        "the research prototype's design, including the choice of video versions "
        "and activity recognition method?"
    ),
    "clarity": (
        "How comprehensive does the method explain the recruitment process, "
        "demographics, and procedures of the user study, ensuring clarity for a "
        "CSCW audience?"
    ),
}

PHRASE_CLARITY_QUESTION = SECTION_QUESTIONS["clarity"]


class DocMap:
    """Minimal document registry for module-level tests."""

    def __init__(self, *docs):
        self._docs = {d.doc_id: d for d in docs}

    def add(self, doc):
        self._docs[doc.doc_id] = doc

    def get(self, doc_id):
        try:
            return self._docs[doc_id]
        except KeyError:
            raise UnknownDocument(f"no document {doc_id!r}") from None


def seed_section_cues(
    store: ReplayStore, doc, section_index, questions=None, chunks=None
):
    """Record a section-cue transcript; returns the response text."""
    questions = questions or SECTION_QUESTIONS
    request = build_section_cue_request(doc, section_index)
    response = json.dumps(questions)
    store.record(request, response, chunks=chunks)
    return response


def seed_all_section_cues(store: ReplayStore, doc, questions=None):
    for sec in doc.sections:
        seed_section_cues(store, doc, sec.index, questions)


def seed_phrase_cue(
    store: ReplayStore, doc, highlighted_text, paragraph, aspect, question
):
    request = build_phrase_cue_request(doc, highlighted_text, paragraph, aspect)
    response = json.dumps({"question": question})
    store.record(request, response)
    return response


# --- synthesis fixtures -------------------------------------------------------

# Eight tagged notes over the fixture document: 1 summary, 3 strengths,
# 3 weaknesses, 1 other. Excerpts come from the document's own sentences.
EIGHT_NOTE_SPECS = [
    ("explores presence sharing for remote studying", "summary", 0),
    ("timely topic given remote study trends", "strength", 0),
    ("prototype deployed with real teams", "strength", 2),
    ("clear presence design rationale", "strength", 2),
    ("only four teams studied", "weakness", 3),
    ("recruitment details sparse", "weakness", 3),
    ("no quantitative engagement measures", "weakness", 5),
    ("check related webcam ethics work", "other", 6),
]


def build_notes(annotations, doc, specs=EIGHT_NOTE_SPECS):
    """Create one highlight+note per spec tuple (text, tag, span_number)."""
    spans = [sp for sec in doc.sections for sp in sec.spans]
    created = []
    for text, tag, span_idx in specs:
        span = spans[span_idx % len(spans)]
        h = annotations.create_highlight(doc.doc_id, span.rects, span.text)
        created.append(annotations.create_note(h.highlight_id, text, tag))
    return created


def outline_response(notes):
    """Replay outline keyed to the eight-note fixture's runtime note ids."""
    by_text = {n.text: n.note_id for n in notes}
    return {
        "summary": [
            "Explores how studying teams share presence with reduced video detail.",
            "A prototype with three video versions was deployed for two weeks.",
            "Four teams used the prototype and joined interviews.",
            "Reduced explicitness kept awareness while easing camera pressure.",
        ],
        "strengths": [
            {
                "topic": "Timely problem for remote collaboration",
                "note_ids": [by_text["timely topic given remote study trends"]],
            },
            {
                "topic": "Real deployment with study teams",
                "note_ids": [by_text["prototype deployed with real teams"]],
            },
            {
                "topic": "Clear design rationale",
                "note_ids": [by_text["clear presence design rationale"]],
            },
        ],
        "weaknesses": [
            {
                "topic": "Limited scope of the study sample",
                "note_ids": [by_text["only four teams studied"]],
            },
            {
                "topic": "Sparse recruitment reporting",
                "note_ids": [by_text["recruitment details sparse"]],
            },
            {
                "topic": "No quantitative engagement evidence",
                "note_ids": [by_text["no quantitative engagement measures"]],
            },
        ],
    }


def expansion_response(draft):
    details = {
        "Timely problem for remote collaboration": (
            "The paper addresses a pressing shift toward remote studying with presence needs."
        ),
        "Real deployment with study teams": (
            "A working prototype was deployed with real studying teams for two weeks."
        ),
        "Clear design rationale": (
            "Design choices around video explicitness are motivated clearly and consistently throughout."
        ),
        "Limited scope of the study sample": (
            "Sample size is limited to four virtual studying teams, restricting broader applicability of findings."
        ),
        "Sparse recruitment reporting": (
            "Recruitment procedures and participant demographics are reported too sparsely to assess validity."
        ),
        "No quantitative engagement evidence": (
            "Findings rely on interviews alone without quantitative engagement measures to support claims."
        ),
    }
    return {
        "strengths": [
            {"topic": i.topic, "detail": details[i.topic]} for i in draft.strength_items
        ],
        "weaknesses": [
            {"topic": i.topic, "detail": details[i.topic]} for i in draft.weakness_items
        ],
    }


def seed_summarize(store: ReplayStore, doc, pairs, response_obj, chunks=None):
    from reviewdesk.synthesis import build_summarize_request

    request = build_summarize_request(doc, pairs)
    text = json.dumps(response_obj)
    store.record(request, text, chunks=chunks)
    return text


def seed_expand(store: ReplayStore, doc, draft, pairs, response_obj, chunks=None):
    from reviewdesk.synthesis import build_expand_request

    request = build_expand_request(doc, draft, pairs)
    text = json.dumps(response_obj)
    store.record(request, text, chunks=chunks)
    return text
