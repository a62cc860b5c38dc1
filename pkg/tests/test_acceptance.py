"""Acceptance suite: one test per release criterion, one printed line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
PASS lines alongside pytest's own verdicts.
"""

import json
import random
import time
from datetime import datetime, timedelta, timezone

import pytest
from fastapi.testclient import TestClient

from reviewdesk.annotation import AnnotationStore
from reviewdesk.citations import CitationService, MetadataClient
from reviewdesk.cues import CueService
from reviewdesk.errors import SessionSubmitted
from reviewdesk.ingest import doc_to_dict, parse_tei, section_text
from reviewdesk.limits import DEFAULT_LIMITS, word_count
from reviewdesk.llm import (
    ASPECT_KEYS,
    FinalResult,
    LLMClient,
    PartialField,
    ReplayProvider,
    ReplayStore,
    StreamEvent,
    TransportFailure,
    incremental_parse,
)
from reviewdesk.service import ServiceConfig, StaticExtractionClient, compute_metrics
from reviewdesk.service.app import create_app
from reviewdesk.service.sessions import SessionStore
from reviewdesk.synthesis import REFLECTION_CRITERIA, SynthesisService
from tests.support import (
    DocMap,
    SECTION_QUESTIONS,
    build_notes,
    expansion_response,
    outline_response,
    seed_all_section_cues,
    seed_expand,
    seed_summarize,
)
from tests.test_citations import CANDIDATES, recommend_url


def report(number: int, name: str) -> None:
    print(f"[ACCEPTANCE] criterion {number} ({name}): PASS")


def make_llm(tmp_path):
    store = ReplayStore(tmp_path / "replay")
    return store, LLMClient(provider=ReplayProvider(store), sleep=lambda _: None)


# -- 1. ingest fidelity ---------------------------------------------------------


def test_criterion_1_ingest_fidelity(tei_bytes):
    started = time.monotonic()
    doc = parse_tei(tei_bytes)
    elapsed = time.monotonic() - started
    assert len(doc.sections) == 3
    assert len(doc.inline_citations) == 5
    assert sum(1 for c in doc.inline_citations if c.target) == 4
    first = json.dumps(doc_to_dict(doc), sort_keys=True).encode()
    second = json.dumps(doc_to_dict(parse_tei(tei_bytes)), sort_keys=True).encode()
    assert first == second  # re-parse is byte-identical
    assert elapsed < 1.0
    report(1, "ingest fidelity")


# -- 2. cue contract -------------------------------------------------------------


def test_criterion_2_cue_contract(tmp_path, doc):
    store, client = make_llm(tmp_path)
    seed_all_section_cues(store, doc)
    annotations = AnnotationStore()
    annotations.register_document(doc.doc_id)
    cues = CueService(client, DocMap(doc), annotations)
    for sec in doc.sections:
        assert section_text(sec).strip()  # every fixture section is non-empty
        served = cues.section_cues(doc.doc_id, sec.index)
        assert len(served) == 4
        assert [c.aspect for c in served] == list(ASPECT_KEYS)
        for cue in served:
            assert cue.word_count <= DEFAULT_LIMITS.max_cue_words
            assert word_count(cue.question) <= DEFAULT_LIMITS.max_cue_words
    requests_after_first = len(client.request_log)
    for sec in doc.sections:
        cues.section_cues(doc.doc_id, sec.index)
    assert len(client.request_log) == requests_after_first
    report(2, "cue contract")


# -- 3. recommendation filter ------------------------------------------------------


def test_criterion_3_recommendation_filter(doc):
    recorded = {recommend_url(doc): {"json": {"recommendedPapers": CANDIDATES}}}
    client = MetadataClient(recorded=recorded, requests_per_second=0)
    service = CitationService(client, DocMap(doc))
    recs = service.recommend_missing(doc.doc_id)
    assert [r.external_paper_id for r in recs] == ["P2", "P7", "P9"]
    assert len(recs) <= 3

    cited_only = {
        recommend_url(doc): {
            "json": {"recommendedPapers": [CANDIDATES[0], CANDIDATES[2], CANDIDATES[5]]}
        }
    }
    empty_service = CitationService(
        MetadataClient(recorded=cited_only, requests_per_second=0), DocMap(doc)
    )
    assert empty_service.recommend_missing(doc.doc_id) == []

    flood = {
        recommend_url(doc): {
            "json": {
                "recommendedPapers": [
                    {"paperId": f"X{i}", "title": f"Novel Paper {i}", "externalIds": {}}
                    for i in range(10)
                ]
            }
        }
    }
    capped = CitationService(
        MetadataClient(recorded=flood, requests_per_second=0), DocMap(doc)
    )
    assert len(capped.recommend_missing(doc.doc_id)) == 3
    report(3, "recommendation filter")


# -- 4. outline contract -------------------------------------------------------------


def test_criterion_4_outline_contract(tmp_path, doc):
    store, client = make_llm(tmp_path)
    annotations = AnnotationStore()
    annotations.register_document(doc.doc_id)
    synthesis = SynthesisService(client, DocMap(doc), annotations)
    notes = build_notes(annotations, doc)  # the eight-note fixture
    assert len(notes) == 8
    pairs = annotations.notes_for_doc(doc.doc_id)
    seed_summarize(store, doc, pairs, outline_response(notes))
    draft = synthesis.summarize_notes(doc.doc_id)

    for items in (draft.strength_items, draft.weakness_items):
        assert (
            DEFAULT_LIMITS.outline_bullets_min
            <= len(items)
            <= DEFAULT_LIMITS.outline_bullets_max
        )
        for item in items:
            assert word_count(item.topic) <= DEFAULT_LIMITS.topic_max_words
            assert item.provenance

    seed_expand(store, doc, draft, pairs, expansion_response(draft))
    expanded = synthesis.expand_outline(draft.draft_id)
    assert [i.topic for i in expanded.strength_items] == [
        i.topic for i in draft.strength_items
    ]
    assert [i.topic for i in expanded.weakness_items] == [
        i.topic for i in draft.weakness_items
    ]
    for item in expanded.strength_items + expanded.weakness_items:
        assert word_count(item.detail) >= DEFAULT_LIMITS.detail_min_words

    for item in expanded.strength_items + expanded.weakness_items:
        trace = synthesis.trace(expanded.draft_id, item.item_id)
        assert trace.rects and trace.notes
        for rect in trace.rects:
            assert rect.x0 < rect.x1 and rect.y0 < rect.y1
    report(4, "outline contract")


# -- 5. streaming equivalence ----------------------------------------------------------


def _transcripts(doc):
    annotations = AnnotationStore()
    annotations.register_document(doc.doc_id)
    notes = build_notes(annotations, doc)
    outline = outline_response(notes)
    return [
        json.dumps(SECTION_QUESTIONS),
        json.dumps({"question": SECTION_QUESTIONS["clarity"]}),
        json.dumps(outline),
        json.dumps(
            {
                "strengths": [
                    {"topic": s["topic"], "detail": "A sufficiently long detail sentence with more than ten words."}
                    for s in outline["strengths"]
                ],
                "weaknesses": [
                    {"topic": w["topic"], "detail": "Another sufficiently long detail sentence with more than ten words."}
                    for w in outline["weaknesses"]
                ],
            }
        ),
    ]


def _random_chunks(text, rng):
    chunks = []
    i = 0
    while i < len(text):
        step = rng.randint(1, 8)
        chunks.append(text[i : i + step])
        i += step
    return chunks


def test_criterion_5_streaming_equivalence(doc):
    for transcript in _transcripts(doc):
        batch = json.loads(transcript)
        for seed in range(100):
            rng = random.Random(seed)
            chunks = _random_chunks(transcript, rng)
            events = [StreamEvent("delta", c, 1) for c in chunks]
            events.append(StreamEvent("done", transcript, 1))
            results = list(incremental_parse(iter(events)))
            assert results[-1] == FinalResult(batch)
            partials = [r for r in results if isinstance(r, PartialField)]
            rebuilt = {}
            for p in partials:
                if p.index is None:
                    rebuilt[p.field] = p.value
                else:
                    rebuilt.setdefault(p.field, []).append(p.value)
            assert rebuilt == batch

    # terminal-frame uniqueness, including injected provider failure
    class FailingProvider:
        def stream(self, req):
            yield '{"summary": ['
            raise TransportFailure("injected mid-stream failure")

    from reviewdesk.llm import ChatRequest

    failing = LLMClient(provider=FailingProvider(), sleep=lambda _: None)
    events = list(
        failing.complete_stream(
            ChatRequest(system_text="s", user_text="u", expected_schema="outline")
        )
    )
    terminals = [e for e in events if e.kind in ("done", "error")]
    assert len(terminals) == 1 and terminals[0].kind == "error"
    report(5, "streaming equivalence")


# -- 6. data minimization -----------------------------------------------------------


def test_criterion_6_data_minimization(tmp_path, doc):
    store, client = make_llm(tmp_path)
    annotations = AnnotationStore()
    annotations.register_document(doc.doc_id)
    synthesis = SynthesisService(client, DocMap(doc), annotations)
    notes = build_notes(annotations, doc)
    pairs = annotations.notes_for_doc(doc.doc_id)
    seed_summarize(store, doc, pairs, outline_response(notes))
    draft = synthesis.summarize_notes(doc.doc_id)
    seed_expand(store, doc, draft, pairs, expansion_response(draft))
    synthesis.expand_outline(draft.draft_id)

    payloads = [
        req.user_text
        for req in client.request_log
        if req.expected_schema in ("outline", "expansion")
    ]
    assert len(payloads) >= 2
    for payload in payloads:
        assert doc.abstract in payload
        for highlight, note in pairs:
            if note.text:
                assert note.text in payload
            assert highlight.extracted_text in payload
        for sec in doc.sections:
            assert section_text(sec) not in payload
    report(6, "data minimization")


# -- 7. end-to-end scripted session ------------------------------------------------------


E2E_EXTRA_NOTES = [
    ("interviews add useful texture", "strength", 1),
    ("short deployment window", "weakness", 4),
]


def full_checklist():
    return {c: True for c in REFLECTION_CRITERIA}


REVIEW_TEXT = (
    "Summary:\n"
    "This paper examines how virtual studying teams can share a sense of presence "
    "while limiting how explicitly each partner appears on camera. The authors "
    "build a research prototype that streams an abstracted video feed of each "
    "study partner and recognizes studying activity, then rotate four teams of "
    "twelve students through three video versions over a two-week deployment. "
    "Interview findings suggest that reduced explicitness preserves mutual "
    "awareness while easing the pressure of feeling watched, and that fully "
    "explicit video was rarely the version teams chose for day-to-day studying.\n"
    "Strengths:\n"
    "- The problem is timely for remote collaboration, and the study is grounded "
    "in a real deployment with functioning software rather than a mockup or a "
    "purely hypothetical design probe.\n"
    "- The design rationale connecting presence needs to the three video "
    "versions is laid out clearly, which makes the contribution easy to follow "
    "and to position against earlier presence-sharing systems.\n"
    "- Pairing the deployment with interviews adds useful texture about why "
    "participants preferred the reduced versions.\n"
    "Weaknesses:\n"
    "- The sample is limited to four virtual studying teams, which restricts how "
    "far the findings generalize to other group sizes, disciplines, or studying "
    "cultures, and the paper does not acknowledge this scope limit directly.\n"
    "- Recruitment procedures and participant demographics are reported too "
    "sparsely for a reader to judge selection effects.\n"
    "- Engagement is never quantified, so the claims about sustained awareness "
    "rest on interview recollections alone; activity logs the prototype already "
    "collects could have supported a simple descriptive analysis.\n"
)


def test_criterion_7_end_to_end_session(tmp_path, tei_bytes, doc):
    started = time.monotonic()
    replay = ReplayStore(tmp_path / "replay")
    seed_all_section_cues(replay, doc)
    llm = LLMClient(provider=ReplayProvider(replay), sleep=lambda _: None)
    app = create_app(
        ServiceConfig(),
        llm_client=llm,
        extractor=StaticExtractionClient(tei_bytes),
        eager_cue_thread=False,
    )
    state = app.state.ctx
    client = TestClient(app, raise_server_exceptions=False)

    doc_id = client.post("/documents", content=b"%PDF-1.5\nfixture\n%%EOF").json()["doc_id"]
    session_id = client.post("/sessions", json={"doc_id": doc_id}).json()["session_id"]

    spans = [sp for sec in doc.sections for sp in sec.spans]
    from tests.support import EIGHT_NOTE_SPECS

    for text, tag, span_idx in EIGHT_NOTE_SPECS + E2E_EXTRA_NOTES:
        span = spans[span_idx % len(spans)]
        h = client.post(
            "/highlights",
            json={
                "doc_id": doc_id,
                "rects": [vars(r) for r in span.rects],
                "extracted_text": span.text,
                "session_id": session_id,
            },
        ).json()
        client.post(
            f"/highlights/{h['highlight_id']}/notes",
            json={"text": text, "structure_tag": tag, "session_id": session_id},
        )
    assert state.annotations.note_count(doc_id) == 10

    pairs = state.annotations.notes_for_doc(doc_id)
    notes = [n for _, n in pairs]
    seed_summarize(replay, doc, pairs, outline_response(notes))
    frames = [
        json.loads(line)
        for line in client.post(f"/sessions/{session_id}/outline").text.splitlines()
    ]
    assert frames[-1]["kind"] == "done"
    draft_id = frames[-1]["result"]["draft_id"]

    real_draft = state.synthesis.get_draft(draft_id)
    seed_expand(replay, doc, real_draft, pairs, expansion_response(real_draft))
    expand_frames = [
        json.loads(line)
        for line in client.post(
            f"/sessions/{session_id}/drafts/{draft_id}/expand"
        ).text.splitlines()
    ]
    assert expand_frames[-1]["kind"] == "done"
    expanded = expand_frames[-1]["result"]

    for item in expanded["strength_items"] + expanded["weakness_items"]:
        trace = client.get(
            f"/drafts/{draft_id}/items/{item['item_id']}/trace",
            params={"session_id": session_id},
        )
        assert trace.status_code == 200
        assert trace.json()["rects"]

    # review length in the magnitude of a realistic submission
    assert 200 <= len(REVIEW_TEXT.split()) <= 300
    submitted = client.post(
        f"/sessions/{session_id}/submit",
        json={"final_review_text": REVIEW_TEXT, "checklist": full_checklist()},
    )
    assert submitted.status_code == 200, submitted.text

    # immutability of the submitted session
    assert (
        client.post(
            f"/sessions/{session_id}/events", json={"kind": "draft_edit_focus"}
        ).status_code
        == 409
    )
    assert client.post(f"/sessions/{session_id}/outline").status_code == 409
    with pytest.raises(SessionSubmitted):
        state.sessions.require_open(session_id)

    # metrics recomputed from the persisted event log equal the stored snapshot
    snapshot = submitted.json()["metrics_snapshot"]
    recomputed = client.get(f"/sessions/{session_id}/metrics").json()
    assert recomputed == snapshot
    assert recomputed["note_count"] == 10

    elapsed = time.monotonic() - started
    assert elapsed < 10.0

    # synthetic log: two five-minute edit windows in a forty-minute session
    base = datetime(2024, 7, 1, 12, 0, tzinfo=timezone.utc)
    minute = timedelta(minutes=1)
    sessions = SessionStore()
    synthetic = sessions.create("doc-synthetic", started_at=base)
    sessions.log_event(synthetic.session_id, "draft_edit_focus", at=base + 10 * minute)
    sessions.log_event(synthetic.session_id, "draft_edit_blur", at=base + 15 * minute)
    sessions.log_event(synthetic.session_id, "draft_edit_focus", at=base + 20 * minute)
    sessions.log_event(synthetic.session_id, "draft_edit_blur", at=base + 25 * minute)
    closed = sessions.submit(
        synthetic.session_id,
        "final",
        full_checklist(),
        note_count=0,
        submitted_at=base + 40 * minute,
    )
    assert closed.metrics_snapshot["writing_minutes"] == 10.0
    assert closed.metrics_snapshot["reading_minutes"] == 30.0
    assert (
        compute_metrics(closed, sessions.events(synthetic.session_id), 0)
        == closed.metrics_snapshot
    )
    report(7, "end-to-end scripted session")
