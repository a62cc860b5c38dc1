"""Seed a data dir + replay transcripts for the cross-stack smoke script.

Usage: python3 seed_smoke.py <workdir>
Prepares <workdir>/data (one ingested document) and <workdir>/replay
(transcripts for section cues and an outline over two known notes), then
prints the doc_id. scripts/smoke.mjs drives the real HTTP service against it.
"""

import json
import pathlib
import sys

from reviewdesk.annotation import AnnotationStore
from reviewdesk.ingest import locate, parse_tei
from reviewdesk.llm import ReplayStore
from reviewdesk.cues import build_section_cue_request
from reviewdesk.synthesis import build_summarize_request
from reviewdesk.service.app import build_state
from reviewdesk.service.config import ServiceConfig

REPO = pathlib.Path(__file__).resolve().parents[2]
TEI = REPO / "tests" / "fixtures" / "virtual_studying.tei.xml"

NOTES = [
    ("timely topic given remote study trends", "strength", "Remote students increasingly"),
    ("only four teams studied", "weakness", "four virtual studying teams"),
]

QUESTIONS = {
    "importance": "Is the presence-sharing problem important to this community?",
    "novelty": "Does the prototype extend existing presence-sharing systems meaningfully?",
    "validity": "Are the deployment and interviews sufficient to support the claims?",
    "clarity": "Is the recruitment and procedure reporting clear enough to assess?",
}


def main(workdir: str) -> None:
    work = pathlib.Path(workdir)
    tei = TEI.read_bytes()
    doc = parse_tei(tei)

    state = build_state(
        ServiceConfig(data_dir=work / "data", replay_dir=work / "replay")
    )
    state.documents.add(doc, pdf=b"%PDF-1.5\nsmoke\n%%EOF")
    state.annotations.register_document(doc.doc_id)

    replay = ReplayStore(work / "replay")
    for sec in doc.sections:
        replay.record(build_section_cue_request(doc, sec.index), json.dumps(QUESTIONS))

    # dry-run the annotation sequence smoke.mjs will perform, to learn note ids
    dry = AnnotationStore()
    dry.register_document(doc.doc_id)
    spans = [sp for sec in doc.sections for sp in sec.spans]
    for text, tag, query in NOTES:
        span = next(sp for sp in spans if query in sp.text)
        h = dry.create_highlight(doc.doc_id, locate(doc, span.span_id), span.text)
        dry.create_note(h.highlight_id, text, tag)
    pairs = dry.notes_for_doc(doc.doc_id)
    ids = {n.text: n.note_id for _, n in pairs}
    outline = {
        "summary": ["Presence sharing for studying teams, explored with a prototype."],
        "strengths": [
            {
                "topic": "Timely problem for remote collaboration",
                "note_ids": [ids["timely topic given remote study trends"]],
            }
        ],
        "weaknesses": [
            {
                "topic": "Limited scope of the study sample",
                "note_ids": [ids["only four teams studied"]],
            }
        ],
    }
    replay.record(build_summarize_request(doc, pairs), json.dumps(outline))
    print(doc.doc_id)


if __name__ == "__main__":
    main(sys.argv[1])
