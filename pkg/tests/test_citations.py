"""Citation cards, recommendation filtering, caching, and rate limiting."""

import dataclasses
import time
from urllib.parse import urlencode

import pytest

from reviewdesk.citations import (
    PAPER_FIELDS,
    CitationService,
    MetadataClient,
    normalize_title,
)
from reviewdesk.errors import LookupFailed, NotFound, UnknownReference
from tests.support import DocMap


def url(path, **params):
    return f"{path}?{urlencode(params)}"


def paper(pid, title, doi=None, date=None, year=None, venue=None, tldr=None):
    entry = {"paperId": pid, "title": title, "externalIds": {}}
    if doi:
        entry["externalIds"]["DOI"] = doi
    if date:
        entry["publicationDate"] = date
    if year:
        entry["year"] = year
    if venue:
        entry["venue"] = venue
    if tldr:
        entry["tldr"] = {"text": tldr}
    return entry


B0 = paper(
    "S2-b0",
    "Studying Together While Apart: Video Practices of Remote Learners",
    doi="10.1145/3449100",
    date="2021-06-03",
    year=2021,
    venue="PACM HCI",
    tldr="Remote learners choreograph camera use to balance presence and privacy.",
)

# Ten ranked candidates; seven already cited by the fixture document
# (P1, P3, P5, P6 by DOI; P4, P8, P10 by normalized title).
CANDIDATES = [
    paper("P1", "Studying Together While Apart: Video Practices of Remote Learners", doi="10.1145/3449100"),
    paper("P2", "Focus Rooms: Quiet Co-Working Online", doi="10.9999/focus1", venue="CSCW Companion", year=2023),
    paper("P3", "Ambient Presence Sharing in Always-On Social Spaces", doi="10.1145/3311956"),
    paper("P4", "Recognizing desk work activity from consumer webcams!"),
    paper("P5", "Co-Presence Cues in Distributed Teams: A Field Review", doi="10.1007/s10606-018-9310-8"),
    paper("P6", "Being Watched or Being Seen? Camera Pressure in Remote Collaboration", doi="10.1145/3491102.3502017"),
    paper("P7", "Webcam Ethics in Remote Study Groups", doi="10.9999/ethics2", venue="CSCW Companion", year=2022),
    paper("P8", "being watched or being seen: camera pressure in remote collaboration", doi="10.8888/mirror"),
    paper("P9", "Presence Signals for Hybrid Study Sessions", venue="CSCW Companion", year=2024),
    paper("P10", "AMBIENT PRESENCE SHARING IN ALWAYS ON SOCIAL SPACES", doi="10.7777/shout"),
]


def recommend_url(doc, limit=10):
    return url(
        "/recommendations",
        query=", ".join(doc.keywords),
        venue="CSCW Companion",
        limit=limit,
        fields=PAPER_FIELDS,
    )


@pytest.fixture()
def recorded(doc):
    return {
        url("/paper/DOI:10.1145/3449100", fields=PAPER_FIELDS): {"json": B0},
        url(
            "/paper/search/match",
            query="Recognizing Desk Work Activity from Consumer Webcams",
            fields=PAPER_FIELDS,
        ): {
            "json": {"data": [paper("S2-b2", "Recognizing Desk Work Activity from Consumer Webcams", year=2020)]}
        },
        recommend_url(doc): {"json": {"recommendedPapers": CANDIDATES}},
    }


def make_service(doc, recorded, **kwargs):
    client = MetadataClient(recorded=recorded, requests_per_second=0)
    return client, CitationService(client, DocMap(doc), **kwargs)


def test_card_from_doi_lookup(doc, recorded):
    _, service = make_service(doc, recorded)
    card = service.citation_card(doc.doc_id, "b0")
    assert card.title == B0["title"]
    assert card.publication_date == "2021-06-03"
    assert card.doi_link == "https://doi.org/10.1145/3449100"
    assert card.tldr.startswith("Remote learners")


def test_card_by_title_when_no_doi(doc, recorded):
    _, service = make_service(doc, recorded)
    card = service.citation_card(doc.doc_id, "b2")
    assert card.title == "Recognizing Desk Work Activity from Consumer Webcams"
    assert card.publication_date == "2020"
    assert card.doi_link is None
    assert card.tldr == ""


def test_card_not_found(doc, recorded):
    recorded = dict(recorded)
    recorded[url("/paper/DOI:10.1145/3311956", fields=PAPER_FIELDS)] = {"status": 404}
    _, service = make_service(doc, recorded)
    with pytest.raises(NotFound):
        service.citation_card(doc.doc_id, "b1")


def test_unknown_reference(doc, recorded):
    _, service = make_service(doc, recorded)
    with pytest.raises(UnknownReference):
        service.citation_card(doc.doc_id, "b404")


def test_card_cached_within_ttl(doc, recorded):
    client, service = make_service(doc, recorded)
    service.citation_card(doc.doc_id, "b0")
    assert client.request_count == 1
    service.citation_card(doc.doc_id, "b0")
    assert client.request_count == 1


def test_lookup_failed_when_unrecorded_and_cache_cold(doc):
    _, service = make_service(doc, {})
    with pytest.raises(LookupFailed):
        service.citation_card(doc.doc_id, "b0")


def test_live_mode_requires_api_key():
    with pytest.raises(ValueError):
        MetadataClient()


# --- recommendations ----------------------------------------------------------


def test_recommend_filters_cited_keeps_rank_order(doc, recorded):
    _, service = make_service(doc, recorded)
    recs = service.recommend_missing(doc.doc_id)
    assert [r.external_paper_id for r in recs] == ["P2", "P7", "P9"]


def test_no_recommendation_overlaps_reference_list(doc, recorded):
    _, service = make_service(doc, recorded)
    cited_dois = {r.doi.lower() for r in doc.references if r.doi}
    cited_titles = {normalize_title(r.parsed_title) for r in doc.references if r.parsed_title}
    for rec in service.recommend_missing(doc.doc_id):
        assert not (rec.doi and rec.doi.lower() in cited_dois)
        assert normalize_title(rec.title) not in cited_titles


def test_recommend_caps_at_three(doc):
    fresh = [paper(f"N{i}", f"Entirely New Paper {i}", doi=f"10.5555/n{i}") for i in range(10)]
    recorded = {recommend_url(doc): {"json": {"recommendedPapers": fresh}}}
    _, service = make_service(doc, recorded)
    recs = service.recommend_missing(doc.doc_id)
    assert len(recs) == 3
    assert [r.external_paper_id for r in recs] == ["N0", "N1", "N2"]


def test_all_cited_returns_empty(doc):
    cited_only = [CANDIDATES[0], CANDIDATES[2], CANDIDATES[4]]
    recorded = {recommend_url(doc): {"json": {"recommendedPapers": cited_only}}}
    _, service = make_service(doc, recorded)
    assert service.recommend_missing(doc.doc_id) == []


def test_venue_override_and_missing_venue(doc, recorded):
    bare = dataclasses.replace(doc, venue=None)
    _, service = make_service(bare, recorded)
    with pytest.raises(ValueError):
        service.recommend_missing(bare.doc_id)
    service.set_venue(bare.doc_id, "CSCW Companion")
    assert [r.external_paper_id for r in service.recommend_missing(bare.doc_id)] == [
        "P2",
        "P7",
        "P9",
    ]


def test_rate_limiter_queues_rather_than_drops(doc):
    recorded = {
        url(f"/paper/DOI:10.1145/{n}", fields=PAPER_FIELDS): {"json": B0}
        for n in ("3449100", "3311956", "3491102.3502017")
    }
    client = MetadataClient(recorded=recorded, requests_per_second=40)
    start = time.monotonic()
    for n in ("3449100", "3311956", "3491102.3502017"):
        client.paper_by_doi(f"10.1145/{n}")
    elapsed = time.monotonic() - start
    assert client.request_count == 3  # nothing dropped
    assert elapsed >= 0.04  # two waits of 25 ms each, minus scheduling slack


def test_normalize_title():
    assert normalize_title("Being Watched, or Being Seen?") == "being watched or being seen"
    assert normalize_title("  A --- B  ") == "a b"
