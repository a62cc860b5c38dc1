"""Citation cards and same-venue recommendations from a scholarly-metadata API.

Clicking an in-text citation serves a card (title, publication date, DOI link,
TLDR-style summary); the recommendation endpoint returns relevant same-venue
papers that the document does not already cite. The HTTP client caches by URL
with a TTL, honors a configurable rate limit (queueing, never dropping), and
has an offline mode backed by recorded responses keyed by request URL.
"""

from __future__ import annotations

import json
import logging
import re
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable
from urllib.parse import urlencode

import httpx

from .errors import LookupFailed, NotFound, UnknownReference
from .limits import DEFAULT_LIMITS, Limits

logger = logging.getLogger(__name__)

PAPER_FIELDS = "title,publicationDate,year,venue,externalIds,tldr"


@dataclass(frozen=True)
class CitationCard:
    ref_id: str
    title: str
    publication_date: str | None
    doi_link: str | None
    tldr: str
    fetched_at: datetime


@dataclass(frozen=True)
class Recommendation:
    external_paper_id: str
    title: str
    venue: str | None
    year: int | None
    doi: str | None


def card_to_dict(card: CitationCard) -> dict:
    return {
        "ref_id": card.ref_id,
        "title": card.title,
        "publication_date": card.publication_date,
        "doi_link": card.doi_link,
        "tldr": card.tldr,
        "fetched_at": card.fetched_at.isoformat(),
    }


def recommendation_to_dict(rec: Recommendation) -> dict:
    return {
        "external_paper_id": rec.external_paper_id,
        "title": rec.title,
        "venue": rec.venue,
        "year": rec.year,
        "doi": rec.doi,
    }


def normalize_title(title: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace runs."""
    return re.sub(r"[^a-z0-9]+", " ", title.lower()).strip()


class _RateLimiter:
    """Minimum-interval limiter; callers queue for the next free slot."""

    def __init__(self, requests_per_second: float, sleep: Callable[[float], None]):
        self.interval = 1.0 / requests_per_second if requests_per_second > 0 else 0.0
        self.sleep = sleep
        self._lock = threading.Lock()
        self._next_free = 0.0

    def acquire(self) -> None:
        if self.interval <= 0:
            return
        with self._lock:
            now = time.monotonic()
            wait = max(0.0, self._next_free - now)
            self._next_free = max(now, self._next_free) + self.interval
        if wait > 0:
            self.sleep(wait)


def load_recorded(source: dict | str | Path) -> dict:
    """Recorded responses: a dict, a JSON file, or a directory of JSON files."""
    if isinstance(source, dict):
        return dict(source)
    path = Path(source)
    if path.is_dir():
        merged: dict = {}
        for file in sorted(path.glob("*.json")):
            merged.update(json.loads(file.read_text()))
        return merged
    return json.loads(path.read_text())


class MetadataClient:
    """Scholarly-metadata HTTP client with caching, rate limiting, and replay.

    Offline mode (``recorded``) serves canned JSON keyed by request URL
    (path?query); a URL without a recording behaves as an unreachable API.
    Live mode requires an API key.
    """

    def __init__(
        self,
        base_url: str = "",
        api_key: str = "",
        recorded: dict | str | Path | None = None,
        cache_ttl_seconds: float = 7 * 24 * 3600.0,
        requests_per_second: float = 10.0,
        max_in_flight: int = 4,
        timeout: float = 20.0,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if recorded is None and not api_key:
            raise ValueError("live metadata mode requires an API key")
        self.base_url = (base_url or "https://metadata.invalid").rstrip("/")
        self.cache_ttl = cache_ttl_seconds
        self.request_count = 0
        self._recorded = load_recorded(recorded) if recorded is not None else None
        self._cache: dict[str, tuple[float, dict]] = {}
        self._cache_lock = threading.Lock()
        self._limiter = _RateLimiter(requests_per_second, sleep)
        self._in_flight = threading.Semaphore(max_in_flight)
        headers = {"Accept": "application/json"}
        if api_key:
            headers["x-api-key"] = api_key
        self._client = (
            None
            if self._recorded is not None
            else httpx.Client(headers=headers, timeout=timeout)
        )

    # -- plumbing -------------------------------------------------------------

    def _get_json(self, path: str, params: dict) -> dict:
        url = f"{path}?{urlencode(params)}"
        with self._cache_lock:
            hit = self._cache.get(url)
            if hit is not None and hit[0] > time.monotonic():
                return hit[1]
        self._limiter.acquire()
        with self._in_flight:
            data = self._fetch(url)
        with self._cache_lock:
            self._cache[url] = (time.monotonic() + self.cache_ttl, data)
        return data

    def _fetch(self, url: str) -> dict:
        self.request_count += 1
        if self._recorded is not None:
            entry = self._recorded.get(url)
            if entry is None:
                raise LookupFailed(f"no recorded response for {url}")
            status = entry.get("status", 200)
            if status == 404:
                raise NotFound(f"metadata API has no match for {url}")
            if status >= 400:
                raise LookupFailed(f"metadata API returned {status} for {url}")
            return entry.get("json", {})
        try:
            response = self._client.get(f"{self.base_url}{url}")
        except httpx.HTTPError as exc:
            raise LookupFailed(f"metadata API unreachable: {exc}") from exc
        if response.status_code == 404:
            raise NotFound(f"metadata API has no match for {url}")
        if response.status_code >= 400:
            raise LookupFailed(f"metadata API returned {response.status_code}")
        return response.json()

    # -- endpoints --------------------------------------------------------------

    def paper_by_doi(self, doi: str) -> dict:
        return self._get_json(f"/paper/DOI:{doi}", {"fields": PAPER_FIELDS})

    def paper_by_title(self, title: str) -> dict:
        data = self._get_json(
            "/paper/search/match", {"query": title, "fields": PAPER_FIELDS}
        )
        matches = data.get("data", [])
        if not matches:
            raise NotFound(f"no title match for {title!r}")
        return matches[0]

    def recommendations(self, keywords: list[str], venue: str, limit: int) -> list[dict]:
        data = self._get_json(
            "/recommendations",
            {
                "query": ", ".join(keywords),
                "venue": venue,
                "limit": limit,
                "fields": PAPER_FIELDS,
            },
        )
        return data.get("recommendedPapers", [])


class CitationService:
    """Serves citation cards and missing-citation recommendations."""

    def __init__(
        self,
        client: MetadataClient,
        documents,
        limits: Limits = DEFAULT_LIMITS,
        default_venue: str | None = None,
        fetch_limit: int = 10,
        clock: Callable[[], datetime] = lambda: datetime.now(timezone.utc),
    ):
        self.client = client
        self.documents = documents
        self.limits = limits
        self.default_venue = default_venue
        self.fetch_limit = fetch_limit
        self.clock = clock
        self._venues: dict[str, str] = {}

    def set_venue(self, doc_id: str, venue: str) -> None:
        """Per-upload venue override for documents whose TEI declares none."""
        self._venues[doc_id] = venue

    def _ref(self, doc, ref_id: str):
        for ref in doc.references:
            if ref.ref_id == ref_id:
                return ref
        raise UnknownReference(f"no reference {ref_id!r} in {doc.doc_id}")

    def citation_card(self, doc_id: str, ref_id: str) -> CitationCard:
        doc = self.documents.get(doc_id)
        ref = self._ref(doc, ref_id)
        if ref.doi:
            data = self.client.paper_by_doi(ref.doi)
        else:
            data = self.client.paper_by_title(ref.parsed_title or ref.raw)
        title = data.get("title") or ref.parsed_title or ref.raw
        doi = (data.get("externalIds") or {}).get("DOI") or ref.doi
        publication_date = data.get("publicationDate")
        if not publication_date and data.get("year"):
            publication_date = str(data["year"])
        tldr = ((data.get("tldr") or {}).get("text") or "").strip()
        return CitationCard(
            ref_id=ref_id,
            title=title,
            publication_date=publication_date,
            doi_link=f"https://doi.org/{doi}" if doi else None,
            tldr=tldr,
            fetched_at=self.clock(),
        )

    def resolve_venue(self, doc_id: str) -> str | None:
        doc = self.documents.get(doc_id)
        return self._venues.get(doc_id) or doc.venue or self.default_venue

    def recommend_missing(self, doc_id: str) -> list[Recommendation]:
        """Same-venue papers the document does not cite, top ranked first.

        DOI match removes a candidate first; normalized-title match second.
        At most ``limits.recommendation_count`` results, in API rank order.
        An empty list is a valid result.
        """
        doc = self.documents.get(doc_id)
        venue = self.resolve_venue(doc_id)
        if not venue:
            raise ValueError(
                f"venue for {doc_id} is not resolvable; set one at upload time"
            )
        keywords = list(doc.keywords) or [doc.title]
        candidates = self.client.recommendations(keywords, venue, self.fetch_limit)

        cited_dois = {r.doi.lower() for r in doc.references if r.doi}
        cited_titles = {
            normalize_title(r.parsed_title) for r in doc.references if r.parsed_title
        }
        picked: list[Recommendation] = []
        for item in candidates:
            doi = (item.get("externalIds") or {}).get("DOI")
            title = item.get("title") or ""
            if doi and doi.lower() in cited_dois:
                continue
            if title and normalize_title(title) in cited_titles:
                continue
            picked.append(
                Recommendation(
                    external_paper_id=str(item.get("paperId", "")),
                    title=title,
                    venue=item.get("venue"),
                    year=item.get("year"),
                    doi=doi,
                )
            )
            if len(picked) >= self.limits.recommendation_count:
                break
        return picked
