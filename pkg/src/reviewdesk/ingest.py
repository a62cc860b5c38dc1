"""Parse structure-extraction TEI XML into a coordinate-anchored document model.

The extraction service (run with coordinate output enabled) emits TEI where
sentences and citation markers carry ``coords`` attributes of the form
``page,x,y,w,h[;page,x,y,w,h...]``. This module turns that into sections of
text spans with page rectangles, a bibliography, and inline citation markers
linked to their bibliography entries.
"""

from __future__ import annotations

import hashlib
import math
import re
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field, replace

from .errors import EmptyDocument, InvalidRect, ParseError, UnknownSpan

DOI_RE = re.compile(r"^10\.\d{4,9}/\S+$")

# Minimal stopword list for the abstract keyword fallback.
_STOPWORDS = frozenset(
    """a an and are as at be but by for from has have in into is it its of on or
    our that the their this to was we were which with during each also can
    using used use new two between through study paper results these those than
    more most such not no may based both while other over about how what when
    where who all been being do does did had will would could should them they
    he she you your i us if then there here out up down only so very after
    before under its within without across per via""".split()
)


# ---------------------------------------------------------------------------
# Document model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PageRect:
    """Axis-aligned rectangle in PDF points, top-left origin per page."""

    page: int
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if self.page < 1:
            raise InvalidRect(f"page must be >= 1, got {self.page}")
        if min(self.x0, self.y0, self.x1, self.y1) < 0:
            raise InvalidRect("coordinates must be non-negative")
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise InvalidRect(
                f"degenerate rect: ({self.x0},{self.y0})-({self.x1},{self.y1})"
            )


@dataclass(frozen=True)
class TextSpan:
    span_id: str
    text: str
    page: int
    rects: list[PageRect]


@dataclass(frozen=True)
class Section:
    index: int
    heading: str
    spans: list[TextSpan]


@dataclass(frozen=True)
class Reference:
    ref_id: str
    raw: str
    parsed_title: str | None = None
    doi: str | None = None
    year: int | None = None


@dataclass(frozen=True)
class InlineCitation:
    """An in-text citation marker; ``span.rects`` locate the clickable overlay."""

    span: TextSpan
    target: str | None = None
    tei_pointer: str | None = None


@dataclass(frozen=True)
class ParsedDocument:
    doc_id: str
    title: str
    abstract: str
    sections: list[Section]
    references: list[Reference]
    inline_citations: list[InlineCitation]
    word_count: int
    keywords: list[str] = field(default_factory=list)
    venue: str | None = None


def section_text(section: Section) -> str:
    """Full text of a section, spans joined in reading order."""
    return " ".join(span.text for span in section.spans)


def abstract_or_lead(doc: ParsedDocument, max_words: int = 150) -> str:
    """The abstract, or the first ``max_words`` words of the first section."""
    if doc.abstract.strip():
        return doc.abstract.strip()
    lead = section_text(doc.sections[0]).split()
    return " ".join(lead[:max_words])


# ---------------------------------------------------------------------------
# TEI parsing
# ---------------------------------------------------------------------------

def _local(tag) -> str:
    return tag.rsplit("}", 1)[-1] if isinstance(tag, str) else ""

def _find(elem, *path: str):
    """First descendant matching a chain of local names, namespace-agnostic."""
    current = [elem]
    for name in path:
        nxt = []
        for node in current:
            nxt.extend(c for c in node if _local(c.tag) == name)
        current = nxt
        if not current:
            return None
    return current[0]


def _iter_local(elem, name: str):
    for node in elem.iter():
        if _local(node.tag) == name:
            yield node


def _text_of(elem) -> str:
    if elem is None:
        return ""
    return re.sub(r"\s+", " ", "".join(elem.itertext())).strip()


def _parse_coords(value: str) -> list[PageRect]:
    """``page,x,y,w,h`` groups separated by ``;`` into rects (w/h > 0 only)."""
    rects = []
    for group in value.split(";"):
        parts = group.strip().split(",")
        if len(parts) != 5:
            continue
        try:
            page = int(float(parts[0]))
            x, y, w, h = (float(p) for p in parts[1:])
        except ValueError:
            continue
        if w <= 0 or h <= 0:
            continue
        rects.append(PageRect(page=page, x0=x, y0=y, x1=x + w, y1=y + h))
    return rects


def parse_tei(tei_xml: bytes) -> ParsedDocument:
    """Parse TEI bytes into a ParsedDocument.

    Spans are sentences when the TEI carries sentence segmentation, else
    paragraphs. Inline citation markers are linked to bibliography entries
    by their TEI pointer; unmatched markers are kept with no target.

    Raises ParseError for malformed XML and EmptyDocument when no section
    with text could be extracted.
    """
    try:
        root = ET.fromstring(tei_xml)
    except ET.ParseError as exc:
        raise ParseError(f"malformed TEI XML: {exc}") from exc

    doc_id = "doc-" + hashlib.sha256(tei_xml).hexdigest()[:12]
    title = _parse_title(root)
    abstract = _parse_abstract(root)
    references = _parse_bibliography(root)
    sections, citations = _parse_body(root)
    if not sections:
        raise EmptyDocument("no sections with text extracted from TEI")

    words = sum(len(span.text.split()) for sec in sections for span in sec.spans)
    doc = ParsedDocument(
        doc_id=doc_id,
        title=title,
        abstract=abstract,
        sections=sections,
        references=references,
        inline_citations=citations,
        word_count=words,
        keywords=_parse_keywords(root, abstract, sections),
        venue=_parse_venue(root),
    )
    return resolve_citations(doc)


def resolve_citations(doc: ParsedDocument) -> ParsedDocument:
    """Link every inline citation whose TEI pointer names a bibliography entry.

    Best-effort: markers with dangling or absent pointers keep target=None
    and are never dropped.
    """
    known = {ref.ref_id for ref in doc.references}
    resolved = []
    for cit in doc.inline_citations:
        target = None
        if cit.tei_pointer:
            candidate = cit.tei_pointer.lstrip("#")
            if candidate in known:
                target = candidate
        resolved.append(replace(cit, target=target))
    return replace(doc, inline_citations=resolved)


def locate(doc: ParsedDocument, span_id: str) -> list[PageRect]:
    """Rectangles of a span (section spans and citation markers alike)."""
    for sec in doc.sections:
        for span in sec.spans:
            if span.span_id == span_id:
                return list(span.rects)
    for cit in doc.inline_citations:
        if cit.span.span_id == span_id:
            return list(cit.span.rects)
    raise UnknownSpan(f"no span {span_id!r} in document {doc.doc_id}")


# --- header fields ---------------------------------------------------------

def _parse_title(root) -> str:
    header = _find(root, "teiHeader")
    if header is None:
        return ""
    for node in _iter_local(header, "title"):
        if node.get("type") == "main":
            return _text_of(node)
    for node in _iter_local(header, "title"):
        return _text_of(node)
    return ""


def _parse_abstract(root) -> str:
    for node in _iter_local(root, "abstract"):
        return _text_of(node)
    return ""


def _parse_venue(root) -> str | None:
    header = _find(root, "teiHeader")
    if header is None:
        return None
    source = _find(header, "fileDesc", "sourceDesc")
    if source is None:
        return None
    for node in _iter_local(source, "title"):
        if node.get("level") in ("m", "j") and _text_of(node):
            return _text_of(node)
    for node in _iter_local(source, "meeting"):
        if _text_of(node):
            return _text_of(node)
    return None


def _parse_keywords(root, abstract: str, sections: list[Section]) -> list[str]:
    declared = []
    for kw in _iter_local(root, "keywords"):
        for term in _iter_local(kw, "term"):
            text = _text_of(term)
            if text:
                declared.append(text)
        if not declared:
            # Some extractors emit keywords as bare comma-separated text.
            text = _text_of(kw)
            declared.extend(t.strip() for t in text.split(",") if t.strip())
    if declared:
        return declared
    return _tfidf_keywords(abstract, sections)


def _tokens(text: str) -> list[str]:
    return [
        t
        for t in re.findall(r"[a-z][a-z-]+", text.lower())
        if len(t) > 2 and t not in _STOPWORDS
    ]


def _tfidf_keywords(abstract: str, sections: list[Section], top: int = 5) -> list[str]:
    """Top TF-IDF terms of the abstract, IDF taken over the paper's sections."""
    abstract_tf = Counter(_tokens(abstract))
    if not abstract_tf:
        return []
    section_docs = [set(_tokens(section_text(sec))) for sec in sections]
    n_docs = max(len(section_docs), 1)
    scored = []
    for term, tf in abstract_tf.items():
        df = sum(1 for doc in section_docs if term in doc)
        idf = math.log((1 + n_docs) / (1 + df)) + 1.0
        scored.append((-tf * idf, term))
    scored.sort()
    return [term for _, term in scored[:top]]


# --- body ------------------------------------------------------------------

def _parse_body(root) -> tuple[list[Section], list[InlineCitation]]:
    body = None
    for node in _iter_local(root, "body"):
        body = node
        break
    if body is None:
        return [], []

    sections: list[Section] = []
    citations: list[InlineCitation] = []
    for div in _iter_local(body, "div"):
        heading = ""
        head = _find(div, "head")
        if head is not None:
            heading = _text_of(head)
        spans: list[TextSpan] = []
        index = len(sections)
        for p_num, p in enumerate(c for c in div if _local(c.tag) == "p"):
            sentence_nodes = [c for c in p if _local(c.tag) == "s"]
            units = sentence_nodes or [p]
            for u_num, unit in enumerate(units):
                span_id = f"s{index}.{p_num}.{u_num}"
                span = _span_from_node(unit, span_id)
                if span is None:
                    continue
                spans.append(span)
                citations.extend(_markers_in(unit, span))
        if spans:
            sections.append(Section(index=index, heading=heading, spans=spans))
    return sections, citations


def _span_from_node(node, span_id: str) -> TextSpan | None:
    text = _text_of(node)
    if not text:
        return None
    rects = _parse_coords(node.get("coords", ""))
    if not rects:
        # No usable coordinates: anchor the text to a zero-area-free
        # placeholder on page 1 so the span stays addressable.
        rects = [PageRect(page=1, x0=0.0, y0=0.0, x1=1.0, y1=1.0)]
    return TextSpan(span_id=span_id, text=text, page=rects[0].page, rects=rects)


def _markers_in(unit, container: TextSpan) -> list[InlineCitation]:
    markers = []
    for k, ref in enumerate(_iter_local(unit, "ref")):
        if ref.get("type") != "bibr":
            continue
        marker_text = _text_of(ref) or "[?]"
        rects = _parse_coords(ref.get("coords", "")) or list(container.rects)
        span = TextSpan(
            span_id=f"{container.span_id}.c{k}",
            text=marker_text,
            page=rects[0].page,
            rects=rects,
        )
        markers.append(InlineCitation(span=span, tei_pointer=ref.get("target")))
    return markers


# --- bibliography ----------------------------------------------------------

_XML_ID = "{http://www.w3.org/XML/1998/namespace}id"


def _parse_bibliography(root) -> list[Reference]:
    refs = []
    for list_bibl in _iter_local(root, "listBibl"):
        for entry in _iter_local(list_bibl, "biblStruct"):
            ref_id = entry.get(_XML_ID) or entry.get("id") or f"ref{len(refs)}"
            raw = _text_of(entry)
            if not raw:
                continue
            title = None
            for node in _iter_local(entry, "title"):
                if _text_of(node):
                    title = _text_of(node)
                    break
            doi = None
            for node in _iter_local(entry, "idno"):
                if node.get("type", "").upper() == "DOI":
                    candidate = _text_of(node)
                    if DOI_RE.match(candidate):
                        doi = candidate
                    break
            year = None
            for node in _iter_local(entry, "date"):
                when = node.get("when") or _text_of(node)
                match = re.search(r"\b(\d{4})\b", when or "")
                if match:
                    year = int(match.group(1))
                    break
            refs.append(
                Reference(ref_id=ref_id, raw=raw, parsed_title=title, doi=doi, year=year)
            )
        break  # first listBibl is the bibliography
    return refs


# ---------------------------------------------------------------------------
# Serialization (stable ordering so re-parse comparisons are byte-level)
# ---------------------------------------------------------------------------

def rect_to_dict(rect: PageRect) -> dict:
    return {"page": rect.page, "x0": rect.x0, "y0": rect.y0, "x1": rect.x1, "y1": rect.y1}


def rect_from_dict(data: dict) -> PageRect:
    return PageRect(
        page=int(data["page"]),
        x0=float(data["x0"]),
        y0=float(data["y0"]),
        x1=float(data["x1"]),
        y1=float(data["y1"]),
    )


def span_to_dict(span: TextSpan) -> dict:
    return {
        "span_id": span.span_id,
        "text": span.text,
        "page": span.page,
        "rects": [rect_to_dict(r) for r in span.rects],
    }


def span_from_dict(data: dict) -> TextSpan:
    return TextSpan(
        span_id=data["span_id"],
        text=data["text"],
        page=int(data["page"]),
        rects=[rect_from_dict(r) for r in data["rects"]],
    )


def doc_to_dict(doc: ParsedDocument) -> dict:
    return {
        "doc_id": doc.doc_id,
        "title": doc.title,
        "abstract": doc.abstract,
        "sections": [
            {
                "index": sec.index,
                "heading": sec.heading,
                "spans": [span_to_dict(s) for s in sec.spans],
            }
            for sec in doc.sections
        ],
        "references": [
            {
                "ref_id": r.ref_id,
                "raw": r.raw,
                "parsed_title": r.parsed_title,
                "doi": r.doi,
                "year": r.year,
            }
            for r in doc.references
        ],
        "inline_citations": [
            {
                "span": span_to_dict(c.span),
                "target": c.target,
                "tei_pointer": c.tei_pointer,
            }
            for c in doc.inline_citations
        ],
        "word_count": doc.word_count,
        "keywords": list(doc.keywords),
        "venue": doc.venue,
    }


def doc_from_dict(data: dict) -> ParsedDocument:
    return ParsedDocument(
        doc_id=data["doc_id"],
        title=data["title"],
        abstract=data["abstract"],
        sections=[
            Section(
                index=int(s["index"]),
                heading=s["heading"],
                spans=[span_from_dict(sp) for sp in s["spans"]],
            )
            for s in data["sections"]
        ],
        references=[
            Reference(
                ref_id=r["ref_id"],
                raw=r["raw"],
                parsed_title=r.get("parsed_title"),
                doi=r.get("doi"),
                year=r.get("year"),
            )
            for r in data["references"]
        ],
        inline_citations=[
            InlineCitation(
                span=span_from_dict(c["span"]),
                target=c.get("target"),
                tei_pointer=c.get("tei_pointer"),
            )
            for c in data["inline_citations"]
        ],
        word_count=int(data["word_count"]),
        keywords=list(data.get("keywords", [])),
        venue=data.get("venue"),
    )
