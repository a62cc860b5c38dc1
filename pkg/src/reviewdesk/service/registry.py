"""Parsed-document registry with persistence for the original PDF bytes."""

from __future__ import annotations

import threading

from ..errors import UnknownDocument
from ..ingest import ParsedDocument, doc_from_dict, doc_to_dict
from ..storage import MemoryBackend, StorageBackend


class DocumentRegistry:
    def __init__(self, backend: StorageBackend | None = None):
        self.backend = backend or MemoryBackend()
        self._docs: dict[str, ParsedDocument] = {}
        self._lock = threading.Lock()
        for key, record in self.backend.load_all("documents").items():
            self._docs[key] = doc_from_dict(record)

    def add(self, doc: ParsedDocument, pdf: bytes | None = None) -> None:
        with self._lock:
            self._docs[doc.doc_id] = doc
            self.backend.save("documents", doc.doc_id, doc_to_dict(doc))
            if pdf is not None:
                self.backend.save_blob("pdfs", doc.doc_id, pdf)

    def get(self, doc_id: str) -> ParsedDocument:
        with self._lock:
            try:
                return self._docs[doc_id]
            except KeyError:
                raise UnknownDocument(f"no document {doc_id!r}") from None

    def get_pdf(self, doc_id: str) -> bytes | None:
        self.get(doc_id)
        return self.backend.load_blob("pdfs", doc_id)

    def ids(self) -> list[str]:
        with self._lock:
            return sorted(self._docs)
