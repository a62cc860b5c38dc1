"""Client for the external PDF structure-extraction service."""

from __future__ import annotations

from typing import Protocol

import httpx

from ..errors import ExtractionServiceError

# Element classes that must carry coordinates in the TEI output.
COORDINATE_ELEMENTS = "s,ref,biblStruct,head"


class ExtractionClient(Protocol):
    def extract(self, pdf: bytes) -> bytes:
        """PDF bytes in, TEI XML bytes out."""
        ...


class HttpExtractionClient:
    """Talks to a structure-extraction HTTP service (multipart upload)."""

    def __init__(
        self,
        base_url: str,
        timeout: float = 120.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def extract(self, pdf: bytes) -> bytes:
        try:
            response = self._client.post(
                f"{self.base_url}/api/processFulltextDocument",
                files={"input": ("upload.pdf", pdf, "application/pdf")},
                data={"teiCoordinates": COORDINATE_ELEMENTS, "segmentSentences": "1"},
            )
        except httpx.HTTPError as exc:
            raise ExtractionServiceError(
                f"extraction service unreachable: {exc}", retry_after=30.0
            ) from exc
        if response.status_code >= 400:
            retry_after = None
            header = response.headers.get("Retry-After")
            if header and header.isdigit():
                retry_after = float(header)
            raise ExtractionServiceError(
                f"extraction service returned HTTP {response.status_code}",
                retry_after=retry_after or 30.0,
            )
        return response.content


class StaticExtractionClient:
    """Serves fixed TEI bytes; the offline stand-in for tests and demos."""

    def __init__(self, tei: bytes):
        self.tei = tei
        self.calls = 0

    def extract(self, pdf: bytes) -> bytes:
        self.calls += 1
        return self.tei
