"""Exception types shared across the review workspace modules."""


class ReviewDeskError(Exception):
    """Base class for all domain errors."""

    #: Stable machine-readable code, used in API error payloads.
    code = "Error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__


# --- ingest ---------------------------------------------------------------

class ParseError(ReviewDeskError):
    code = "ParseError"


class EmptyDocument(ReviewDeskError):
    code = "EmptyDocument"


class UnknownSpan(ReviewDeskError):
    code = "UnknownSpan"


# --- annotation -----------------------------------------------------------

class UnknownDocument(ReviewDeskError):
    code = "UnknownDocument"


class InvalidRect(ReviewDeskError):
    code = "InvalidRect"


class UnknownHighlight(ReviewDeskError):
    code = "UnknownHighlight"


class UnknownTag(ReviewDeskError):
    code = "UnknownTag"


class UnknownNote(ReviewDeskError):
    code = "UnknownNote"


# --- cues -----------------------------------------------------------------

class MissingContent(ReviewDeskError):
    code = "MissingContent"


class MissingAspect(ReviewDeskError):
    code = "MissingAspect"


class UnknownCue(ReviewDeskError):
    code = "UnknownCue"


# --- llm client -----------------------------------------------------------

class ProviderError(ReviewDeskError):
    """Transport-level failure after retries were exhausted."""

    code = "ProviderError"


class SchemaError(ReviewDeskError):
    """Provider output failed schema validation, including after one re-ask."""

    code = "SchemaError"


# --- citations ------------------------------------------------------------

class UnknownReference(ReviewDeskError):
    code = "UnknownReference"


class LookupFailed(ReviewDeskError):
    """Metadata API unreachable and no warm cache entry to serve."""

    code = "LookupFailed"


class NotFound(ReviewDeskError):
    code = "NotFound"


# --- synthesis ------------------------------------------------------------

class NoNotes(ReviewDeskError):
    code = "NoNotes"


class AlreadyExpanded(ReviewDeskError):
    code = "AlreadyExpanded"


class UnknownItem(ReviewDeskError):
    code = "UnknownItem"


class UnknownDraft(ReviewDeskError):
    code = "UnknownDraft"


class EmptyReview(ReviewDeskError):
    code = "EmptyReview"


class ProvenanceError(ReviewDeskError):
    """An outline item points at a note id that does not exist after repair."""

    code = "ProvenanceError"


class Busy(ReviewDeskError):
    """A synthesis or expansion stream is already open for this document."""

    code = "Busy"


# --- service --------------------------------------------------------------

class NotAPdf(ReviewDeskError):
    code = "NotAPdf"


class ExtractionServiceError(ReviewDeskError):
    code = "ExtractionServiceError"

    def __init__(self, message: str = "", retry_after: float | None = None):
        super().__init__(message)
        self.retry_after = retry_after


class UnknownSession(ReviewDeskError):
    code = "UnknownSession"


class ChecklistIncomplete(ReviewDeskError):
    code = "ChecklistIncomplete"


class SessionSubmitted(ReviewDeskError):
    """Mutation attempted on an already-submitted (immutable) session."""

    code = "SessionSubmitted"
