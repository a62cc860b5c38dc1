"""Workflow limits: word caps, bullet counts, and UI thresholds."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Limits:
    """Caps applied across cue generation, recommendations, and synthesis."""

    max_cue_words: int = 25
    topic_max_words: int = 10
    detail_min_words: int = 10
    recommendation_count: int = 3
    outline_bullets_min: int = 3
    outline_bullets_max: int = 5
    summarize_visible_after_notes: int = 2

    def __post_init__(self):
        for name in (
            "max_cue_words",
            "topic_max_words",
            "detail_min_words",
            "recommendation_count",
            "outline_bullets_min",
            "outline_bullets_max",
            "summarize_visible_after_notes",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.outline_bullets_min > self.outline_bullets_max:
            raise ValueError("outline_bullets_min must not exceed outline_bullets_max")


DEFAULT_LIMITS = Limits()


def word_count(text: str) -> int:
    """Whitespace-delimited token count, the counting rule used everywhere."""
    return len(text.split())
