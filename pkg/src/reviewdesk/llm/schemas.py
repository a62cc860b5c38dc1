"""Registered JSON response shapes and their validators.

Every chat request names one of these shapes; the client batch-parses the
streamed text and validates it before handing it to callers.
"""

from __future__ import annotations

from typing import Any

ASPECT_KEYS = ("importance", "novelty", "validity", "clarity")


class SchemaViolation(ValueError):
    """Provider output does not match the registered shape."""


def _require_str(value: Any, where: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise SchemaViolation(f"{where} must be a non-empty string")
    return value


def _require_list(value: Any, where: str) -> list:
    if not isinstance(value, list):
        raise SchemaViolation(f"{where} must be a list")
    return value


def _validate_section_cues(obj: Any) -> None:
    if not isinstance(obj, dict):
        raise SchemaViolation("section cue response must be a JSON object")
    missing = [k for k in ASPECT_KEYS if k not in obj]
    if missing:
        raise SchemaViolation(f"missing aspect keys: {missing}")
    extra = [k for k in obj if k not in ASPECT_KEYS]
    if extra:
        raise SchemaViolation(f"unexpected keys: {extra}")
    for key in ASPECT_KEYS:
        _require_str(obj[key], f"question for {key!r}")


def _validate_phrase_cue(obj: Any) -> None:
    if not isinstance(obj, dict) or "question" not in obj:
        raise SchemaViolation('phrase cue response must be an object with a "question" key')
    _require_str(obj["question"], "question")


def _validate_outline_items(items: list, where: str) -> None:
    for n, item in enumerate(items):
        if not isinstance(item, dict):
            raise SchemaViolation(f"{where}[{n}] must be an object")
        _require_str(item.get("topic"), f"{where}[{n}].topic")
        note_ids = item.get("note_ids", [])
        _require_list(note_ids, f"{where}[{n}].note_ids")
        for note_id in note_ids:
            if not isinstance(note_id, str):
                raise SchemaViolation(f"{where}[{n}].note_ids entries must be strings")
        if "detail" in item and item["detail"] is not None:
            _require_str(item["detail"], f"{where}[{n}].detail")


def _validate_outline(obj: Any) -> None:
    if not isinstance(obj, dict):
        raise SchemaViolation("outline response must be a JSON object")
    for key in ("summary", "strengths", "weaknesses"):
        if key not in obj:
            raise SchemaViolation(f"outline response missing {key!r}")
    for n, bullet in enumerate(_require_list(obj["summary"], "summary")):
        _require_str(bullet, f"summary[{n}]")
    _validate_outline_items(_require_list(obj["strengths"], "strengths"), "strengths")
    _validate_outline_items(_require_list(obj["weaknesses"], "weaknesses"), "weaknesses")


def _validate_expansion(obj: Any) -> None:
    if not isinstance(obj, dict):
        raise SchemaViolation("expansion response must be a JSON object")
    for key in ("strengths", "weaknesses"):
        items = _require_list(obj.get(key), key)
        for n, item in enumerate(items):
            if not isinstance(item, dict):
                raise SchemaViolation(f"{key}[{n}] must be an object")
            _require_str(item.get("topic"), f"{key}[{n}].topic")
            _require_str(item.get("detail"), f"{key}[{n}].detail")


_VALIDATORS = {
    "section_cues": _validate_section_cues,
    "phrase_cue": _validate_phrase_cue,
    "outline": _validate_outline,
    "expansion": _validate_expansion,
}

REGISTERED_SCHEMAS = frozenset(_VALIDATORS)


def validate(schema_id: str, obj: Any) -> None:
    """Raise SchemaViolation unless ``obj`` matches the registered shape."""
    try:
        validator = _VALIDATORS[schema_id]
    except KeyError:
        raise SchemaViolation(f"unknown schema {schema_id!r}") from None
    validator(obj)
