"""Incremental parsing of streamed JSON object responses.

``incremental_parse`` consumes the client's StreamEvents and emits each
completed top-level field as soon as its JSON fragment closes: elements of
top-level arrays come out one by one (an outline item is usable before the
next section starts streaming), scalar and object fields come out whole.
The terminal emission is the batch parse of the validated response, so the
final result is identical to parsing the whole transcript at once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterable, Iterator

from ..errors import ProviderError
from .client import StreamEvent, raise_from_descriptor


@dataclass(frozen=True)
class PartialField:
    """One completed fragment: ``index`` is set for top-level array elements."""

    field: str
    index: int | None
    value: Any


@dataclass(frozen=True)
class FinalResult:
    value: Any


@dataclass
class _Frame:
    """The single value currently being tracked for emission."""

    key: str
    index: int | None
    start: int
    kind: str  # string | scalar | container
    base_depth: int


class _Scanner:
    """Single-pass boundary finder for one streamed JSON object.

    Tracks just enough state (string/escape mode, container stack, root-object
    key cycle, one open value frame) to slice out completed top-level values
    and top-level array elements; each slice is handed to ``json.loads``.
    """

    def __init__(self):
        self.buf = ""
        self.pos = 0
        self.in_string = False
        self.escape = False
        self.stack: list[str] = []
        self.root_open = False
        self.root_is_object = False
        self.expect = None  # key | colon | value | comma (root object cycle)
        self.key_start: int | None = None
        self.cur_key: str | None = None
        self.arr_key: str | None = None  # streamed top-level array, when inside one
        self.arr_index = 0
        self.arr_expect = None  # value | comma
        self.frame: _Frame | None = None

    # -- helpers -------------------------------------------------------------

    def _at_root_object(self) -> bool:
        return self.root_is_object and len(self.stack) == 1 and self.frame is None

    def _in_streamed_array(self) -> bool:
        return self.arr_key is not None and len(self.stack) == 2 and self.frame is None

    def _open_frame(self, i: int, kind: str) -> None:
        if self._at_root_object() and self.expect == "value":
            self.frame = _Frame(self.cur_key or "", None, i, kind, len(self.stack))
            self.expect = None
        elif self._in_streamed_array() and self.arr_expect == "value":
            self.frame = _Frame(self.arr_key or "", self.arr_index, i, kind, len(self.stack))
            self.arr_expect = None

    def _emit(self, end: int, out: list[PartialField]) -> None:
        frame = self.frame
        assert frame is not None
        fragment = self.buf[frame.start : end]
        out.append(PartialField(frame.key, frame.index, json.loads(fragment)))
        if frame.index is not None:
            self.arr_index += 1
            self.arr_expect = "comma"
        else:
            self.expect = "comma"
        self.frame = None

    def _maybe_end_scalar(self, i: int, out: list[PartialField]) -> None:
        if self.frame is not None and self.frame.kind == "scalar":
            self._emit(i, out)

    # -- main loop -----------------------------------------------------------

    def feed(self, chunk: str) -> list[PartialField]:
        self.buf += chunk
        out: list[PartialField] = []
        buf = self.buf
        i = self.pos
        while i < len(buf):
            ch = buf[i]
            if self.in_string:
                if self.escape:
                    self.escape = False
                elif ch == "\\":
                    self.escape = True
                elif ch == '"':
                    self.in_string = False
                    if self.key_start is not None:
                        self.cur_key = json.loads(buf[self.key_start : i + 1])
                        self.key_start = None
                        self.expect = "colon"
                    elif (
                        self.frame is not None
                        and self.frame.kind == "string"
                        and len(self.stack) == self.frame.base_depth
                    ):
                        self._emit(i + 1, out)
                i += 1
                continue

            if ch == '"':
                if self.frame is None:
                    if self._at_root_object() and self.expect == "key":
                        self.key_start = i
                    else:
                        self._open_frame(i, "string")
                self.in_string = True
                i += 1
                continue

            if ch == "{":
                if not self.root_open:
                    self.root_open = True
                    self.root_is_object = True
                    self.expect = "key"
                elif self.frame is None:
                    self._open_frame(i, "container")
                self.stack.append("{")
                i += 1
                continue

            if ch == "[":
                if not self.root_open:
                    self.root_open = True  # array root: no per-field tracking
                elif self.frame is None:
                    if self._at_root_object() and self.expect == "value":
                        self.arr_key = self.cur_key
                        self.arr_index = 0
                        self.arr_expect = "value"
                        self.expect = None
                    else:
                        self._open_frame(i, "container")
                self.stack.append("[")
                i += 1
                continue

            if ch in "}]":
                self._maybe_end_scalar(i, out)
                if self.stack:
                    self.stack.pop()
                if (
                    self.frame is not None
                    and self.frame.kind == "container"
                    and len(self.stack) == self.frame.base_depth
                ):
                    self._emit(i + 1, out)
                elif self.arr_key is not None and len(self.stack) == 1:
                    if self.arr_index == 0:
                        # Empty array: no elements were streamed, so emit the
                        # completed field itself.
                        out.append(PartialField(self.arr_key, None, []))
                    self.arr_key = None
                    self.arr_expect = None
                    self.expect = "comma"
                i += 1
                continue

            if ch == ",":
                self._maybe_end_scalar(i, out)
                if self.frame is None:
                    if self._in_streamed_array():
                        self.arr_expect = "value"
                    elif self._at_root_object():
                        self.expect = "key"
                i += 1
                continue

            if ch == ":":
                if self.frame is None and self._at_root_object() and self.expect == "colon":
                    self.expect = "value"
                i += 1
                continue

            if ch.isspace():
                self._maybe_end_scalar(i, out)
                i += 1
                continue

            # number / true / false / null characters
            if self.frame is None:
                self._open_frame(i, "scalar")
            i += 1

        self.pos = i
        return out


def incremental_parse(
    events: Iterable[StreamEvent],
) -> Iterator[PartialField | FinalResult]:
    """Partial results per completed fragment, then the batch-parse result.

    Resets its scanner whenever the ``attempt`` counter advances (transport
    retry or schema re-ask), so stale fragments never leak into partials.
    Errors from the underlying stream are re-raised.
    """
    scanner = _Scanner()
    attempt: int | None = None
    final_text: str | None = None
    for event in events:
        if event.kind == "delta":
            if attempt is None or event.attempt != attempt:
                scanner = _Scanner()
                attempt = event.attempt
            yield from scanner.feed(event.payload)
        elif event.kind == "done":
            final_text = event.payload
            break
        elif event.kind == "error":
            raise_from_descriptor(event.payload)
    if final_text is None:
        raise ProviderError("stream ended without a terminal event")
    yield FinalResult(json.loads(final_text))
