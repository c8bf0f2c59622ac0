"""JSON loading that remembers where each object started in the source text."""

from __future__ import annotations

import json
from dataclasses import dataclass
from json.decoder import JSONObject


@dataclass(frozen=True, order=True)
class Pos:
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


def offset_to_pos(text: str, offset: int) -> Pos:
    offset = max(0, min(offset, len(text)))
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return Pos(line, col)


class PosDict(dict):
    """A dict that knows the source span of the JSON object it came from."""

    text: str = ""
    start: int = 0
    end: int = 0

    @property
    def pos(self) -> Pos:
        return offset_to_pos(self.text, self.start)

    def key_pos(self, key: str) -> Pos:
        """Position of ``key`` inside this object (falls back to the object)."""
        needle = json.dumps(key)
        idx = self.text.find(needle, self.start, self.end)
        return offset_to_pos(self.text, idx if idx >= 0 else self.start)


class JSONPosError(ValueError):
    def __init__(self, message: str, pos: Pos):
        super().__init__(f"{pos}: {message}")
        self.message = message
        self.pos = pos


def loads(text: str):
    """Parse JSON; every object in the result is a PosDict."""

    def parse_object(s_and_end, *args, **kwargs):
        s, end = s_and_end
        obj, new_end = JSONObject(s_and_end, *args, **kwargs)
        out = PosDict(obj)
        out.text = s
        out.start = end - 1
        out.end = new_end
        return out, new_end

    decoder = json.JSONDecoder()
    decoder.parse_object = parse_object
    decoder.scan_once = json.scanner.py_make_scanner(decoder)
    try:
        return decoder.decode(text)
    except json.JSONDecodeError as exc:
        raise JSONPosError(exc.msg, Pos(exc.lineno, exc.colno)) from None


def pos_of(obj, text: str = "") -> Pos:
    if isinstance(obj, PosDict):
        return obj.pos
    return Pos(1, 1)
