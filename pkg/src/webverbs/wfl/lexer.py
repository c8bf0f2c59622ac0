"""Tokenizer for workflow programs and contract predicates."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from ..jsonpos import Pos

KEYWORDS = {"let", "for", "in", "if", "else", "return", "grant", "true", "false", "new", "type"}

# order matters: longest operators first
OPERATORS = [
    "::", "&&", "||", "<=", ">=", "==", "!=", "+=", "-=",
    "<", ">", "+", "-", "*", "/", "!", "=", ".", ",", ";", ":",
    "(", ")", "{", "}", "[", "]",
]

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<money>\d+(?:\.\d{1,2})?[ \t]+[A-Z]{3}(?![A-Za-z0-9_]))
  | (?P<float>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>"""
    + "|".join(re.escape(op) for op in OPERATORS)
    + r""")
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, keyword, int, float, money, string, op, eof
    text: str
    pos: Pos
    value: object = None

    def is_op(self, *ops: str) -> bool:
        return self.kind == "op" and self.text in ops

    def is_kw(self, *kws: str) -> bool:
        return self.kind == "keyword" and self.text in kws

    def describe(self) -> str:
        if self.kind == "eof":
            return "end of input"
        return repr(self.text)


class LexError(Exception):
    def __init__(self, message: str, pos: Pos):
        super().__init__(f"{pos}: {message}")
        self.message = message
        self.pos = pos


class _LineIndex:
    def __init__(self, text: str):
        self.starts = [0]
        for i, ch in enumerate(text):
            if ch == "\n":
                self.starts.append(i + 1)

    def pos(self, offset: int) -> Pos:
        lo, hi = 0, len(self.starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return Pos(lo + 1, offset - self.starts[lo] + 1)


def tokenize(text: str) -> list[Token]:
    index = _LineIndex(text)
    tokens: list[Token] = []
    offset = 0
    while offset < len(text):
        m = _TOKEN_RE.match(text, offset)
        if not m:
            raise LexError(f"unexpected character {text[offset]!r}", index.pos(offset))
        kind = m.lastgroup
        lexeme = m.group(kind)
        pos = index.pos(offset)
        offset = m.end()
        if kind in ("ws", "comment"):
            continue
        if kind == "ident":
            tokens.append(Token("keyword" if lexeme in KEYWORDS else "ident", lexeme, pos))
        elif kind == "int":
            tokens.append(Token("int", lexeme, pos, int(lexeme)))
        elif kind == "float":
            tokens.append(Token("float", lexeme, pos, float(lexeme)))
        elif kind == "money":
            number, currency = lexeme.split()
            whole, _, frac = number.partition(".")
            minor = int(whole) * 100 + int(frac.ljust(2, "0") or "0")
            tokens.append(Token("money", lexeme, pos, (minor, currency)))
        elif kind == "string":
            try:
                value = json.loads(lexeme)
            except json.JSONDecodeError:
                raise LexError("invalid string escape", pos) from None
            tokens.append(Token("string", lexeme, pos, value))
        else:
            tokens.append(Token("op", lexeme, pos))
    tokens.append(Token("eof", "", index.pos(len(text))))
    return tokens
