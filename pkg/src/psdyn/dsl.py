"""Text form of switching schemes.

    scheme := "[" entry ("," entry)* "]" "@" "h" "=" number
    entry  := integer ("*" | "∘") number

Whitespace is allowed between any two tokens.  Errors carry the byte offset
(UTF-8) and the offending token.
"""
from __future__ import annotations

import re

from .switching import SwitchingScheme

_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_WORD = re.compile(r"[^\s,\[\]@*∘=]+")
_TIMES = ("*", "∘")


class SchemeSyntaxError(ValueError):
    def __init__(self, message, text, pos, token):
        self.message = message
        self.text = text
        self.offset = len(text[:pos].encode("utf-8"))
        self.token = token
        super().__init__(f"byte {self.offset}: {message} (at {token!r})")


class _Scanner:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def token_here(self):
        self.skip_ws()
        if self.pos >= len(self.text):
            return "<end of input>"
        m = _WORD.match(self.text, self.pos)
        return m.group(0) if m else self.text[self.pos]

    def fail(self, message, pos=None, token=None):
        if pos is None:
            token = self.token_here()
            pos = self.pos
        raise SchemeSyntaxError(message, self.text, pos, token)

    def expect(self, chars, what):
        if self.peek() in chars and self.peek() != "":
            c = self.text[self.pos]
            self.pos += 1
            return c
        self.fail(f"expected {what}")

    def number(self, what):
        self.skip_ws()
        start = self.pos
        m = _NUMBER.match(self.text, start)
        word = _WORD.match(self.text, start)
        if m is None or (word is not None and word.end() > m.end()):
            self.fail(f"malformed number for {what}")
        self.pos = m.end()
        return m.group(0), start


def parse_scheme(src: str) -> SwitchingScheme:
    """Parse ``"[1*0.422, 1*0.424] @ h=0.005"`` into a :class:`SwitchingScheme`."""
    if not isinstance(src, str):
        raise TypeError("scheme source must be a string")
    sc = _Scanner(src)
    sc.expect("[", "'[' opening the entry list")
    entries = []
    while True:
        text, at = sc.number("weight")
        if not re.fullmatch(r"[+-]?\d+", text):
            sc.fail("weight must be an integer", at, text)
        weight = int(text)
        if weight < 1:
            sc.fail("weight must be a positive integer", at, text)
        if not re.fullmatch(r"\+?[1-9]\d*", text):
            sc.fail("weight has leading zeros", at, text)
        sc.expect(_TIMES, "'*' between weight and value")
        text, at = sc.number("parameter value")
        entries.append((weight, float(text)))
        sep = sc.peek()
        if sep == ",":
            sc.pos += 1
            continue
        if sep == "]":
            close = sc.pos
            sc.pos += 1
            break
        sc.fail("expected ',' or ']' after an entry")
    if len(entries) < 2:
        sc.fail(f"N must exceed 1 (got {len(entries)} entry)", close, "]")
    if sc.peek() == "":
        sc.fail("missing '@ h=<step>' clause")
    sc.expect("@", "'@ h=<step>' after the entry list")
    if sc.peek() != "h":
        sc.fail("expected 'h'")
    sc.pos += 1
    sc.expect("=", "'=' after 'h'")
    text, at = sc.number("step size h")
    h = float(text)
    if not h > 0:
        sc.fail("step size h must be positive", at, text)
    if sc.peek() != "":
        sc.fail("trailing input after scheme")
    return SwitchingScheme(tuple(entries), h)


def print_scheme(scheme: SwitchingScheme) -> str:
    """Canonical text; floats use the shortest repr that round-trips exactly."""
    body = ", ".join(f"{m}*{p!r}" for m, p in scheme.entries)
    return f"[{body}] @ h={scheme.h!r}"
