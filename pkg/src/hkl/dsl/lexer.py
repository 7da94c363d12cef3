"""Tokenizer for ``.hkl`` source text."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import Diagnostic

KEYWORDS = frozenset("""
    signature sorts set const fn injective total partial
    structure module left right net place transition init elm guard arc system
""".split())

TOP_LEVEL = frozenset({"signature", "structure", "module", "system"})

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

_PUNCT = ("->", "==", "!=", "{", "}", "(", ")", ";", ",", ":", "=", ".", "•")


@dataclass(frozen=True)
class Token:
    kind: str   # ident, keyword, int, string, punct, eof
    value: object
    line: int
    col: int

    def __str__(self):
        if self.kind == "eof":
            return "end of file"
        if self.kind == "string":
            return repr(self.value)
        return f"'{self.value}'"


def is_plain_name(name: str) -> bool:
    return bool(IDENT_RE.match(name)) and name not in KEYWORDS


def tokenize(text: str, path: str | None = None):
    """Return ``(tokens, diagnostics)``; never raises on malformed input."""
    tokens = []
    diags = []
    i, line, col = 0, 1, 1
    n = len(text)

    def err(msg, l, c):
        diags.append(Diagnostic("lex", msg, file=path, line=l, col=c))

    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch in " \t\r\ufeff":
            i, col = i + 1, col + 1
            continue
        if ch == "#" or text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch.isascii() and (ch.isalpha() or ch == "_"):
            j = i
            while j < n and text[j].isascii() and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            tokens.append(Token("keyword" if word in KEYWORDS else "ident", word,
                                line, start_col))
            col += j - i
            i = j
            continue
        if ch.isascii() and ch.isdigit():
            j = i
            while j < n and text[j].isascii() and text[j].isdigit():
                j += 1
            if j < n and text[j].isascii() and (text[j].isalpha() or text[j] == "_"):
                err(f"malformed number {text[i:j + 1]!r}", line, start_col)
            tokens.append(Token("int", int(text[i:j]), line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            buf = []
            closed = False
            while j < n and text[j] != "\n":
                if text[j] == "\\" and j + 1 < n and text[j + 1] in '"\\':
                    buf.append(text[j + 1])
                    j += 2
                    continue
                if text[j] == '"':
                    closed = True
                    break
                buf.append(text[j])
                j += 1
            if not closed:
                err("unterminated string", line, start_col)
                col += j - i
                i = j
                continue
            tokens.append(Token("string", "".join(buf), line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                tokens.append(Token("punct", "." if p == "•" else p, line, start_col))
                i += len(p)
                col += len(p)
                break
        else:
            err(f"unexpected character {ch!r}", line, start_col)
            i += 1
            col += 1
    tokens.append(Token("eof", None, line, col))
    return tokens, diags
