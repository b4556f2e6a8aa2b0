"""Tokenizer for the pipeline definition language.

Whitespace-insensitive block language: ``{`` ``}``, double-quoted strings
with ``\\"`` and ``\\\\`` escapes, bare words ``[A-Za-z0-9_]+``, and ``#``
line comments.  The lexer never raises on bad input; it records
diagnostics and keeps going where it safely can.
"""

from __future__ import annotations

from dataclasses import dataclass

from forge.dsl.model import Diagnostic

LBRACE = "lbrace"
RBRACE = "rbrace"
STRING = "string"
WORD = "word"
EOF = "eof"

_WORD_CHARS = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_"
)


@dataclass(frozen=True)
class Token:
    type: str
    value: str
    line: int
    col: int


def tokenize(text: str, source: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    line, col = 1, 1
    i, n = 0, len(text)

    def err(message: str, at_line: int, at_col: int) -> None:
        diags.append(Diagnostic(source, at_line, at_col, message))

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r\f\v":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "{":
            tokens.append(Token(LBRACE, "{", line, col))
            i += 1
            col += 1
            continue
        if ch == "}":
            tokens.append(Token(RBRACE, "}", line, col))
            i += 1
            col += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            buf: list[str] = []
            closed = False
            while i < n:
                c = text[i]
                if c == "\n":
                    break
                if c == "\\":
                    if i + 1 < n and text[i + 1] in ('"', "\\"):
                        buf.append(text[i + 1])
                        i += 2
                        col += 2
                        continue
                    err(
                        f"unsupported escape sequence '\\{text[i + 1] if i + 1 < n else ''}'",
                        line,
                        col,
                    )
                    i += 1
                    col += 1
                    continue
                if c == '"':
                    closed = True
                    i += 1
                    col += 1
                    break
                buf.append(c)
                i += 1
                col += 1
            if not closed:
                err("unterminated string literal", start_line, start_col)
            tokens.append(Token(STRING, "".join(buf), start_line, start_col))
            continue
        if ch in _WORD_CHARS:
            start_col = col
            start = i
            while i < n and text[i] in _WORD_CHARS:
                i += 1
                col += 1
            tokens.append(Token(WORD, text[start:i], line, start_col))
            continue
        err(f"unexpected character {ch!r}", line, col)
        i += 1
        col += 1

    tokens.append(Token(EOF, "", line, col))
    return tokens, diags
