"""Tokenizer shared by the model, presetting, rule and extension formats."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


class ParseError(Exception):
    """Raised for malformed input; carries a 1-based line/column."""

    def __init__(self, message: str, line: int, column: int, source: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{column}: {message}")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, INT, STRING, SYM, EOF
    value: str
    line: int
    column: int
    raw: str = ""


_SYMBOLS = ("=>", "&&", "||", "..", "<<", ">>", "->",
            "{", "}", "(", ")", "[", "]", "=", ",", ".", ";", ":", "!", "*", "#")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT = re.compile(r"[0-9]+")
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "{": "{", "}": "}", "t": "\t"}


def fold_line_breaks(raw: str) -> str:
    """Collapse a raw line break inside a string literal, with the indentation
    around it, into one space (wrapped strings are typography, not content)."""
    return re.sub(r"[ \t]*\r?\n[ \t]*", " ", raw)


def unescape(raw: str) -> str:
    out = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch == "\\" and i + 1 < len(raw):
            out.append(_ESCAPES.get(raw[i + 1], raw[i + 1]))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def tokenize(text: str, source: str | None = None) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    line_start = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            line_start = i + 1
            i += 1
            continue
        if ch in " \t\r﻿":
            i += 1
            continue
        col = i - line_start + 1
        if text.startswith("//", i):
            end = text.find("\n", i)
            i = n if end < 0 else end
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                raise ParseError("unterminated block comment", line, col, source)
            chunk = text[i:end + 2]
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = i + chunk.rfind("\n") + 1
            i = end + 2
            continue
        if ch == '"':
            j = i + 1
            start_line, start_col = line, col
            while j < n and text[j] != '"':
                if text[j] == "\\":
                    if j + 1 >= n:
                        break
                    if text[j + 1] not in _ESCAPES:
                        raise ParseError(
                            f"invalid escape '\\{text[j + 1]}' in string",
                            line, j - line_start + 1, source)
                    j += 2
                    continue
                if text[j] == "\n":
                    line += 1
                    line_start = j + 1
                j += 1
            if j >= n:
                raise ParseError("unterminated string literal", start_line, start_col, source)
            raw = fold_line_breaks(text[i + 1:j])
            tokens.append(Token("STRING", unescape(raw), start_line, start_col, raw))
            i = j + 1
            continue
        m = _IDENT.match(text, i)
        if m:
            tokens.append(Token("IDENT", m.group(), line, col))
            i = m.end()
            continue
        m = _INT.match(text, i)
        if m:
            tokens.append(Token("INT", m.group(), line, col))
            i = m.end()
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token("SYM", sym, line, col))
                i += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col, source)
    tokens.append(Token("EOF", "", line, i - line_start + 1))
    return tokens


def describe(tok: Token) -> str:
    if tok.kind == "EOF":
        return "end of input"
    if tok.kind == "STRING":
        return f'string "{tok.raw}"'
    return f"'{tok.value}'"


class TokenStream:
    """Cursor over a token list with expectation helpers for recursive descent."""

    def __init__(self, tokens: Sequence[Token], source: str | None = None):
        self.tokens = tokens
        self.pos = 0
        self.source = source

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        idx = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[idx]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, kind: str, value: str | None = None) -> bool:
        tok = self.current
        return tok.kind == kind and (value is None or tok.value == value)

    def at_sym(self, value: str) -> bool:
        return self.at("SYM", value)

    def at_keyword(self, value: str) -> bool:
        return self.at("IDENT", value)

    def accept_sym(self, value: str) -> Token | None:
        if self.at_sym(value):
            return self.advance()
        return None

    def error(self, expected: Iterable[str], tok: Token | None = None) -> ParseError:
        tok = tok or self.current
        exp = ", ".join(expected)
        return ParseError(f"expected {exp} but found {describe(tok)}",
                          tok.line, tok.column, self.source)

    def expect(self, kind: str, value: str | None = None, what: str | None = None) -> Token:
        if self.at(kind, value):
            return self.advance()
        label = what or (f"'{value}'" if value is not None else kind.lower())
        raise self.error([label])

    def expect_sym(self, value: str) -> Token:
        return self.expect("SYM", value)

    def expect_keyword(self, value: str) -> Token:
        return self.expect("IDENT", value, f"'{value}'")

    def expect_ident(self, what: str = "identifier") -> Token:
        return self.expect("IDENT", None, what)

    def expect_string(self, what: str = "string literal") -> Token:
        return self.expect("STRING", None, what)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens[self.pos:])
