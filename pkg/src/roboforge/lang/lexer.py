"""Tokenizer with Python-style significant indentation.

Comments (``#`` to end of line) and blank lines never reach the parser.
String literals are tokenized so that statement-level strings can be
treated as comments; strings anywhere else are rejected later.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError, SourceSpan

NEWLINE = "NEWLINE"
INDENT = "INDENT"
DEDENT = "DEDENT"
NAME = "NAME"
NUMBER = "NUMBER"
STRING = "STRING"
OP = "OP"
EOF = "EOF"

_OPS = ("+", "-", "*", "/", "(", ")", "[", "]", ",", "=", ".", ":")
_TAB_WIDTH = 4


@dataclass(frozen=True)
class Token:
    type: str
    value: str
    line: int
    column: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.column)


def _is_name_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _is_name_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


class Lexer:
    def __init__(self, source: str):
        self.lines = source.splitlines()
        self.tokens: list[Token] = []
        self.indents = [0]
        # (line_idx, col_idx) cursor; columns are 0-based internally
        self.li = 0
        self.ci = 0

    def error(self, message: str, line: int, column: int):
        raise ParseError(message, SourceSpan(line, column))

    def tokenize(self) -> list[Token]:
        while self.li < len(self.lines):
            self._lex_line()
        last_line = max(len(self.lines), 1)
        while len(self.indents) > 1:
            self.indents.pop()
            self.tokens.append(Token(DEDENT, "", last_line, 1))
        self.tokens.append(Token(EOF, "", last_line, 1))
        return self.tokens

    def _indent_width(self, text: str) -> int:
        width = 0
        for ch in text:
            if ch == " ":
                width += 1
            elif ch == "\t":
                width += _TAB_WIDTH - width % _TAB_WIDTH
            else:
                break
        return width

    def _lex_line(self):
        line = self.lines[self.li]
        lineno = self.li + 1
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            self.li += 1
            return

        width = self._indent_width(line)
        if width > self.indents[-1]:
            self.indents.append(width)
            self.tokens.append(Token(INDENT, "", lineno, 1))
        else:
            while width < self.indents[-1]:
                self.indents.pop()
                self.tokens.append(Token(DEDENT, "", lineno, 1))
            if width != self.indents[-1]:
                self.error("bad indentation", lineno, width + 1)

        self.ci = len(line) - len(line.lstrip())
        produced = False
        while self.li < len(self.lines):
            line = self.lines[self.li]
            if self.ci >= len(line):
                break
            ch = line[self.ci]
            if ch in " \t":
                self.ci += 1
                continue
            if ch == "#":
                break
            lineno, col = self.li + 1, self.ci + 1
            if _is_name_start(ch):
                self._lex_name(line, lineno)
            elif ch.isdigit():
                self._lex_number(line, lineno)
            elif ch in ("'", '"'):
                self._lex_string(lineno)
                produced = True
                continue
            elif ch in _OPS:
                self.tokens.append(Token(OP, ch, lineno, col))
                self.ci += 1
            else:
                self.error(f"unexpected character {ch!r}", lineno, col)
            produced = True
        if produced:
            self.tokens.append(Token(NEWLINE, "", self.li + 1, len(self.lines[self.li]) + 1))
        self.li += 1

    def _lex_name(self, line: str, lineno: int):
        start = self.ci
        while self.ci < len(line) and _is_name_char(line[self.ci]):
            self.ci += 1
        self.tokens.append(Token(NAME, line[start:self.ci], lineno, start + 1))

    def _lex_number(self, line: str, lineno: int):
        start = self.ci
        while self.ci < len(line) and line[self.ci].isdigit():
            self.ci += 1
        if self.ci < len(line) and line[self.ci] == ".":
            self.ci += 1
            while self.ci < len(line) and line[self.ci].isdigit():
                self.ci += 1
        if self.ci < len(line) and line[self.ci] in "eE":
            mark = self.ci
            self.ci += 1
            if self.ci < len(line) and line[self.ci] in "+-":
                self.ci += 1
            if self.ci < len(line) and line[self.ci].isdigit():
                while self.ci < len(line) and line[self.ci].isdigit():
                    self.ci += 1
            else:
                self.ci = mark  # the e belongs to a following name, not the number
        text = line[start:self.ci]
        if self.ci < len(line) and _is_name_start(line[self.ci]):
            self.error(f"invalid number literal {text + line[self.ci]!r}", lineno, start + 1)
        self.tokens.append(Token(NUMBER, text, lineno, start + 1))

    def _lex_string(self, lineno: int):
        line = self.lines[self.li]
        quote = line[self.ci]
        start_col = self.ci + 1
        triple = line[self.ci:self.ci + 3] == quote * 3
        if triple:
            text, ok = self._scan_until(quote * 3, self.ci + 3)
        else:
            text, ok = self._scan_until(quote, self.ci + 1, single_line=True)
        if not ok:
            self.error("unterminated string literal", lineno, start_col)
        self.tokens.append(Token(STRING, text, lineno, start_col))

    def _scan_until(self, closer: str, pos: int, single_line: bool = False):
        parts: list[str] = []
        while self.li < len(self.lines):
            line = self.lines[self.li]
            i = pos
            while i < len(line):
                if line[i] == "\\" and i + 1 < len(line):
                    parts.append(line[i:i + 2])
                    i += 2
                    continue
                if line.startswith(closer, i):
                    self.ci = i + len(closer)
                    return "".join(parts), True
                parts.append(line[i])
                i += 1
            if single_line:
                return "".join(parts), False
            parts.append("\n")
            self.li += 1
            pos = 0
        return "".join(parts), False


def tokenize(source: str) -> list[Token]:
    return Lexer(source).tokenize()
