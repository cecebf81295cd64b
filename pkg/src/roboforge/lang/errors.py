"""Errors and source locations for the robot-control mini-language."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    """1-based (line, column) position in the original source text."""

    line: int
    column: int

    def __post_init__(self):
        if self.line < 1 or self.column < 1:
            raise ValueError("source spans are 1-based")

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}"


class LangError(Exception):
    """Base for mini-language errors; always pins a source location."""

    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{message} ({span})")
        self.message = message
        self.span = span


class ParseError(LangError):
    """Source text is not a valid program."""


class EvalError(LangError):
    """Program failed while executing."""
