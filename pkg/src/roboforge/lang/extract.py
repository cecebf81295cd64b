"""Pull executable code out of model output that may include prose."""

from __future__ import annotations

import re

from .errors import ParseError
from .parser import parse

_FENCE = re.compile(r"```[ \t]*[\w+-]*[ \t]*\n(.*?)```", re.DOTALL)


def extract_code(text: str) -> str | None:
    """Best-effort extraction of a program from surrounding prose.

    The first fenced code block wins; otherwise the longest contiguous run
    of lines that parses as a program. Returns None when nothing parses.
    """
    fenced = _FENCE.search(text)
    if fenced:
        return fenced.group(1)

    try:
        if len(parse(text)):
            return text
    except ParseError:
        pass

    lines = text.splitlines()
    best: tuple[int, str] | None = None
    start = 0
    while start < len(lines):
        if not lines[start].strip():
            start += 1
            continue
        length, chunk = _longest_from(lines, start)
        if length and (best is None or length > best[0]):
            best = (length, chunk)
        start += max(length, 1)
    return best[1] if best else None


def _longest_from(lines: list[str], start: int) -> tuple[int, str]:
    best_len, best_chunk = 0, ""
    for end in range(start + 1, len(lines) + 1):
        chunk = "\n".join(lines[start:end])
        try:
            program = parse(chunk)
        except ParseError:
            continue
        if len(program):
            best_len, best_chunk = end - start, chunk
    return best_len, best_chunk
