"""Lexical comment stripping.

Removes ``#`` comments and statement-level string literals while leaving
every remaining code token and the line structure untouched. Works on any
text, parseable or not.
"""

from __future__ import annotations

_QUOTES = ("'", '"')

_CODE = "code"
_DROP = "drop"


def _scan_code(line: str) -> tuple[int, list[tuple[int, int, bool]]]:
    """Find the comment start and string extents of one line.

    Returns ``(comment_pos, strings)`` where ``comment_pos`` is the index
    of the first ``#`` outside a string (or -1) and ``strings`` holds
    ``(start, end, closed)`` per string starting on this line.
    """
    strings: list[tuple[int, int, bool]] = []
    i = 0
    while i < len(line):
        ch = line[i]
        if ch == "#":
            return i, strings
        if ch in _QUOTES:
            start = i
            triple = line[i:i + 3] == ch * 3
            closer = ch * 3 if triple else ch
            i += len(closer)
            closed = False
            while i < len(line):
                if line[i] == "\\" and i + 1 < len(line):
                    i += 2
                    continue
                if line.startswith(closer, i):
                    i += len(closer)
                    closed = True
                    break
                i += 1
            strings.append((start, i, closed))
            if not closed and not triple:
                # Unterminated single-quote string swallows the rest.
                return -1, strings
            continue
        i += 1
    return -1, strings


def _classify(line: str, comment_pos: int, strings) -> str:
    """Decide what a line starting with a string literal is.

    Returns ``_CODE`` for ordinary code, ``_DROP`` for a self-contained
    string statement, or the closing quotes of a still-open triple-quoted
    string statement.
    """
    if not strings:
        return _CODE
    start, end, closed = strings[0]
    code = line if comment_pos < 0 else line[:comment_pos]
    if code[:start].strip():
        return _CODE
    if closed:
        if code[end:].strip():
            return _CODE  # expression involving a string; leave it alone
        return _DROP
    quote = line[start]
    if line[start:start + 3] == quote * 3:
        return quote * 3
    return _CODE  # unterminated plain string: not ours to fix


def _find_closer(line: str, closer: str) -> int:
    i = 0
    while i < len(line):
        if line[i] == "\\" and i + 1 < len(line):
            i += 2
            continue
        if line.startswith(closer, i):
            return i
        i += 1
    return -1


def strip_comments(source: str) -> str:
    """Return ``source`` with comments and doc-strings removed.

    Comment-free input passes through byte-identical. Lines holding only a
    comment or only a (possibly multi-line) string statement are dropped
    entirely; trailing comments are cut and the remainder right-stripped.
    """
    lines = source.splitlines()
    kept: list[str] = []
    changed = False
    open_closer: str | None = None  # closing quotes of an open string statement

    for line in lines:
        if open_closer is not None:
            pos = _find_closer(line, open_closer)
            changed = True
            if pos < 0:
                continue
            rest = line[pos + len(open_closer):]
            open_closer = None
            if rest.strip() and not rest.lstrip().startswith("#"):
                kept.append(rest.rstrip())
            continue

        comment_pos, strings = _scan_code(line)
        verdict = _classify(line, comment_pos, strings)
        if verdict == _DROP:
            changed = True
            continue
        if verdict != _CODE:
            open_closer = verdict
            changed = True
            continue
        if comment_pos >= 0:
            changed = True
            remainder = line[:comment_pos].rstrip()
            if remainder:
                kept.append(remainder)
            continue
        kept.append(line)

    if not changed:
        return source
    text = "\n".join(kept)
    if kept and source.endswith(("\n", "\r")):
        text += "\n"
    return text


__all__ = ["strip_comments"]
