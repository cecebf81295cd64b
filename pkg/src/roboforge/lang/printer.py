"""Canonical pretty-printer: ``parse(pretty(p))`` is structurally ``p``."""

from __future__ import annotations

from .nodes import (
    Assign,
    Binary,
    Call,
    Expr,
    ExprStmt,
    ForRange,
    Index,
    ListLit,
    Name,
    NumberLit,
    Program,
    Stmt,
    Unary,
)

INDENT = "    "

_BINARY_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_UNARY_PREC = 3
_POSTFIX_PREC = 4


def _prec(expr: Expr) -> int:
    if isinstance(expr, Binary):
        return _BINARY_PREC[expr.op]
    if isinstance(expr, Unary):
        return _UNARY_PREC
    return _POSTFIX_PREC


def _render(expr: Expr, required: int = 0) -> str:
    text = _render_bare(expr)
    if _prec(expr) < required:
        return f"({text})"
    return text


def _render_bare(expr: Expr) -> str:
    if isinstance(expr, NumberLit):
        return repr(expr.value)
    if isinstance(expr, Name):
        return expr.ident
    if isinstance(expr, ListLit):
        return "[" + ", ".join(_render(item) for item in expr.items) + "]"
    if isinstance(expr, Index):
        return _render(expr.base, _POSTFIX_PREC) + "[" + _render(expr.index) + "]"
    if isinstance(expr, Unary):
        return "-" + _render(expr.operand, _UNARY_PREC)
    if isinstance(expr, Binary):
        prec = _BINARY_PREC[expr.op]
        left = _render(expr.left, prec)
        right = _render(expr.right, prec + 1)
        return f"{left} {expr.op} {right}"
    if isinstance(expr, Call):
        return expr.callee + "(" + ", ".join(_render(a) for a in expr.args) + ")"
    raise TypeError(f"cannot render {type(expr).__name__}")


def _emit(stmt: Stmt, depth: int, out: list[str]) -> None:
    pad = INDENT * depth
    if isinstance(stmt, Assign):
        out.append(f"{pad}{stmt.target} = {_render(stmt.value)}")
    elif isinstance(stmt, ExprStmt):
        out.append(pad + _render(stmt.value))
    elif isinstance(stmt, ForRange):
        out.append(f"{pad}for {stmt.var} in range({_render(stmt.count)}):")
        for inner in stmt.body:
            _emit(inner, depth + 1, out)
    else:
        raise TypeError(f"cannot render {type(stmt).__name__}")


def pretty(program: Program) -> str:
    """Render ``program`` as canonical source (LF endings, 4-space indents)."""
    out: list[str] = []
    for stmt in program.statements:
        _emit(stmt, 0, out)
    return "".join(line + "\n" for line in out)
