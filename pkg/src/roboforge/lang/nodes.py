"""AST node types.

Spans never participate in equality: two parses of the same shape compare
equal even when they came from differently formatted source.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .errors import SourceSpan

MATH_FUNCS = ("sin", "cos", "tan", "sqrt", "radians", "degrees", "abs")
CONSTANTS = ("pi",)
API_PREFIX = "aw."
MAX_LOOP_DEPTH = 4

_SPAN = field(default_factory=lambda: SourceSpan(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class NumberLit:
    value: Union[int, float]
    span: SourceSpan = _SPAN


@dataclass(frozen=True)
class Name:
    ident: str
    span: SourceSpan = _SPAN


@dataclass(frozen=True)
class ListLit:
    items: tuple["Expr", ...]
    span: SourceSpan = _SPAN


@dataclass(frozen=True)
class Index:
    base: "Expr"
    index: "Expr"
    span: SourceSpan = _SPAN


@dataclass(frozen=True)
class Unary:
    op: str  # only "-"
    operand: "Expr"
    span: SourceSpan = _SPAN


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"
    span: SourceSpan = _SPAN


@dataclass(frozen=True)
class Call:
    callee: str  # "aw.<api>" or a whitelisted math function
    args: tuple["Expr", ...]
    span: SourceSpan = _SPAN

    @property
    def is_api(self) -> bool:
        return self.callee.startswith(API_PREFIX)

    @property
    def api_name(self) -> str:
        return self.callee[len(API_PREFIX):]


Expr = Union[NumberLit, Name, ListLit, Index, Unary, Binary, Call]


@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr
    span: SourceSpan = _SPAN


@dataclass(frozen=True)
class ExprStmt:
    value: Expr
    span: SourceSpan = _SPAN


@dataclass(frozen=True)
class ForRange:
    var: str
    count: Expr
    body: tuple["Stmt", ...]
    span: SourceSpan = _SPAN


Stmt = Union[Assign, ExprStmt, ForRange]


@dataclass(frozen=True)
class Program:
    statements: tuple[Stmt, ...]

    def __len__(self) -> int:
        return len(self.statements)
