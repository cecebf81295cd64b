"""Restricted robot-control mini-language: parse, print, strip, interpret."""

from .comments import strip_comments
from .errors import EvalError, LangError, ParseError, SourceSpan
from .extract import extract_code
from .interpreter import DEFAULT_LOOP_CAP, DEFAULT_STEP_LIMIT, Limits, interpret
from .nodes import (
    API_PREFIX,
    Assign,
    Binary,
    Call,
    Expr,
    ExprStmt,
    ForRange,
    Index,
    ListLit,
    MATH_FUNCS,
    MAX_LOOP_DEPTH,
    Name,
    NumberLit,
    Program,
    Stmt,
    Unary,
)
from .parser import parse
from .printer import pretty

__all__ = [
    "API_PREFIX",
    "Assign",
    "Binary",
    "Call",
    "DEFAULT_LOOP_CAP",
    "DEFAULT_STEP_LIMIT",
    "EvalError",
    "Expr",
    "ExprStmt",
    "ForRange",
    "Index",
    "LangError",
    "Limits",
    "ListLit",
    "MATH_FUNCS",
    "MAX_LOOP_DEPTH",
    "Name",
    "NumberLit",
    "ParseError",
    "Program",
    "SourceSpan",
    "Stmt",
    "Unary",
    "extract_code",
    "interpret",
    "parse",
    "pretty",
    "strip_comments",
]
