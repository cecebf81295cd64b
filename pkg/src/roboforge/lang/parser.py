"""Recursive-descent parser for the restricted robot-control language.

Whitelisted surface: assignments, arithmetic, list literals and indexing,
``aw.*`` API calls, a fixed set of math functions, and ``for _ in range(n)``
loops up to four levels deep. Anything else is rejected with a located
error so the message can be fed back to a code generator.
"""

from __future__ import annotations

from .errors import ParseError
from .lexer import (
    DEDENT,
    EOF,
    INDENT,
    NAME,
    NEWLINE,
    NUMBER,
    OP,
    STRING,
    Token,
    tokenize,
)
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

# Python constructs we recognise only to refuse them by name.
_REJECTED_KEYWORDS = {
    "if", "elif", "else", "while", "def", "class", "import", "from",
    "return", "with", "try", "except", "finally", "lambda", "global",
    "nonlocal", "del", "pass", "break", "continue", "assert", "raise",
    "yield", "and", "or", "not", "is", "True", "False", "None", "async",
    "await", "match",
}
_RESERVED = {"for", "in", "range"} | _REJECTED_KEYWORDS


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers -----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type != EOF:
            self.pos += 1
        return tok

    def check(self, type_: str, value: str | None = None) -> bool:
        tok = self.peek()
        return tok.type == type_ and (value is None or tok.value == value)

    def expect(self, type_: str, value: str | None = None, what: str = "") -> Token:
        if not self.check(type_, value):
            tok = self.peek()
            wanted = what or value or type_.lower()
            found = tok.value or tok.type.lower()
            raise ParseError(f"expected {wanted}, found {found!r}", tok.span)
        return self.advance()

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise ParseError(message, tok.span)

    # -- grammar -----------------------------------------------------------

    def parse_program(self) -> Program:
        statements = self.parse_block(depth=0)
        self.expect(EOF, what="end of input")
        return Program(tuple(statements))

    def parse_block(self, depth: int) -> list[Stmt]:
        statements: list[Stmt] = []
        while not self.check(EOF) and not self.check(DEDENT):
            stmt = self.parse_statement(depth)
            if stmt is not None:
                statements.append(stmt)
        return statements

    def parse_statement(self, depth: int) -> Stmt | None:
        tok = self.peek()
        if tok.type == STRING:
            # A statement-level string is documentation, not code.
            nxt = self.tokens[self.pos + 1]
            if nxt.type in (NEWLINE, EOF):
                self.advance()
                if self.check(NEWLINE):
                    self.advance()
                return None
            self.error("string literals are only allowed as comments", tok)
        if tok.type == NAME and tok.value == "for":
            return self.parse_for(depth)
        if tok.type == NAME and tok.value in _REJECTED_KEYWORDS:
            self.error(f"unsupported construct '{tok.value}'", tok)
        if tok.type == NAME and self.tokens[self.pos + 1].type == OP \
                and self.tokens[self.pos + 1].value == "=":
            if tok.value in _RESERVED:
                self.error(f"cannot assign to reserved word '{tok.value}'", tok)
            self.advance()
            self.advance()
            value = self.parse_expr()
            self.end_of_statement()
            return Assign(tok.value, value, span=tok.span)
        value = self.parse_expr()
        self.end_of_statement()
        return ExprStmt(value, span=tok.span)

    def end_of_statement(self):
        if self.check(EOF) or self.check(DEDENT):
            return
        self.expect(NEWLINE, what="end of statement")

    def parse_for(self, depth: int) -> ForRange:
        for_tok = self.expect(NAME, "for")
        if depth + 1 > MAX_LOOP_DEPTH:
            self.error(f"loops nested deeper than {MAX_LOOP_DEPTH}", for_tok)
        var = self.expect(NAME, what="loop variable")
        if var.value in _RESERVED:
            self.error(f"cannot use reserved word '{var.value}' as loop variable", var)
        self.expect(NAME, "in")
        self.expect(NAME, "range")
        self.expect(OP, "(")
        count = self.parse_expr()
        if self.check(OP, ","):
            self.error("range takes a single count argument")
        self.expect(OP, ")")
        self.expect(OP, ":")
        self.expect(NEWLINE, what="newline after ':'")
        self.expect(INDENT, what="indented loop body")
        body = self.parse_block(depth + 1)
        if not body:
            self.error("empty loop body", for_tok)
        self.expect(DEDENT, what="dedent")
        return ForRange(var.value, count, tuple(body), span=for_tok.span)

    def parse_expr(self) -> Expr:
        return self.parse_sum()

    def parse_sum(self) -> Expr:
        left = self.parse_term()
        while self.check(OP, "+") or self.check(OP, "-"):
            op = self.advance()
            right = self.parse_term()
            left = Binary(op.value, left, right, span=op.span)
        return left

    def parse_term(self) -> Expr:
        left = self.parse_factor()
        while self.check(OP, "*") or self.check(OP, "/"):
            op = self.advance()
            right = self.parse_factor()
            left = Binary(op.value, left, right, span=op.span)
        return left

    def parse_factor(self) -> Expr:
        if self.check(OP, "-"):
            op = self.advance()
            return Unary("-", self.parse_factor(), span=op.span)
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        expr = self.parse_atom()
        while self.check(OP, "["):
            bracket = self.advance()
            index = self.parse_expr()
            self.expect(OP, "]")
            expr = Index(expr, index, span=bracket.span)
        return expr

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.type == NUMBER:
            self.advance()
            value = float(tok.value) if ("." in tok.value or "e" in tok.value
                                         or "E" in tok.value) else int(tok.value)
            return NumberLit(value, span=tok.span)
        if tok.type == STRING:
            self.error("string literals are only allowed as comments", tok)
        if tok.type == OP and tok.value == "(":
            self.advance()
            expr = self.parse_expr()
            self.expect(OP, ")")
            return expr
        if tok.type == OP and tok.value == "[":
            self.advance()
            items: list[Expr] = []
            if not self.check(OP, "]"):
                items.append(self.parse_expr())
                while self.check(OP, ","):
                    self.advance()
                    if self.check(OP, "]"):
                        break
                    items.append(self.parse_expr())
            self.expect(OP, "]")
            return ListLit(tuple(items), span=tok.span)
        if tok.type == NAME:
            return self.parse_name_or_call()
        self.error(f"expected an expression, found {tok.value or tok.type.lower()!r}", tok)

    def parse_name_or_call(self) -> Expr:
        tok = self.advance()
        if tok.value in _REJECTED_KEYWORDS:
            self.error(f"unsupported construct '{tok.value}'", tok)
        if tok.value in ("for", "in", "range"):
            self.error(f"reserved word '{tok.value}' cannot be used here", tok)
        if self.check(OP, "."):
            if tok.value != "aw":
                self.error(f"unknown namespace '{tok.value}'; API calls use 'aw.'", tok)
            self.advance()
            method = self.expect(NAME, what="API call name")
            self.expect(OP, "(", what="'(' after API call name")
            args = self.parse_args()
            return Call(API_PREFIX + method.value, args, span=tok.span)
        if self.check(OP, "("):
            if tok.value not in MATH_FUNCS:
                self.error(f"unknown function '{tok.value}'", tok)
            self.advance()
            args = self.parse_args()
            return Call(tok.value, args, span=tok.span)
        return Name(tok.value, span=tok.span)

    def parse_args(self) -> tuple[Expr, ...]:
        args: list[Expr] = []
        if not self.check(OP, ")"):
            args.append(self.parse_expr())
            while self.check(OP, ","):
                self.advance()
                if self.check(OP, ")"):
                    break
                args.append(self.parse_expr())
        self.expect(OP, ")")
        return tuple(args)


def parse(source: str) -> Program:
    """Parse ``source`` into a :class:`Program`."""
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    return Parser(tokenize(source)).parse_program()
