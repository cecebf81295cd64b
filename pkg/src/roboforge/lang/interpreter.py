"""Tree-walking evaluator that turns programs into recorded trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..sim import Simulator, SimulatorError, Trajectory
from .errors import EvalError
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

DEFAULT_STEP_LIMIT = 10_000
DEFAULT_LOOP_CAP = 1_000

_MATH = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "sqrt": math.sqrt,
    "radians": math.radians,
    "degrees": math.degrees,
    "abs": abs,
}


@dataclass(frozen=True)
class Limits:
    """Execution guards against runaway generated code."""

    step_limit: int = DEFAULT_STEP_LIMIT
    loop_cap: int = DEFAULT_LOOP_CAP


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


class Interpreter:
    def __init__(self, sim: Simulator, limits: Limits = Limits()):
        self.sim = sim
        self.limits = limits
        self.scope: dict[str, object] = {}
        self.steps = 0

    def run(self, program: Program) -> Trajectory:
        for stmt in program.statements:
            self.exec_stmt(stmt)
        return self.sim.trajectory()

    def exec_stmt(self, stmt: Stmt) -> None:
        self.steps += 1
        if self.steps > self.limits.step_limit:
            raise EvalError(
                f"step limit of {self.limits.step_limit} statements exceeded", stmt.span
            )
        if isinstance(stmt, Assign):
            self.scope[stmt.target] = self.eval(stmt.value)
        elif isinstance(stmt, ExprStmt):
            self.eval(stmt.value)
        elif isinstance(stmt, ForRange):
            self.exec_for(stmt)
        else:  # pragma: no cover - parser emits no other statements
            raise EvalError(f"unknown statement {type(stmt).__name__}", stmt.span)

    def exec_for(self, stmt: ForRange) -> None:
        count = self.eval(stmt.count)
        if not _is_number(count):
            raise EvalError("loop count must be a number", stmt.span)
        if isinstance(count, float):
            if not count.is_integer():
                raise EvalError(f"loop count must be an integer, got {count}", stmt.span)
            count = int(count)
        if count > self.limits.loop_cap:
            raise EvalError(
                f"loop count {count} exceeds the cap of {self.limits.loop_cap}",
                stmt.span,
            )
        for i in range(max(count, 0)):
            self.scope[stmt.var] = i
            for inner in stmt.body:
                self.exec_stmt(inner)

    def eval(self, expr: Expr):
        if isinstance(expr, NumberLit):
            return expr.value
        if isinstance(expr, Name):
            return self.lookup(expr)
        if isinstance(expr, ListLit):
            return [self.eval(item) for item in expr.items]
        if isinstance(expr, Index):
            return self.eval_index(expr)
        if isinstance(expr, Unary):
            operand = self.eval(expr.operand)
            if not _is_number(operand):
                raise EvalError("unary '-' needs a number", expr.span)
            return -operand
        if isinstance(expr, Binary):
            return self.eval_binary(expr)
        if isinstance(expr, Call):
            return self.eval_call(expr)
        raise EvalError(f"unknown expression {type(expr).__name__}", expr.span)

    def lookup(self, expr: Name):
        if expr.ident in self.scope:
            return self.scope[expr.ident]
        if expr.ident == "pi":
            return math.pi
        raise EvalError(f"undefined name '{expr.ident}'", expr.span)

    def eval_index(self, expr: Index):
        base = self.eval(expr.base)
        if not isinstance(base, list):
            raise EvalError("only lists can be indexed", expr.span)
        idx = self.eval(expr.index)
        if isinstance(idx, float) and idx.is_integer():
            idx = int(idx)
        if not isinstance(idx, int) or isinstance(idx, bool):
            raise EvalError(f"list index must be an integer, got {idx!r}", expr.span)
        if not -len(base) <= idx < len(base):
            raise EvalError(
                f"index {idx} out of range for list of length {len(base)}", expr.span
            )
        return base[idx]

    def eval_binary(self, expr: Binary):
        left = self.eval(expr.left)
        right = self.eval(expr.right)
        if not (_is_number(left) and _is_number(right)):
            raise EvalError(f"'{expr.op}' needs numeric operands", expr.span)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if right == 0:
            raise EvalError("division by zero", expr.span)
        return left / right

    def eval_call(self, expr: Call):
        args = [self.eval(a) for a in expr.args]
        if expr.is_api:
            try:
                return self.sim.call(expr.api_name, args, span=expr.span)
            except SimulatorError as exc:
                raise EvalError(str(exc), expr.span) from exc
        fn = _MATH[expr.callee]
        if len(args) != 1:
            raise EvalError(f"{expr.callee} expects 1 argument, got {len(args)}", expr.span)
        if not _is_number(args[0]):
            raise EvalError(f"{expr.callee} needs a number", expr.span)
        try:
            return fn(args[0])
        except ValueError as exc:
            raise EvalError(f"{expr.callee}: {exc}", expr.span) from exc


def interpret(
    program: Program, sim: Simulator, limits: Limits = Limits()
) -> Trajectory:
    """Run ``program`` on a freshly reset ``sim`` and return its trajectory."""
    sim.reset()
    return Interpreter(sim, limits).run(program)
