"""Tree-walking interpreter with explicit fault values.

Runtime values are plain Python objects: `int` (wrapped to 64-bit signed
arithmetic), `str` for class labels, and `bool`. Anything that would be an
exception in a host language (division by zero, operand type mismatch,
falling off the end without a return) comes back as a `Fault` value instead
of raising, so mutant filtering and kill detection can treat faults as data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from elbt.lang.nodes import Assign, Binary, ClassLit, If, IntLit, Program, Return, Unary, Var

Value = Union[int, str, bool]

_I64_MIN = -(1 << 63)
_I64_MOD = 1 << 64


@dataclass(frozen=True)
class Fault:
    kind: str  # 'div-by-zero' | 'type-error' | 'no-return'
    detail: str = ""


class _FaultSignal(Exception):
    def __init__(self, fault: Fault):
        self.fault = fault


def _wrap(v: int) -> int:
    # Two's-complement wrap to 64-bit signed.
    return (v - _I64_MIN) % _I64_MOD + _I64_MIN


def _require_int(v: Value, op: str) -> int:
    if type(v) is not int:
        raise _FaultSignal(Fault("type-error", f"operator '{op}' needs integer operands"))
    return v


def _require_bool(v: Value, where: str) -> bool:
    if type(v) is not bool:
        raise _FaultSignal(Fault("type-error", f"{where} needs a boolean"))
    return v


def _eval(node, env: dict) -> Value:
    t = type(node)
    if t is Var:
        return env[node.name]
    if t is IntLit:
        return node.value
    if t is ClassLit:
        return node.label
    if t is Binary:
        op = node.op
        if op == "&&":
            if not _require_bool(_eval(node.lhs, env), "operator '&&'"):
                return False
            return _require_bool(_eval(node.rhs, env), "operator '&&'")
        if op == "||":
            if _require_bool(_eval(node.lhs, env), "operator '||'"):
                return True
            return _require_bool(_eval(node.rhs, env), "operator '||'")
        lhs = _eval(node.lhs, env)
        rhs = _eval(node.rhs, env)
        if op == "==" or op == "!=":
            if type(lhs) is not type(rhs):
                raise _FaultSignal(Fault("type-error", f"operator '{op}' on mixed types"))
            return (lhs == rhs) if op == "==" else (lhs != rhs)
        a = _require_int(lhs, op)
        b = _require_int(rhs, op)
        if op == "+":
            return _wrap(a + b)
        if op == "-":
            return _wrap(a - b)
        if op == "*":
            return _wrap(a * b)
        if op == "/":
            if b == 0:
                raise _FaultSignal(Fault("div-by-zero", "division by zero"))
            q = abs(a) // abs(b)  # C-style: truncate toward zero
            return _wrap(q if (a >= 0) == (b >= 0) else -q)
        if op == "%":
            if b == 0:
                raise _FaultSignal(Fault("div-by-zero", "modulo by zero"))
            q = abs(a) // abs(b)
            if (a >= 0) != (b >= 0):
                q = -q
            return _wrap(a - b * q)  # remainder takes the dividend's sign
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        raise AssertionError(f"unknown binary operator {op!r}")
    if t is Unary:
        v = _eval(node.operand, env)
        if node.op == "-":
            return _wrap(-_require_int(v, "unary '-'"))
        return not _require_bool(v, "operator '!'")
    raise AssertionError(f"unknown expression node {node!r}")


def _exec_block(stmts, env: dict):
    """Run statements; return the returned Value wrapped in a one-tuple, or None."""
    for stmt in stmts:
        t = type(stmt)
        if t is Return:
            return (_eval(stmt.expr, env),)
        if t is Assign:
            env[stmt.name] = _eval(stmt.expr, env)
        elif t is If:
            if _require_bool(_eval(stmt.cond, env), "if condition"):
                result = _exec_block(stmt.then, env)
            else:
                result = _exec_block(stmt.orelse, env)
            if result is not None:
                return result
        else:
            raise AssertionError(f"unknown statement node {stmt!r}")
    return None


def execute(program: Program, inputs: Sequence[int]) -> Union[Value, Fault]:
    """Run a program on an integer input vector; pure and deterministic.

    Faults are returned, never raised; a missing return on the taken path
    yields Fault('no-return').
    """
    if len(inputs) != len(program.params):
        raise ValueError(
            f"{program.name} takes {len(program.params)} inputs, got {len(inputs)}"
        )
    env = {name: _wrap(int(v)) for name, v in zip(program.params, inputs)}
    try:
        result = _exec_block(program.body, env)
    except _FaultSignal as sig:
        return sig.fault
    if result is None:
        return Fault("no-return", "execution fell off the end of the program")
    return result[0]
