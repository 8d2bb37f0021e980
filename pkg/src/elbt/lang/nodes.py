"""AST node types and the canonical pretty-printer.

All nodes are frozen dataclasses so programs hash, compare structurally, and
can be shared between threads and mutated by structural substitution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

Expr = Union["IntLit", "ClassLit", "Var", "Binary", "Unary"]
Stmt = Union["If", "Assign", "Return"]


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class ClassLit:
    label: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Unary:
    op: str
    operand: Expr


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple[Stmt, ...]
    orelse: tuple[Stmt, ...]


@dataclass(frozen=True)
class Assign:
    name: str
    expr: Expr


@dataclass(frozen=True)
class Return:
    expr: Expr


@dataclass(frozen=True)
class Program:
    name: str
    params: tuple[str, ...]
    body: tuple[Stmt, ...]


BINARY_OPS = ("||", "&&", "==", "!=", "<", "<=", ">", ">=", "+", "-", "*", "/", "%")
UNARY_OPS = ("-", "!")

# Binding strength, C-style; larger binds tighter.
_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
}
_UNARY_PRECEDENCE = 7


def _fmt_expr(e: Expr, parent_prec: int = 0, is_rhs: bool = False) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, ClassLit):
        return f'"{e.label}"'
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        inner = _fmt_expr(e.operand, _UNARY_PRECEDENCE)
        text = f"{e.op}{inner}"
        prec = _UNARY_PRECEDENCE
    else:
        prec = _PRECEDENCE[e.op]
        lhs = _fmt_expr(e.lhs, prec)
        rhs = _fmt_expr(e.rhs, prec, is_rhs=True)
        text = f"{lhs} {e.op} {rhs}"
    # Binaries are left-associative: the right operand needs parens at equal
    # precedence, the left one only below it.
    if prec < parent_prec or (is_rhs and prec == parent_prec):
        return f"({text})"
    return text


def format_expr(e: Expr) -> str:
    """Render an expression fragment with minimal parentheses."""
    return _fmt_expr(e)


def _fmt_block(stmts: tuple[Stmt, ...], indent: int, out: list[str]) -> None:
    pad = "    " * indent
    for stmt in stmts:
        if isinstance(stmt, Return):
            out.append(f"{pad}return {_fmt_expr(stmt.expr)};")
        elif isinstance(stmt, Assign):
            out.append(f"{pad}let {stmt.name} = {_fmt_expr(stmt.expr)};")
        elif isinstance(stmt, If):
            out.append(f"{pad}if ({_fmt_expr(stmt.cond)}) {{")
            _fmt_block(stmt.then, indent + 1, out)
            if stmt.orelse:
                out.append(f"{pad}}} else {{")
                _fmt_block(stmt.orelse, indent + 1, out)
            out.append(f"{pad}}}")
        else:  # pragma: no cover - exhaustive over Stmt
            raise TypeError(f"unknown statement node {stmt!r}")


def pretty_print(program: Program) -> str:
    """Canonical source text; reparsing it yields a structurally equal AST."""
    lines = [f"fn {program.name}({', '.join(program.params)}) {{"]
    _fmt_block(program.body, 1, lines)
    lines.append("}")
    return "\n".join(lines) + "\n"
