"""Mini integer expression language that systems under test are written in.

Programs are immutable ASTs: parse once, then execute and mutate freely from
any number of workers.
"""

from elbt.lang.nodes import (
    Assign,
    Binary,
    ClassLit,
    If,
    IntLit,
    Program,
    Return,
    Unary,
    Var,
    pretty_print,
)
from elbt.lang.parser import ParseError, UndeclaredVariableError, parse
from elbt.lang.interp import Fault, Value, execute

__all__ = [
    "Program",
    "If",
    "Assign",
    "Return",
    "IntLit",
    "ClassLit",
    "Var",
    "Binary",
    "Unary",
    "pretty_print",
    "parse",
    "ParseError",
    "UndeclaredVariableError",
    "execute",
    "Fault",
    "Value",
]
