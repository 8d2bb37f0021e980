"""Recursive-descent parser for the SUT language.

Grammar (see resources/grammar.ebnf):

    program := "fn" ident "(" [ident {"," ident}] ")" block
    block   := "{" {stmt} "}"
    stmt    := "if" "(" expr ")" block ["else" block]
             | "let" ident "=" expr ";"
             | "return" expr ";"

Expressions use C operator precedence; `//` starts a line comment. Variable
references are checked against the surrounding scope while parsing, so an
undeclared name is rejected with its source position.
"""

from __future__ import annotations

from dataclasses import dataclass

from elbt.lang.nodes import (
    Assign,
    Binary,
    ClassLit,
    Expr,
    If,
    IntLit,
    Program,
    Return,
    Stmt,
    Unary,
    Var,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class UndeclaredVariableError(ParseError):
    def __init__(self, name: str, line: int, col: int):
        super().__init__(f"undeclared variable '{name}'", line, col)
        self.name = name


@dataclass(frozen=True)
class _Token:
    kind: str  # 'ident' | 'int' | 'string' | 'op' | 'eof'
    text: str
    line: int
    col: int


_KEYWORDS = frozenset({"fn", "if", "else", "let", "return"})
_TWO_CHAR_OPS = ("==", "!=", "<=", ">=", "&&", "||")
_ONE_CHAR_OPS = "+-*/%<>!=(){},;"


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = "op" if text in _KEYWORDS else "ident"
            tokens.append(_Token(kind, text, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(_Token("int", source[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            while j < n and source[j] != '"':
                if source[j] == "\n":
                    raise ParseError("unterminated class literal", start_line, start_col)
                j += 1
            if j >= n:
                raise ParseError("unterminated class literal", start_line, start_col)
            tokens.append(_Token("string", source[i + 1 : j], start_line, start_col))
            col += j - i + 1
            i = j + 1
            continue
        two = source[i : i + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(_Token("op", two, start_line, start_col))
            i += 2
            col += 2
            continue
        if ch in _ONE_CHAR_OPS:
            tokens.append(_Token("op", ch, start_line, start_col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", start_line, start_col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self._tokens = tokens
        self._pos = 0
        self._scopes: list[set[str]] = []

    @property
    def _cur(self) -> _Token:
        return self._tokens[self._pos]

    def _advance(self) -> _Token:
        tok = self._cur
        self._pos += 1
        return tok

    def _expect(self, kind: str, text: str | None = None) -> _Token:
        tok = self._cur
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            got = tok.text if tok.kind != "eof" else "end of input"
            raise ParseError(f"expected {want!r}, found {got!r}", tok.line, tok.col)
        return self._advance()

    def _accept(self, text: str) -> bool:
        if self._cur.kind == "op" and self._cur.text == text:
            self._advance()
            return True
        return False

    def _in_scope(self, name: str) -> bool:
        return any(name in scope for scope in self._scopes)

    def parse_program(self) -> Program:
        self._expect("op", "fn")
        name = self._expect("ident").text
        self._expect("op", "(")
        params: list[str] = []
        if not self._accept(")"):
            params.append(self._expect("ident").text)
            while self._accept(","):
                params.append(self._expect("ident").text)
            self._expect("op", ")")
        if len(set(params)) != len(params):
            tok = self._tokens[0]
            raise ParseError("duplicate parameter name", tok.line, tok.col)
        self._scopes.append(set(params))
        body = self._parse_block()
        self._scopes.pop()
        self._expect("eof")
        return Program(name, tuple(params), body)

    def _parse_block(self) -> tuple[Stmt, ...]:
        self._expect("op", "{")
        self._scopes.append(set())
        stmts: list[Stmt] = []
        while not self._accept("}"):
            stmts.append(self._parse_stmt())
        self._scopes.pop()
        return tuple(stmts)

    def _parse_stmt(self) -> Stmt:
        tok = self._cur
        if tok.kind == "op" and tok.text == "if":
            self._advance()
            self._expect("op", "(")
            cond = self._parse_expr()
            self._expect("op", ")")
            then = self._parse_block()
            orelse: tuple[Stmt, ...] = ()
            if self._cur.kind == "op" and self._cur.text == "else":
                self._advance()
                orelse = self._parse_block()
            return If(cond, then, orelse)
        if tok.kind == "op" and tok.text == "let":
            self._advance()
            name = self._expect("ident").text
            self._expect("op", "=")
            expr = self._parse_expr()
            self._expect("op", ";")
            self._scopes[-1].add(name)
            return Assign(name, expr)
        if tok.kind == "op" and tok.text == "return":
            self._advance()
            expr = self._parse_expr()
            self._expect("op", ";")
            return Return(expr)
        raise ParseError(f"expected statement, found {tok.text!r}", tok.line, tok.col)

    # Precedence ladder, loosest first.
    def _parse_expr(self) -> Expr:
        return self._parse_binary_level(0)

    _LEVELS = (("||",), ("&&",), ("==", "!="), ("<", "<=", ">", ">="), ("+", "-"), ("*", "/", "%"))

    def _parse_binary_level(self, level: int) -> Expr:
        if level == len(self._LEVELS):
            return self._parse_unary()
        ops = self._LEVELS[level]
        node = self._parse_binary_level(level + 1)
        while self._cur.kind == "op" and self._cur.text in ops:
            op = self._advance().text
            rhs = self._parse_binary_level(level + 1)
            node = Binary(op, node, rhs)
        return node

    def _parse_unary(self) -> Expr:
        tok = self._cur
        if tok.kind == "op" and tok.text in ("-", "!"):
            self._advance()
            return Unary(tok.text, self._parse_unary())
        return self._parse_primary()

    def _parse_primary(self) -> Expr:
        tok = self._cur
        if tok.kind == "int":
            self._advance()
            return IntLit(int(tok.text))
        if tok.kind == "string":
            self._advance()
            return ClassLit(tok.text)
        if tok.kind == "ident":
            self._advance()
            if not self._in_scope(tok.text):
                raise UndeclaredVariableError(tok.text, tok.line, tok.col)
            return Var(tok.text)
        if tok.kind == "op" and tok.text == "(":
            self._advance()
            expr = self._parse_expr()
            self._expect("op", ")")
            return expr
        got = tok.text if tok.kind != "eof" else "end of input"
        raise ParseError(f"expected expression, found {got!r}", tok.line, tok.col)


def parse(source: str) -> Program:
    """Parse DSL source text into an immutable Program AST."""
    return _Parser(_tokenize(source)).parse_program()
