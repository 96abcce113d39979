"""Recursive-descent parser for the source language.

Grammar (``--`` starts a comment that runs to end of line)::

    program ::= def* "main" "=" expr
    def     ::= "def" IDENT ":" type "=" expr
    expr    ::= "\\" IDENT [":" type] "." expr
              | "let" IDENT "=" expr "in" expr
              | "if" expr "then" expr "else" expr
              | cmp
    cmp     ::= arith [("<=" | ">") arith]
    arith   ::= term (("+" | "-") term)*
    term    ::= app ("*" app)*
    app     ::= ("read" | "tick") STRING | atom atom*
    atom    ::= INT | "(" "-" INT ")" | "true" | "false" | IDENT | "(" expr ")"
    type    ::= tatom ["->" type]
    tatom   ::= "int" | "bool" | "M" tatom | "(" type ")"

Names bound by ``def`` resolve to ``DefRef`` unless shadowed by a local
binder.  A definition may refer to itself and to earlier definitions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    BOOL,
    INT,
    App,
    BoolLit,
    Definition,
    DefRef,
    Effect,
    Expr,
    If,
    IntLit,
    Lam,
    Let,
    PrimOp,
    Program,
    TArrow,
    TM,
    Type,
    Var,
)

KEYWORDS = {"def", "let", "in", "if", "then", "else", "read", "tick", "true", "false"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z][A-Za-z0-9_']*)
  | (?P<op><=|->|[\\.:=()+\-*>])
    """,
    re.VERBOSE,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, expected: frozenset[str] = frozenset()):
        self.line = line
        self.col = col
        self.expected = expected
        detail = f" (expected one of: {', '.join(sorted(expected))})" if expected else ""
        super().__init__(f"{line}:{col}: {message}{detail}")


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "string", "ident", "kw", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            tokens.append(Token("kw" if lexeme in KEYWORDS else "ident", lexeme, line, col))
        elif kind == "string":
            body = re.sub(r"\\(.)", r"\1", lexeme[1:-1])
            tokens.append(Token("string", body, line, col))
        elif kind in ("int", "op"):
            tokens.append(Token(kind, lexeme, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def fail(self, expected: set[str], message: str | None = None):
        tok = self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(message or f"unexpected {found}", tok.line, tok.col, frozenset(expected))

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail({repr(text)})
        tok = self.tok
        self.i += 1
        return tok

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.fail({"identifier"})
        name = self.tok.text
        self.i += 1
        return name

    # types

    def type_(self) -> Type:
        left = self.type_atom()
        if self.at("->"):
            self.i += 1
            return TArrow(left, self.type_())
        return left

    def type_atom(self) -> Type:
        tok = self.tok
        if self.at("("):
            self.i += 1
            t = self.type_()
            self.expect(")")
            return t
        if tok.kind == "ident" and tok.text in ("int", "bool"):
            self.i += 1
            return INT if tok.text == "int" else BOOL
        if tok.kind == "ident" and tok.text == "M":
            self.i += 1
            return TM(self.type_atom())
        self.fail({"int", "bool", "M", "'('"})

    # expressions

    def expr(self) -> Expr:
        if self.at("\\"):
            self.i += 1
            param = self.ident()
            ann = None
            if self.at(":"):
                self.i += 1
                ann = self.type_()
            self.expect(".")
            return Lam(param, self.expr(), ann)
        if self.at("let"):
            self.i += 1
            name = self.ident()
            self.expect("=")
            bound = self.expr()
            self.expect("in")
            return Let(name, bound, self.expr())
        if self.at("if"):
            self.i += 1
            cond = self.expr()
            self.expect("then")
            then = self.expr()
            self.expect("else")
            return If(cond, then, self.expr())
        return self.cmp()

    def cmp(self) -> Expr:
        left = self.arith()
        if self.at("<=") or self.at(">"):
            op = "leq" if self.tok.text == "<=" else "gt"
            self.i += 1
            return PrimOp(op, left, self.arith())
        return left

    def arith(self) -> Expr:
        left = self.term()
        while self.at("+") or self.at("-"):
            op = "add" if self.tok.text == "+" else "sub"
            self.i += 1
            left = PrimOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.app()
        while self.at("*"):
            self.i += 1
            left = PrimOp("mul", left, self.app())
        return left

    def app(self) -> Expr:
        if self.at("read") or self.at("tick"):
            kind = self.tok.text
            self.i += 1
            if self.tok.kind != "string":
                self.fail({"string literal"})
            arg = self.tok.text
            self.i += 1
            return Effect(kind, arg)
        fn = self.atom()
        while self._starts_atom():
            fn = App(fn, self.atom())
        return fn

    def _starts_atom(self) -> bool:
        tok = self.tok
        if tok.kind == "ident" and tok.text == "main" and self.peek().text == "=":
            return False  # start of the top-level main binding
        return tok.kind in ("int", "ident") or self.at("(") or self.at("true") or self.at("false")

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "int":
            self.i += 1
            return IntLit(int(tok.text))
        if tok.kind == "ident":
            self.i += 1
            return Var(tok.text)
        if self.at("true") or self.at("false"):
            self.i += 1
            return BoolLit(tok.text == "true")
        if self.at("("):
            if self.peek().text == "-" and self.peek(2).kind == "int" and self.peek(3).text == ")":
                value = -int(self.peek(2).text)
                self.i += 4
                return IntLit(value)
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        self.fail({"integer", "identifier", "true", "false", "'('", "read", "tick", "'\\'", "let", "if"})

    def program(self) -> Program:
        defs: list[Definition] = []
        while self.at("def"):
            self.i += 1
            name = self.ident()
            if name in {d.name for d in defs}:
                self.fail(set(), f"duplicate definition {name!r}")
            self.expect(":")
            ty = self.type_()
            self.expect("=")
            body = self.expr()
            visible = {d.name for d in defs} | {name}
            defs.append(Definition(name, ty, resolve_defs(body, visible)))
        if not (self.tok.kind == "ident" and self.tok.text == "main"):
            self.fail({"def", "main"})
        self.i += 1
        self.expect("=")
        main = resolve_defs(self.expr(), {d.name for d in defs})
        if self.tok.kind != "eof":
            self.fail({"end of input"})
        return Program(tuple(defs), main)


def resolve_defs(e: Expr, names: set[str], bound: frozenset[str] = frozenset()) -> Expr:
    """Turn free occurrences of definition names into ``DefRef`` nodes."""
    if isinstance(e, Var):
        return DefRef(e.name) if (e.name in names and e.name not in bound) else e
    if isinstance(e, Lam):
        return Lam(e.param, resolve_defs(e.body, names, bound | {e.param}), e.ann)
    if isinstance(e, Let):
        return Let(e.name, resolve_defs(e.bound, names, bound), resolve_defs(e.body, names, bound | {e.name}))
    if isinstance(e, App):
        return App(resolve_defs(e.fn, names, bound), resolve_defs(e.arg, names, bound))
    if isinstance(e, PrimOp):
        return PrimOp(e.op, resolve_defs(e.left, names, bound), resolve_defs(e.right, names, bound))
    if isinstance(e, If):
        return If(*(resolve_defs(c, names, bound) for c in (e.cond, e.then, e.orelse)))
    return e


def parse_program(text: str) -> Program:
    return _Parser(text).program()


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        p.fail({"end of input"})
    return e


def parse_type(text: str) -> Type:
    p = _Parser(text)
    t = p.type_()
    if p.tok.kind != "eof":
        p.fail({"end of input"})
    return t

