"""Abstract syntax for the source calculus and its monadic target.

Both calculi share the value-level node classes (``Var``, ``Lam``, ``App``,
literals, primitives, ``If``, ``Effect``, ``DefRef``).  The source adds
``Let``; the target adds ``Unit``, ``Bind`` and ``MAlias``.  Types follow the
same pattern: ``TBase`` and ``TArrow`` are shared, ``TM`` is target-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

PRIM_OPS = ("add", "sub", "mul", "leq", "gt")
PRIM_SYMBOLS = {"add": "+", "sub": "-", "mul": "*", "leq": "<=", "gt": ">"}
EFFECT_KINDS = ("read", "tick")


# ---------- types ----------


@dataclass(frozen=True)
class TBase:
    name: str

    def __str__(self) -> str:
        return pretty_type(self)


@dataclass(frozen=True)
class TArrow:
    src: Type
    dst: Type

    def __str__(self) -> str:
        return pretty_type(self)


@dataclass(frozen=True)
class TM:
    inner: Type

    def __str__(self) -> str:
        return pretty_type(self)


Type = Union[TBase, TArrow, TM]

INT = TBase("int")
BOOL = TBase("bool")


def arrow(*ts: Type) -> Type:
    """Right-nested arrow: ``arrow(a, b, c)`` is ``a -> b -> c``."""
    out = ts[-1]
    for t in reversed(ts[:-1]):
        out = TArrow(t, out)
    return out


def is_source_type(t: Type) -> bool:
    if isinstance(t, TBase):
        return True
    if isinstance(t, TArrow):
        return is_source_type(t.src) and is_source_type(t.dst)
    return False


def pretty_type(t: Type) -> str:
    if isinstance(t, TBase):
        return t.name
    if isinstance(t, TM):
        inner = pretty_type(t.inner)
        return f"M {inner}" if isinstance(t.inner, TBase) else f"M ({inner})"
    src = pretty_type(t.src)
    if isinstance(t.src, TArrow):
        src = f"({src})"
    return f"{src} -> {pretty_type(t.dst)}"


# ---------- expressions ----------


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lam:
    param: str
    body: Expr
    ann: Type | None = field(default=None, compare=True)


@dataclass(frozen=True)
class App:
    fn: Expr
    arg: Expr


@dataclass(frozen=True)
class Let:
    name: str
    bound: Expr
    body: Expr


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class PrimOp:
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class If:
    cond: Expr
    then: Expr
    orelse: Expr


@dataclass(frozen=True)
class Effect:
    kind: str  # "read" or "tick"
    arg: str  # config key or tick label


@dataclass(frozen=True)
class DefRef:
    name: str


@dataclass(frozen=True)
class Unit:
    arg: Expr


@dataclass(frozen=True)
class Bind:
    comp: Expr
    cont: Expr


@dataclass(frozen=True)
class MAlias:
    arg: Expr


Expr = Union[Var, Lam, App, Let, IntLit, BoolLit, PrimOp, If, Effect, DefRef, Unit, Bind, MAlias]
SourceExpr = Expr
TargetExpr = Expr

SOURCE_NODES = (Var, Lam, App, Let, IntLit, BoolLit, PrimOp, If, Effect, DefRef)
TARGET_NODES = (Var, Lam, App, IntLit, BoolLit, PrimOp, If, Effect, DefRef, Unit, Bind, MAlias)


@dataclass(frozen=True)
class Definition:
    name: str
    type: Type
    body: Expr


@dataclass(frozen=True)
class Program:
    defs: tuple[Definition, ...]
    main: Expr

    def def_types(self) -> dict[str, Type]:
        return {d.name: d.type for d in self.defs}

    def with_def(self, name: str, body: Expr) -> Program:
        """Return a copy with the body of definition ``name`` replaced."""
        if name not in self.def_types():
            raise KeyError(name)
        defs = tuple(Definition(d.name, d.type, body) if d.name == name else d for d in self.defs)
        return Program(defs, self.main)


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, Lam):
        return (e.body,)
    if isinstance(e, App):
        return (e.fn, e.arg)
    if isinstance(e, Let):
        return (e.bound, e.body)
    if isinstance(e, PrimOp):
        return (e.left, e.right)
    if isinstance(e, If):
        return (e.cond, e.then, e.orelse)
    if isinstance(e, (Unit, MAlias)):
        return (e.arg,)
    if isinstance(e, Bind):
        return (e.comp, e.cont)
    return ()


def count_nodes(e: Expr, kind: type | tuple[type, ...]) -> int:
    stack, n = [e], 0
    while stack:
        node = stack.pop()
        if isinstance(node, kind):
            n += 1
        stack.extend(children(node))
    return n


def free_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Lam):
        return free_vars(e.body) - {e.param}
    if isinstance(e, Let):
        return free_vars(e.bound) | (free_vars(e.body) - {e.name})
    out: set[str] = set()
    for c in children(e):
        out |= free_vars(c)
    return out


def _fresh(base: str, avoid: set[str]) -> str:
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def subst(e: Expr, name: str, value: Expr) -> Expr:
    """Capture-avoiding substitution of ``value`` for free ``name`` in ``e``."""
    fv = free_vars(value)

    def go(e: Expr) -> Expr:
        if isinstance(e, Var):
            return value if e.name == name else e
        if isinstance(e, Lam):
            if e.param == name:
                return e
            if e.param in fv:
                fresh = _fresh(e.param, fv | free_vars(e.body) | {name})
                return Lam(fresh, go(subst(e.body, e.param, Var(fresh))), e.ann)
            return Lam(e.param, go(e.body), e.ann)
        if isinstance(e, Let):
            bound = go(e.bound)
            if e.name == name:
                return Let(e.name, bound, e.body)
            if e.name in fv:
                fresh = _fresh(e.name, fv | free_vars(e.body) | {name})
                return Let(fresh, bound, go(subst(e.body, e.name, Var(fresh))))
            return Let(e.name, bound, go(e.body))
        if isinstance(e, App):
            return App(go(e.fn), go(e.arg))
        if isinstance(e, PrimOp):
            return PrimOp(e.op, go(e.left), go(e.right))
        if isinstance(e, If):
            return If(go(e.cond), go(e.then), go(e.orelse))
        if isinstance(e, Unit):
            return Unit(go(e.arg))
        if isinstance(e, MAlias):
            return MAlias(go(e.arg))
        if isinstance(e, Bind):
            return Bind(go(e.comp), go(e.cont))
        return e

    return go(e)


# ---------- alpha-equivalence ----------


def to_debruijn(e: Expr, scope: tuple[str, ...] = ()) -> tuple:
    """Nameless form: bound variables become indices, free ones keep names."""
    if isinstance(e, Var):
        for i, n in enumerate(reversed(scope)):
            if n == e.name:
                return ("bvar", i)
        return ("fvar", e.name)
    if isinstance(e, Lam):
        return ("lam", e.ann, to_debruijn(e.body, scope + (e.param,)))
    if isinstance(e, Let):
        return ("let", to_debruijn(e.bound, scope), to_debruijn(e.body, scope + (e.name,)))
    if isinstance(e, IntLit):
        return ("int", e.value)
    if isinstance(e, BoolLit):
        return ("bool", e.value)
    if isinstance(e, Effect):
        return ("eff", e.kind, e.arg)
    if isinstance(e, DefRef):
        return ("def", e.name)
    if isinstance(e, PrimOp):
        return ("prim", e.op, to_debruijn(e.left, scope), to_debruijn(e.right, scope))
    return (type(e).__name__,) + tuple(to_debruijn(c, scope) for c in children(e))


def alpha_equivalent(a: Expr, b: Expr) -> bool:
    return to_debruijn(a) == to_debruijn(b)


# ---------- pretty-printing ----------

# precedence levels, loosest first
_TOP, _CMP, _ARITH, _TERM, _APP, _ATOM = range(6)
_BINARY_LEVEL = {"leq": _CMP, "gt": _CMP, "add": _ARITH, "sub": _ARITH, "mul": _TERM}


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _paren(s: str, level: int, ctx: int) -> str:
    return f"({s})" if level < ctx else s


def _pp(e: Expr, ctx: int, show_types: bool) -> str:
    if isinstance(e, (Var, DefRef)):
        return e.name
    if isinstance(e, IntLit):
        return f"(-{-e.value})" if e.value < 0 else str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Effect):
        return _paren(f"{e.kind} {_quote(e.arg)}", _APP, ctx)
    if isinstance(e, Lam):
        ann = f":{pretty_type(e.ann)}" if (show_types and e.ann is not None) else ""
        return _paren(f"\\{e.param}{ann}. {_pp(e.body, _TOP, show_types)}", _TOP, ctx)
    if isinstance(e, Let):
        s = f"let {e.name} = {_pp(e.bound, _TOP, show_types)} in {_pp(e.body, _TOP, show_types)}"
        return _paren(s, _TOP, ctx)
    if isinstance(e, If):
        s = (
            f"if {_pp(e.cond, _TOP, show_types)} then {_pp(e.then, _TOP, show_types)}"
            f" else {_pp(e.orelse, _TOP, show_types)}"
        )
        return _paren(s, _TOP, ctx)
    if isinstance(e, PrimOp):
        level = _BINARY_LEVEL[e.op]
        # comparisons are non-associative, arithmetic is left-associative
        left_ctx = level + 1 if level == _CMP else level
        s = f"{_pp(e.left, left_ctx, show_types)} {PRIM_SYMBOLS[e.op]} {_pp(e.right, level + 1, show_types)}"
        return _paren(s, level, ctx)
    if isinstance(e, App):
        return _paren(f"{_pp(e.fn, _APP, show_types)} {_pp(e.arg, _ATOM, show_types)}", _APP, ctx)
    if isinstance(e, Unit):
        return _paren(f"unit {_pp(e.arg, _ATOM, show_types)}", _APP, ctx)
    if isinstance(e, MAlias):
        return _paren(f"malias {_pp(e.arg, _ATOM, show_types)}", _APP, ctx)
    if isinstance(e, Bind):
        s = f"bind {_pp(e.comp, _ATOM, show_types)} {_pp(e.cont, _ATOM, show_types)}"
        return _paren(s, _APP, ctx)
    raise TypeError(f"not an expression: {e!r}")


def pretty_source(e: Expr) -> str:
    """Render a source term in the concrete syntax accepted by the parser."""
    return _pp(e, _TOP, show_types=True)


def pretty_target(e: Expr, show_types: bool = False) -> str:
    return _pp(e, _TOP, show_types)


def pretty_program(p: Program) -> str:
    lines = [f"def {d.name} : {pretty_type(d.type)} = {pretty_source(d.body)}" for d in p.defs]
    lines.append(f"main = {pretty_source(p.main)}")
    return "\n".join(lines) + "\n"
