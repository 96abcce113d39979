"""Monadic translations of the source calculus.

``translate_cbn`` and ``translate_cbv`` are the classic call-by-name and
call-by-value translations; ``translate_cba`` is call-by-alias, which puts
``malias`` around every application argument and every let-bound term and
leaves the evaluation order to the chosen strategy.

Literals, primitives, conditionals and effects are handled identically by all
three: a literal is ``unit n``; a primitive binds its operands left to right;
``if`` binds the condition and then picks a branch; ``read``/``tick`` are
primitive computations.  Binders introduced by the translation start with
``_``, a prefix the parser never produces, so they cannot capture user names.
"""

from __future__ import annotations

import itertools

from .syntax import (
    App,
    Bind,
    BoolLit,
    Definition,
    DefRef,
    Effect,
    Expr,
    If,
    IntLit,
    Lam,
    Let,
    MAlias,
    PrimOp,
    Program,
    TArrow,
    TBase,
    TM,
    Type,
    Unit,
    Var,
)
from .typecheck import TypeCheckError, TypeContext, elaborate, target_type_error

TRANSLATIONS = ("cbn", "cbv", "cba")


def translate_type_cba(t: Type) -> Type:
    if isinstance(t, TBase):
        return t
    assert isinstance(t, TArrow), t
    return TArrow(TM(translate_type_cba(t.src)), TM(translate_type_cba(t.dst)))


translate_type_cbn = translate_type_cba


def translate_type_cbv(t: Type) -> Type:
    if isinstance(t, TBase):
        return t
    assert isinstance(t, TArrow), t
    return TArrow(translate_type_cbv(t.src), TM(translate_type_cbv(t.dst)))


def _var_type(mode: str, t: Type) -> Type:
    """Type of a translated variable that had source type ``t``."""
    return translate_type_cbv(t) if mode == "cbv" else TM(translate_type_cba(t))


class _Translator:
    def __init__(self, mode: str):
        if mode not in TRANSLATIONS:
            raise ValueError(f"unknown translation {mode!r}")
        self.mode = mode
        self._counter = itertools.count(1)

    def fresh(self, base: str) -> str:
        return f"_{base}{next(self._counter)}"

    def __call__(self, e: Expr) -> Expr:
        mode = self.mode
        if isinstance(e, Var):
            return Unit(e) if mode == "cbv" else e
        if isinstance(e, DefRef):
            return e
        if isinstance(e, Lam):
            ann = None if e.ann is None else _var_type(mode, e.ann)
            return Unit(Lam(e.param, self(e.body), ann))
        if isinstance(e, App):
            f = self.fresh("f")
            if mode == "cbn":
                return Bind(self(e.fn), Lam(f, App(Var(f), self(e.arg))))
            if mode == "cbv":
                x = self.fresh("x")
                return Bind(self(e.fn), Lam(f, Bind(self(e.arg), Lam(x, App(Var(f), Var(x))))))
            return Bind(self(e.fn), Lam(f, Bind(MAlias(self(e.arg)), Var(f))))
        if isinstance(e, Let):
            if mode == "cbn":
                return App(Lam(e.name, self(e.body)), self(e.bound))
            if mode == "cbv":
                return Bind(self(e.bound), Lam(e.name, self(e.body)))
            return Bind(MAlias(self(e.bound)), Lam(e.name, self(e.body)))
        if isinstance(e, (IntLit, BoolLit)):
            return Unit(e)
        if isinstance(e, PrimOp):
            a, b = self.fresh("a"), self.fresh("b")
            inner = Bind(self(e.right), Lam(b, Unit(PrimOp(e.op, Var(a), Var(b)))))
            return Bind(self(e.left), Lam(a, inner))
        if isinstance(e, If):
            c = self.fresh("c")
            return Bind(self(e.cond), Lam(c, If(Var(c), self(e.then), self(e.orelse))))
        if isinstance(e, Effect):
            return e
        raise TypeError(f"not a source expression: {type(e).__name__}")


def translate(e: Expr, mode: str) -> Expr:
    return _Translator(mode)(e)


def translate_cbn(e: Expr) -> Expr:
    return _Translator("cbn")(e)


def translate_cbv(e: Expr) -> Expr:
    return _Translator("cbv")(e)


def translate_cba(e: Expr) -> Expr:
    return _Translator("cba")(e)


def translate_program(p: Program, mode: str) -> Program:
    """Translate every definition body and main.

    A definition reference denotes its translated body, so in every mode its
    type is ``M [[t]]``.
    """
    tr = _Translator(mode)
    type_tr = translate_type_cbv if mode == "cbv" else translate_type_cba
    defs = tuple(Definition(d.name, TM(type_tr(d.type)), tr(d.body)) for d in p.defs)
    return Program(defs, tr(p.main))


def translate_context(ctx: TypeContext, mode: str = "cba") -> TypeContext:
    type_tr = translate_type_cbv if mode == "cbv" else translate_type_cba
    return TypeContext(
        tuple((n, _var_type(mode, t)) for n, t in ctx.bindings),
        {n: TM(type_tr(t)) for n, t in ctx.defs.items()},
    )


class PreservationError(Exception):
    """The translated term failed to type-check: a translation bug."""

    def __init__(self, error: TypeCheckError, target: Expr, expected: Type):
        self.error = error
        self.target = target
        self.expected = expected
        super().__init__(f"translation does not preserve typing: {error}")


def verify_typing_preservation(e: Expr, ctx: TypeContext | None = None) -> bool:
    """Check that ``translate_cba(e)`` has type ``M [[t]]`` where ``e : t``.

    Free variables of type ``t`` are assumed at ``M [[t]]`` in the translated
    context.  Raises ``PreservationError`` with the target type error when the
    check fails.
    """
    ctx = ctx or TypeContext()
    src_type, annotated = elaborate(ctx, e)
    target = translate_cba(annotated)
    expected = TM(translate_type_cba(src_type))
    err = target_type_error(translate_context(ctx), target, expected)
    if err is not None:
        raise PreservationError(err, target, expected)
    return True
