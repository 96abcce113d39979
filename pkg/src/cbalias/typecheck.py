"""Bidirectional type checking for source terms and monadic target terms.

Unannotated lambdas are accepted wherever their parameter type is known from
context: in checking mode against an arrow, or in the function position of an
application (the argument is inferred first).  ``elaborate`` returns the term
with every lambda parameter annotated, which the translations rely on so that
target terms are checkable without unification.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .syntax import (
    BOOL,
    INT,
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
    TM,
    Type,
    Unit,
    Var,
    pretty_source,
    pretty_target,
    pretty_type,
)

_ARITH = {"add", "sub", "mul"}


class TypeCheckError(Exception):
    """A static type error.

    ``kind`` is one of ``unbound``, ``mismatch``, ``condition``, ``not-a-function``,
    ``not-a-computation``, ``cannot-infer`` or ``unsupported``.
    """

    def __init__(self, kind: str, message: str, expected: Type | None = None, actual: Type | None = None):
        self.kind = kind
        self.expected = expected
        self.actual = actual
        super().__init__(message)


@dataclass(frozen=True)
class TypeContext:
    """Ordered variable bindings plus the types of top-level definitions."""

    bindings: tuple[tuple[str, Type], ...] = ()
    defs: Mapping[str, Type] = field(default_factory=dict)

    def extend(self, name: str, ty: Type) -> TypeContext:
        return TypeContext(self.bindings + ((name, ty),), self.defs)

    def lookup(self, name: str) -> Type | None:
        for n, t in reversed(self.bindings):
            if n == name:
                return t
        return None

    @classmethod
    def of(cls, bindings: Mapping[str, Type] | None = None, defs: Mapping[str, Type] | None = None) -> TypeContext:
        return cls(tuple((bindings or {}).items()), dict(defs or {}))


def _mismatch(expected: Type, actual: Type, what: str) -> TypeCheckError:
    return TypeCheckError(
        "mismatch",
        f"type mismatch in {what}: expected {pretty_type(expected)}, got {pretty_type(actual)}",
        expected,
        actual,
    )


# ---------- source ----------


def _var_type(ctx: TypeContext, e: Expr) -> Type:
    if isinstance(e, Var):
        t = ctx.lookup(e.name)
    else:
        t = ctx.defs.get(e.name)
    if t is None:
        raise TypeCheckError("unbound", f"unbound variable {e.name!r}")
    return t


def _infer_src(ctx: TypeContext, e: Expr) -> tuple[Type, Expr]:
    if isinstance(e, (Var, DefRef)):
        return _var_type(ctx, e), e
    if isinstance(e, IntLit):
        return INT, e
    if isinstance(e, BoolLit):
        return BOOL, e
    if isinstance(e, Effect):
        return INT, e
    if isinstance(e, Lam):
        if e.ann is None:
            raise TypeCheckError("cannot-infer", f"cannot infer the parameter type of \\{e.param}")
        body_t, body = _infer_src(ctx.extend(e.param, e.ann), e.body)
        return TArrow(e.ann, body_t), Lam(e.param, body, e.ann)
    if isinstance(e, App):
        if isinstance(e.fn, Lam) and e.fn.ann is None:
            arg_t, arg = _infer_src(ctx, e.arg)
            fn_t, fn = _infer_src(ctx, Lam(e.fn.param, e.fn.body, arg_t))
        else:
            fn_t, fn = _infer_src(ctx, e.fn)
            if not isinstance(fn_t, TArrow):
                raise TypeCheckError("not-a-function", f"applying a non-function of type {pretty_type(fn_t)}")
            arg = _check_src(ctx, e.arg, fn_t.src)
        assert isinstance(fn_t, TArrow)
        return fn_t.dst, App(fn, arg)
    if isinstance(e, Let):
        bound_t, bound = _infer_src(ctx, e.bound)
        body_t, body = _infer_src(ctx.extend(e.name, bound_t), e.body)
        return body_t, Let(e.name, bound, body)
    if isinstance(e, PrimOp):
        left = _check_src(ctx, e.left, INT)
        right = _check_src(ctx, e.right, INT)
        return (INT if e.op in _ARITH else BOOL), PrimOp(e.op, left, right)
    if isinstance(e, If):
        cond = _check_cond(ctx, e.cond)
        then_t, then = _infer_src(ctx, e.then)
        orelse = _check_src(ctx, e.orelse, then_t)
        return then_t, If(cond, then, orelse)
    raise TypeCheckError("unsupported", f"not a source expression: {type(e).__name__}")


def _check_cond(ctx: TypeContext, cond: Expr) -> Expr:
    t, cond = _infer_src(ctx, cond)
    if t != BOOL:
        raise TypeCheckError("condition", f"condition must be bool, got {pretty_type(t)}", BOOL, t)
    return cond


def _check_src(ctx: TypeContext, e: Expr, expected: Type) -> Expr:
    if isinstance(e, Lam) and isinstance(expected, TArrow):
        if e.ann is not None and e.ann != expected.src:
            raise _mismatch(expected.src, e.ann, f"parameter {e.param!r}")
        body = _check_src(ctx.extend(e.param, expected.src), e.body, expected.dst)
        return Lam(e.param, body, expected.src)
    if isinstance(e, If):
        cond = _check_cond(ctx, e.cond)
        return If(cond, _check_src(ctx, e.then, expected), _check_src(ctx, e.orelse, expected))
    if isinstance(e, Let):
        bound_t, bound = _infer_src(ctx, e.bound)
        return Let(e.name, bound, _check_src(ctx.extend(e.name, bound_t), e.body, expected))
    actual, e = _infer_src(ctx, e)
    if actual != expected:
        raise _mismatch(expected, actual, pretty_source(e))
    return e


def infer_source(ctx: TypeContext, e: Expr) -> Type:
    """Infer the simple type of a source term."""
    return _infer_src(ctx, e)[0]


def check_source(ctx: TypeContext, e: Expr, expected: Type) -> Expr:
    """Check ``e`` against ``expected``; returns the annotated term."""
    return _check_src(ctx, e, expected)


def elaborate(ctx: TypeContext, e: Expr) -> tuple[Type, Expr]:
    """Infer the type of ``e`` and annotate every lambda parameter."""
    return _infer_src(ctx, e)


def check_program(p: Program) -> tuple[Program, Type]:
    """Type-check all definitions and main; returns the elaborated program and main's type."""
    defs = []
    seen: dict[str, Type] = {}
    for d in p.defs:
        ctx = TypeContext.of(defs={**seen, d.name: d.type})
        defs.append(Definition(d.name, d.type, check_source(ctx, d.body, d.type)))
        seen[d.name] = d.type
    main_t, main = elaborate(TypeContext.of(defs=seen), p.main)
    return Program(tuple(defs), main), main_t


# ---------- target ----------


def _expect_m(t: Type, what: str) -> Type:
    if not isinstance(t, TM):
        raise TypeCheckError("not-a-computation", f"{what} must be a computation, got {pretty_type(t)}", actual=t)
    return t.inner


def _infer_tgt(ctx: TypeContext, e: Expr) -> Type:
    if isinstance(e, (Var, DefRef)):
        return _var_type(ctx, e)
    if isinstance(e, IntLit):
        return INT
    if isinstance(e, BoolLit):
        return BOOL
    if isinstance(e, Effect):
        return TM(INT)
    if isinstance(e, Lam):
        if e.ann is None:
            raise TypeCheckError("cannot-infer", f"cannot infer the parameter type of \\{e.param}")
        return TArrow(e.ann, _infer_tgt(ctx.extend(e.param, e.ann), e.body))
    if isinstance(e, App):
        if isinstance(e.fn, Lam) and e.fn.ann is None:
            arg_t = _infer_tgt(ctx, e.arg)
            return _infer_tgt(ctx.extend(e.fn.param, arg_t), e.fn.body)
        fn_t = _infer_tgt(ctx, e.fn)
        if not isinstance(fn_t, TArrow):
            raise TypeCheckError("not-a-function", f"applying a non-function of type {pretty_type(fn_t)}")
        _check_tgt(ctx, e.arg, fn_t.src)
        return fn_t.dst
    if isinstance(e, PrimOp):
        _check_tgt(ctx, e.left, INT)
        _check_tgt(ctx, e.right, INT)
        return INT if e.op in _ARITH else BOOL
    if isinstance(e, If):
        _check_tgt(ctx, e.cond, BOOL)
        t = _infer_tgt(ctx, e.then)
        _check_tgt(ctx, e.orelse, t)
        return t
    if isinstance(e, Unit):
        return TM(_infer_tgt(ctx, e.arg))
    if isinstance(e, MAlias):
        inner = _infer_tgt(ctx, e.arg)
        _expect_m(inner, "the argument of malias")
        return TM(inner)
    if isinstance(e, Bind):
        a = _expect_m(_infer_tgt(ctx, e.comp), "the first argument of bind")
        k = e.cont
        if isinstance(k, Lam) and k.ann is None:
            result = _infer_tgt(ctx.extend(k.param, a), k.body)
        else:
            k_t = _infer_tgt(ctx, k)
            if not isinstance(k_t, TArrow):
                raise TypeCheckError("not-a-function", f"bind continuation has type {pretty_type(k_t)}")
            if k_t.src != a:
                raise _mismatch(a, k_t.src, "bind continuation parameter")
            result = k_t.dst
        _expect_m(result, "the result of a bind continuation")
        return result
    raise TypeCheckError("unsupported", f"not a target expression: {type(e).__name__}")


def _check_tgt(ctx: TypeContext, e: Expr, expected: Type) -> None:
    if isinstance(e, Lam) and isinstance(expected, TArrow):
        if e.ann is not None and e.ann != expected.src:
            raise _mismatch(expected.src, e.ann, f"parameter {e.param!r}")
        _check_tgt(ctx.extend(e.param, expected.src), e.body, expected.dst)
        return
    if isinstance(e, Unit) and isinstance(expected, TM):
        _check_tgt(ctx, e.arg, expected.inner)
        return
    if isinstance(e, MAlias) and isinstance(expected, TM):
        _expect_m(expected.inner, "the result of malias")
        _check_tgt(ctx, e.arg, expected.inner)
        return
    if isinstance(e, Bind):
        _expect_m(expected, "a bind expression")
        a = _expect_m(_infer_tgt(ctx, e.comp), "the first argument of bind")
        _check_tgt(ctx, e.cont, TArrow(a, expected))
        return
    if isinstance(e, If):
        _check_tgt(ctx, e.cond, BOOL)
        _check_tgt(ctx, e.then, expected)
        _check_tgt(ctx, e.orelse, expected)
        return
    if isinstance(e, App) and isinstance(e.fn, Lam) and e.fn.ann is None:
        arg_t = _infer_tgt(ctx, e.arg)
        _check_tgt(ctx.extend(e.fn.param, arg_t), e.fn.body, expected)
        return
    actual = _infer_tgt(ctx, e)
    if actual != expected:
        raise _mismatch(expected, actual, pretty_target(e))


def infer_target(ctx: TypeContext, e: Expr) -> Type:
    return _infer_tgt(ctx, e)


def target_type_error(ctx: TypeContext, e: Expr, expected: Type) -> TypeCheckError | None:
    """The error explaining why ``e`` does not check at ``expected``, or None."""
    try:
        _check_tgt(ctx, e, expected)
    except TypeCheckError as err:
        return err
    return None


def check_target(ctx: TypeContext, e: Expr, expected: Type) -> bool:
    return target_type_error(ctx, e, expected) is None
