"""Interpret target terms as ``Comp`` values and run whole programs."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Any, Mapping

from .effects import (
    DEFAULT_FUEL,
    Comp,
    Config,
    FuelExhausted,
    ParReport,
    Pure,
    Read,
    RuntimeFailure,
    Tick,
    Trace,
    comp_bind,
    is_comp,
    perform,
    run_par,
    run_seq,
)
from .parser import ParseError, parse_program
from .strategies import StrategyId, get_strategy
from .syntax import (
    App,
    Bind,
    BoolLit,
    DefRef,
    Effect,
    Expr,
    If,
    IntLit,
    Lam,
    MAlias,
    PrimOp,
    Program,
    Unit,
    Var,
)
from .translate import translate_program
from .typecheck import TypeCheckError, check_program

# deep non-tail recursion in interpreted programs maps onto host recursion
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))


class EvalError(RuntimeFailure):
    kind = "EvalError"


@dataclass(frozen=True, eq=False)
class Closure:
    param: str
    body: Expr
    env: Mapping[str, Any]
    interp: Interpreter

    def __call__(self, arg: Any) -> Any:
        return self.interp.eval(self.body, {**self.env, self.param: arg})

    def __repr__(self) -> str:
        return f"<closure \\{self.param}>"


_PRIMS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "leq": lambda a, b: a <= b,
    "gt": lambda a, b: a > b,
}


class Interpreter:
    """Evaluates target terms under one strategy.

    ``defs`` maps definition names to translated bodies; a ``DefRef`` evaluates
    to the computation denoted by its body, built once and reused.
    """

    def __init__(self, strategy: StrategyId | str, defs: Mapping[str, Expr] | None = None, fuel: int = DEFAULT_FUEL):
        self.strategy = StrategyId.parse(strategy)
        self.malias = get_strategy(self.strategy)
        self.defs = dict(defs or {})
        self.fuel = fuel
        self.applications = 0
        self._def_values: dict[str, Any] = {}

    def apply(self, fn: Any, arg: Any) -> Any:
        if not isinstance(fn, Closure):
            raise EvalError(f"applying a non-function {fn!r}")
        self.applications += 1
        if self.applications > self.fuel:
            raise FuelExhausted(self.fuel)
        return fn(arg)

    def eval(self, e: Expr, env: Mapping[str, Any]) -> Any:
        if isinstance(e, Var):
            try:
                return env[e.name]
            except KeyError:
                raise EvalError(f"unbound variable {e.name!r}") from None
        if isinstance(e, Lam):
            return Closure(e.param, e.body, env, self)
        if isinstance(e, App):
            fn = self.eval(e.fn, env)
            return self.apply(fn, self.eval(e.arg, env))
        if isinstance(e, Unit):
            return Pure(self.eval(e.arg, env))
        if isinstance(e, Bind):
            m = self._comp(self.eval(e.comp, env))
            k = self.eval(e.cont, env)
            return comp_bind(m, lambda v: self._comp(self.apply(k, v)))
        if isinstance(e, MAlias):
            return self.malias(self._comp(self.eval(e.arg, env)))
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, BoolLit):
            return e.value
        if isinstance(e, PrimOp):
            a = self.eval(e.left, env)
            b = self.eval(e.right, env)
            if type(a) is not int or type(b) is not int:
                raise EvalError(f"primitive {e.op} applied to {a!r}, {b!r}")
            return _PRIMS[e.op](a, b)
        if isinstance(e, If):
            cond = self.eval(e.cond, env)
            if type(cond) is not bool:
                raise EvalError(f"if condition is not a boolean: {cond!r}")
            return self.eval(e.then if cond else e.orelse, env)
        if isinstance(e, Effect):
            return perform(Read(e.arg) if e.kind == "read" else Tick(e.arg))
        if isinstance(e, DefRef):
            return self._def(e.name)
        raise EvalError(f"cannot evaluate {type(e).__name__}")

    def _def(self, name: str) -> Any:
        if name not in self._def_values:
            if name not in self.defs:
                raise EvalError(f"unknown definition {name!r}")
            self._def_values[name] = self.eval(self.defs[name], {})
        return self._def_values[name]

    @staticmethod
    def _comp(v: Any) -> Comp:
        if not is_comp(v):
            raise EvalError(f"expected a computation, got {v!r}")
        return v


def eval_target(
    e: Expr,
    env: Mapping[str, Any] | None = None,
    strategy: StrategyId | str = StrategyId.CBN,
    defs: Mapping[str, Expr] | None = None,
    fuel: int = DEFAULT_FUEL,
) -> Any:
    """Denotation of a target term: a ``Comp`` for terms of type ``M t``."""
    return Interpreter(strategy, defs, fuel).eval(e, env or {})


def observe(v: Any) -> Any:
    """A comparable, JSON-friendly rendering of a runtime value."""
    if isinstance(v, bool) or isinstance(v, int):
        return v
    if isinstance(v, Closure):
        return "<fun>"
    if is_comp(v):
        return "<computation>"
    return repr(v)


# ---------- whole programs ----------


class StageError(Exception):
    """A pipeline failure labelled with the stage that produced it."""

    def __init__(self, stage: str, error: Exception):
        self.stage = stage
        self.error = error
        super().__init__(f"{stage} error: {error}")

    @property
    def static(self) -> bool:
        return self.stage in ("parse", "typecheck")


@dataclass(frozen=True)
class RunResult:
    value: Any
    trace: Trace
    par: ParReport | None = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {"value": observe(self.value), **self.trace.to_json()}
        if self.par is not None:
            out["span"] = self.par.span
            out["work"] = self.par.work
        return out


def with_arg(p: Program, n: int) -> Program:
    """Replace the body of the distinguished ``arg`` definition by the literal ``n``."""
    try:
        return p.with_def("arg", IntLit(n))
    except KeyError:
        raise StageError("typecheck", TypeCheckError("unbound", "program has no 'arg' definition")) from None


def run_program(
    p: Program | str,
    strategy: StrategyId | str,
    cfg: Config | Mapping[str, int] | None = None,
    fuel: int = DEFAULT_FUEL,
    arg: int | None = None,
) -> RunResult:
    """Parse, type-check, translate with call-by-alias, evaluate and run."""
    strategy = StrategyId.parse(strategy)
    if isinstance(p, str):
        try:
            p = parse_program(p)
        except ParseError as err:
            raise StageError("parse", err) from err
    if arg is not None:
        p = with_arg(p, arg)
    try:
        p, _ = check_program(p)
    except TypeCheckError as err:
        raise StageError("typecheck", err) from err
    target = translate_program(p, "cba")
    return run_target_program(target, strategy, cfg, fuel)


def run_target_program(
    target: Program,
    strategy: StrategyId | str,
    cfg: Config | Mapping[str, int] | None = None,
    fuel: int = DEFAULT_FUEL,
) -> RunResult:
    """Evaluate and run an already translated program."""
    strategy = StrategyId.parse(strategy)
    interp = Interpreter(strategy, {d.name: d.body for d in target.defs}, fuel)
    try:
        comp = Interpreter._comp(interp.eval(target.main, {}))
        if strategy.parallel:
            report = run_par(comp, cfg, fuel)
            return RunResult(report.value, report.trace, report)
        value, trace = run_seq(comp, cfg, fuel)
        return RunResult(value, trace)
    except RecursionError:
        raise StageError("run", FuelExhausted(fuel)) from None
    except RuntimeFailure as err:
        raise StageError("run", err) from err
