"""Seeded generators for random computations and well-typed source terms.

Generation is a pure function of ``GenSpec.seed``, so any counterexample can
be replayed from its seed alone.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Callable

from .effects import Comp, Pure, Read, Step, Tick, comp_map
from .syntax import (
    BOOL,
    INT,
    App,
    BoolLit,
    Effect,
    Expr,
    If,
    IntLit,
    Lam,
    Let,
    PrimOp,
    TArrow,
    Type,
    Var,
    children,
)

FUNCTION_POOL: dict[str, Callable[[int], int]] = {
    "succ": lambda x: x + 1,
    "double": lambda x: 2 * x,
    "const0": lambda x: 0,
}


@dataclass(frozen=True)
class GenSpec:
    seed: int = 0
    max_depth: int = 4
    effect_keys: tuple[str, ...] = ("a", "b", "c")
    function_pool: tuple[str, ...] = tuple(FUNCTION_POOL)

    def rng(self) -> random.Random:
        return random.Random(self.seed)

    def case(self, i: int) -> GenSpec:
        """Settings for case ``i`` of a run seeded with ``self.seed``."""
        return replace(self, seed=case_seed(self.seed, i))


def case_seed(seed: int, i: int) -> int:
    return seed * 1_000_003 + i


def gen_config(rng: random.Random, keys) -> dict[str, int]:
    return {k: rng.randint(-3, 9) for k in sorted(keys)}


# ---------- computations ----------


@dataclass(frozen=True, eq=False)
class GenComp:
    """A generated computation together with a readable rendering of it."""

    comp: Comp
    text: str

    def __str__(self) -> str:
        return self.text


def _effect_node(kind: str, key: str, even: GenComp, odd: GenComp) -> GenComp:
    # the continuation branches on the result and adds it to the branch value
    def cont(v: int) -> Comp:
        chosen = even if v % 2 == 0 else odd
        return comp_map(chosen.comp, lambda r: r + v)

    effect = Read(key) if kind == "read" else Tick(key)
    return GenComp(Step(effect, cont), f"{kind} {key} >>= v. v + (even ? {even} : {odd})")


def gen_comp(spec: GenSpec, rng: random.Random | None = None) -> GenComp:
    """A finite computation over Read/Tick with integer leaves, depth <= max_depth."""
    rng = rng or spec.rng()

    def go(depth: int) -> GenComp:
        if depth == 0 or rng.random() < 0.25:
            n = rng.randint(-5, 5)
            return GenComp(Pure(n), f"unit {n}")
        kind = rng.choice(("read", "read", "tick"))
        key = rng.choice(spec.effect_keys)
        even = go(depth - 1)
        odd = even if rng.random() < 0.3 else go(depth - 1)
        return _effect_node(kind, key, even, odd)

    return go(spec.max_depth)


# ---------- typed source terms ----------

INT_TO_INT = TArrow(INT, INT)
_SMALL_TYPES = (INT, INT, BOOL, INT_TO_INT)
_NAMES = ("x", "y", "z", "f", "g", "h")


class _TermGen:
    def __init__(self, spec: GenSpec, rng: random.Random, unique_sites: bool):
        self.spec = spec
        self.rng = rng
        self.unique_sites = unique_sites
        self.sites = 0
        self.keys: set[str] = set()

    def effect(self) -> Expr:
        rng = self.rng
        kind = rng.choice(("read", "read", "tick"))
        if self.unique_sites:
            self.sites += 1
            key = f"{'k' if kind == 'read' else 't'}{self.sites}"
        else:
            key = rng.choice(self.spec.effect_keys)
        if kind == "read":
            self.keys.add(key)
        return Effect(kind, key)

    def literal(self, t: Type) -> Expr:
        if t == INT:
            return IntLit(self.rng.randint(-3, 9))
        return BoolLit(self.rng.random() < 0.5)

    def vars_of(self, ctx: tuple[tuple[str, Type], ...], t: Type) -> list[str]:
        visible: dict[str, Type] = {}
        for n, ty in ctx:
            visible[n] = ty
        return sorted(n for n, ty in visible.items() if ty == t)

    def term(self, ctx: tuple[tuple[str, Type], ...], t: Type, depth: int) -> Expr:
        rng = self.rng
        names = self.vars_of(ctx, t)
        if isinstance(t, TArrow):
            # arrows are built by lambdas, variables, or compound forms
            options = ["lam", "lam"] + (["var", "var"] if names else [])
            if depth > 0:
                options += ["if", "let", "app"]
        elif depth == 0:
            options = ["lit"] + (["var", "var"] if names else []) + (["eff"] if t == INT else [])
        else:
            options = ["lit", "prim", "prim", "if", "let", "let", "app", "app"]
            options += ["var", "var", "var"] if names else []
            options += ["eff", "eff"] if t == INT else []
        kind = rng.choice(options)
        sub = max(depth - 1, 0)
        if kind == "var":
            return Var(rng.choice(names))
        if kind == "lit":
            return self.literal(t)
        if kind == "eff":
            return self.effect()
        if kind == "lam":
            assert isinstance(t, TArrow)
            x = rng.choice(_NAMES)
            return Lam(x, self.term(ctx + ((x, t.src),), t.dst, sub), t.src)
        if kind == "prim":
            op = rng.choice(("add", "sub", "mul")) if t == INT else rng.choice(("leq", "gt"))
            return PrimOp(op, self.term(ctx, INT, sub), self.term(ctx, INT, sub))
        if kind == "if":
            return If(self.term(ctx, BOOL, sub), self.term(ctx, t, sub), self.term(ctx, t, sub))
        if kind == "let":
            s = rng.choice(_SMALL_TYPES)
            x = rng.choice(_NAMES)
            return Let(x, self.term(ctx, s, sub), self.term(ctx + ((x, s),), t, sub))
        assert kind == "app"
        s = rng.choice(_SMALL_TYPES)
        return App(self.term(ctx, TArrow(s, t), sub), self.term(ctx, s, sub))


def gen_typed_term(
    spec: GenSpec,
    rng: random.Random | None = None,
    ty: Type | None = None,
    ctx: tuple[tuple[str, Type], ...] = (),
    unique_sites: bool = False,
) -> tuple[Expr, Type]:
    """A well-typed term with fully annotated lambdas.

    Closed unless ``ctx`` supplies free variables.  With ``unique_sites`` every
    effect leaf gets its own key or label.
    """
    rng = rng or spec.rng()
    t = ty if ty is not None else rng.choice(_SMALL_TYPES)
    g = _TermGen(spec, rng, unique_sites)
    return g.term(ctx, t, spec.max_depth), t


def term_keys(e: Expr) -> set[str]:
    """Configuration keys read anywhere in ``e``."""
    out, stack = set(), [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Effect) and node.kind == "read":
            out.add(node.arg)
        stack.extend(children(node))
    return out

