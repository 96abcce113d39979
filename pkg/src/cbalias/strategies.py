"""The four ``malias`` implementations, each a ``Comp -> Comp`` transformer.

The result of ``malias(m)`` is an outer computation whose value is the inner,
aliased computation.  Which effects land in which layer is exactly what
distinguishes the evaluation strategies.
"""

from __future__ import annotations

import enum
from typing import Callable

from .effects import (
    CellNew,
    CellRead,
    CellWrite,
    Comp,
    Get,
    Pure,
    Spawn,
    Step,
    comp_bind,
)


class StrategyId(enum.Enum):
    CBN = "cbn"
    CBV = "cbv"
    NEED = "need"
    PAR = "par"

    @property
    def parallel(self) -> bool:
        return self is StrategyId.PAR

    @classmethod
    def parse(cls, name: str | StrategyId) -> StrategyId:
        if isinstance(name, cls):
            return name
        aliases = {"cbneed": "need", "parneed": "par", "cbparneed": "par"}
        return cls(aliases.get(name.lower(), name.lower()))


def malias_cbn(m: Comp) -> Comp:
    return Pure(m)


def malias_cbv(m: Comp) -> Comp:
    return comp_bind(m, lambda v: Pure(Pure(v)))


class _Empty:
    def __repr__(self) -> str:
        return "<empty>"


EMPTY = _Empty()


def malias_need(m: Comp) -> Comp:
    """Allocate a cell; the inner computation runs ``m`` at most once."""

    def with_cell(cell) -> Comp:
        def on_read(cached) -> Comp:
            if cached is not EMPTY:
                return Pure(cached)
            return comp_bind(m, lambda v: Step(CellWrite(cell, v), lambda _: Pure(v)))

        return Pure(Step(CellRead(cell), on_read))

    return Step(CellNew(EMPTY), with_cell)


def malias_par(m: Comp) -> Comp:
    return Step(Spawn(m), lambda ivar: Pure(Step(Get(ivar), Pure)))


_STRATEGIES: dict[StrategyId, Callable[[Comp], Comp]] = {
    StrategyId.CBN: malias_cbn,
    StrategyId.CBV: malias_cbv,
    StrategyId.NEED: malias_need,
    StrategyId.PAR: malias_par,
}


def get_strategy(sid: StrategyId | str) -> Callable[[Comp], Comp]:
    return _STRATEGIES[StrategyId.parse(sid)]
