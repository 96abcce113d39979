"""First-class monadic computations and the runtimes that execute them.

A ``Comp`` is either ``Pure(value)`` or ``Step(effect, cont)`` where ``cont``
maps the effect's result to the rest of the computation.  Runtime values are
Python ints and bools, closures produced by the evaluator, or ``Comp`` values
themselves.

Two runtimes share one interface (``run_layer`` / ``finish``):

* ``SeqRuntime`` executes depth-first.  ``Spawn`` runs the task to completion
  on the spot, so Par computations also have a sequential meaning.
* ``ParRuntime`` is a cooperative scheduler in virtual time with unlimited
  workers.  ``Read`` and ``Tick`` cost one tick; everything else is free.

Only ``Read`` and ``Tick`` are observable: cells and scheduling never show up
in a ``Trace``.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Union

DEFAULT_FUEL = 1_000_000


# ---------- computations ----------


@dataclass(frozen=True, eq=False)
class Pure:
    value: Any

    def __eq__(self, other: object) -> bool:
        # structural only for Pure-only trees; Step holds host functions
        return isinstance(other, Pure) and _value_eq(self.value, other.value)

    __hash__ = object.__hash__


@dataclass(frozen=True, eq=False)
class Step:
    effect: EffectRequest
    cont: Callable[[Any], Comp]


Comp = Union[Pure, Step]


def _value_eq(a: Any, b: Any) -> bool:
    if isinstance(a, bool) or isinstance(b, bool):
        return type(a) is type(b) and a == b
    return a == b if not isinstance(a, Step) else a is b


@dataclass(frozen=True)
class CellId:
    id: int


@dataclass(frozen=True)
class IVarId:
    id: int


@dataclass(frozen=True)
class Read:
    key: str


@dataclass(frozen=True)
class Tick:
    label: str


@dataclass(frozen=True)
class CellNew:
    initial: Any


@dataclass(frozen=True)
class CellRead:
    cell: CellId


@dataclass(frozen=True)
class CellWrite:
    cell: CellId
    value: Any


@dataclass(frozen=True, eq=False)
class Spawn:
    task: Comp


@dataclass(frozen=True)
class Get:
    ivar: IVarId


EffectRequest = Union[Read, Tick, CellNew, CellRead, CellWrite, Spawn, Get]


def comp_unit(v: Any) -> Comp:
    return Pure(v)


def comp_bind(m: Comp, k: Callable[[Any], Comp]) -> Comp:
    """Graft ``k`` onto every ``Pure`` leaf of ``m``."""
    if isinstance(m, Pure):
        return k(m.value)
    if isinstance(m, Step):
        cont = m.cont
        return Step(m.effect, lambda v: comp_bind(cont(v), k))
    raise NotAComputation(m)


def comp_map(m: Comp, f: Callable[[Any], Any]) -> Comp:
    return comp_bind(m, lambda v: Pure(f(v)))


def comp_join(mm: Comp) -> Comp:
    return comp_bind(mm, _as_comp)


def _as_comp(v: Any) -> Comp:
    if not isinstance(v, (Pure, Step)):
        raise NotAComputation(v)
    return v


def perform(effect: EffectRequest) -> Comp:
    """The computation that performs one effect and returns its result."""
    return Step(effect, Pure)


def is_comp(v: Any) -> bool:
    return isinstance(v, (Pure, Step))


# ---------- observations ----------


@dataclass(frozen=True)
class ObservedRead:
    key: str
    value: int

    def to_json(self) -> dict:
        return {"type": "read", "key": self.key, "value": self.value}

    def __str__(self) -> str:
        return f"read {self.key} = {self.value}"


@dataclass(frozen=True)
class ObservedTick:
    label: str

    def to_json(self) -> dict:
        return {"type": "tick", "label": self.label}

    def __str__(self) -> str:
        return f"tick {self.label}"


Event = Union[ObservedRead, ObservedTick]


@dataclass(frozen=True)
class Trace:
    events: tuple[Event, ...] = ()

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __add__(self, other: Trace) -> Trace:
        return Trace(self.events + other.events)

    def multiset(self) -> Counter:
        return Counter(self.events)

    def to_json(self) -> dict:
        return {"events": [e.to_json() for e in self.events]}


@dataclass(frozen=True)
class Config:
    entries: Mapping[str, int] = field(default_factory=dict)

    def lookup(self, key: str) -> int:
        try:
            return self.entries[key]
        except KeyError:
            raise MissingKey(key) from None


@dataclass(frozen=True)
class ParReport:
    value: Any
    trace: Trace
    span: int
    work: int

    @property
    def speedup(self) -> float:
        return self.work / self.span if self.span else float("inf")

    def to_json(self) -> dict:
        return {**self.trace.to_json(), "span": self.span, "work": self.work}


# ---------- errors ----------


class RuntimeFailure(Exception):
    """Base class for errors raised while running a computation.

    ``trace`` holds the observable events performed before the failure.
    """

    kind = "RuntimeFailure"

    def __init__(self, message: str):
        super().__init__(message)
        self.trace = Trace()


class MissingKey(RuntimeFailure):
    kind = "MissingKey"

    def __init__(self, key: str):
        super().__init__(f"missing configuration key {key!r}")
        self.key = key


class FuelExhausted(RuntimeFailure):
    kind = "FuelExhausted"

    def __init__(self, fuel: int):
        super().__init__(f"step limit of {fuel} exhausted")


class UnallocatedCell(RuntimeFailure):
    kind = "UnallocatedCell"


class Deadlock(RuntimeFailure):
    kind = "Deadlock"


class NotAComputation(RuntimeFailure):
    kind = "NotAComputation"

    def __init__(self, value: Any):
        super().__init__(f"expected a computation, got {value!r}")


class UnsupportedEffect(RuntimeFailure):
    kind = "UnsupportedEffect"


# ---------- runtimes ----------


class _Runtime:
    """State shared by both runtimes: config, cell store, ivars, trace, fuel."""

    def __init__(self, cfg: Config | Mapping[str, int] | None = None, fuel: int = DEFAULT_FUEL):
        self.cfg = cfg if isinstance(cfg, Config) else Config(dict(cfg or {}))
        self.fuel = fuel
        self.steps = 0
        self.events: list[Event] = []
        self.cells: dict[CellId, Any] = {}
        self.ivars: dict[IVarId, Any] = {}
        self._ids = itertools.count()

    def _burn(self) -> None:
        self.steps += 1
        if self.steps > self.fuel:
            raise FuelExhausted(self.fuel)

    def _observe(self, effect: Read | Tick) -> Any:
        if isinstance(effect, Read):
            value = self.cfg.lookup(effect.key)
            self.events.append(ObservedRead(effect.key, value))
            return value
        self.events.append(ObservedTick(effect.label))
        return 0

    def _cell_op(self, effect: EffectRequest) -> Any:
        if isinstance(effect, CellNew):
            cell = CellId(next(self._ids))
            self.cells[cell] = effect.initial
            return cell
        if effect.cell not in self.cells:
            raise UnallocatedCell(f"cell {effect.cell.id} was never allocated")
        if isinstance(effect, CellRead):
            return self.cells[effect.cell]
        self.cells[effect.cell] = effect.value
        return None

    @property
    def trace(self) -> Trace:
        return Trace(tuple(self.events))

    def run_layer(self, m: Comp) -> Any:
        raise NotImplementedError

    def finish(self) -> None:
        pass

    def run(self, m: Comp) -> Any:
        try:
            value = self.run_layer(m)
            self.finish()
        except RuntimeFailure as err:
            err.trace = self.trace
            raise
        return value


class SeqRuntime(_Runtime):
    def run_layer(self, m: Comp) -> Any:
        while True:
            self._burn()
            if isinstance(m, Pure):
                return m.value
            if not isinstance(m, Step):
                raise NotAComputation(m)
            effect = m.effect
            if isinstance(effect, (Read, Tick)):
                result = self._observe(effect)
            elif isinstance(effect, (CellNew, CellRead, CellWrite)):
                result = self._cell_op(effect)
            elif isinstance(effect, Spawn):
                result = IVarId(next(self._ids))
                try:
                    self.ivars[result] = self.run_layer(effect.task)
                except (FuelExhausted, NotAComputation):
                    raise
                except RuntimeFailure as err:
                    self.ivars[result] = _Failed(err)
            elif isinstance(effect, Get):
                if effect.ivar not in self.ivars:
                    raise Deadlock(f"get on ivar {effect.ivar.id} that is never filled")
                result = _ivar_value(self.ivars[effect.ivar])
            else:
                raise UnsupportedEffect(f"unknown effect {effect!r}")
            m = m.cont(result)


_READY, _BUSY, _BLOCKED, _DONE = "ready", "busy", "blocked", "done"
_NOTHING = object()


@dataclass(frozen=True)
class _Failed:
    """Ivar contents of a spawned task that failed; re-raised on ``Get``."""

    error: RuntimeFailure


def _ivar_value(v: Any) -> Any:
    if isinstance(v, _Failed):
        raise v.error
    return v


@dataclass(eq=False)
class _Task:
    index: int
    comp: Comp
    ivar: IVarId | None
    state: str = _READY
    result: Any = None
    pending: Any = _NOTHING


class ParRuntime(_Runtime):
    """Virtual-time scheduler for Spawn/Get computations.

    Within one tick, ready tasks advance in spawn order through free steps
    until each one issues a costly effect, blocks on an empty ivar, or
    finishes.  Then the clock advances and every costly effect in flight
    completes, its event logged in task order.
    """

    def __init__(self, cfg: Config | Mapping[str, int] | None = None, fuel: int = DEFAULT_FUEL):
        super().__init__(cfg, fuel)
        self.time = 0
        self.work = 0
        self.tasks: list[_Task] = []
        self._main: _Task | None = None

    def _spawn(self, comp: Comp, ivar: IVarId | None) -> _Task:
        task = _Task(len(self.tasks), comp, ivar)
        self.tasks.append(task)
        return task

    def _advance(self, task: _Task) -> None:
        try:
            self._advance_unguarded(task)
        except (FuelExhausted, NotAComputation):
            raise
        except RuntimeFailure as err:
            if task is self._main:
                raise
            # a speculative task failed: only a later get observes it
            task.state, task.result = _DONE, None
            self.ivars[task.ivar] = _Failed(err)

    def _advance_unguarded(self, task: _Task) -> None:
        m = task.comp
        if task.pending is not _NOTHING:
            m, task.pending = m.cont(task.pending), _NOTHING
        while True:
            self._burn()
            if isinstance(m, Pure):
                task.state, task.result, task.comp = _DONE, m.value, m
                if task.ivar is not None:
                    self.ivars[task.ivar] = m.value
                return
            if not isinstance(m, Step):
                raise NotAComputation(m)
            effect = m.effect
            if isinstance(effect, (Read, Tick)):
                task.result = self._observe_later(effect)
                task.state, task.comp = _BUSY, m
                return
            if isinstance(effect, (CellNew, CellRead, CellWrite)):
                result = self._cell_op(effect)
            elif isinstance(effect, Spawn):
                result = IVarId(next(self._ids))
                self._spawn(effect.task, result)
            elif isinstance(effect, Get):
                if effect.ivar not in self.ivars:
                    task.state, task.comp = _BLOCKED, m
                    return
                result = _ivar_value(self.ivars[effect.ivar])
            else:
                raise UnsupportedEffect(f"unknown effect {effect!r}")
            m = m.cont(result)

    def _observe_later(self, effect: Read | Tick) -> tuple[Event, Any]:
        if isinstance(effect, Read):
            value = self.cfg.lookup(effect.key)
            return ObservedRead(effect.key, value), value
        return ObservedTick(effect.label), 0

    def _settle(self) -> None:
        """Run free steps until no task can move without the clock advancing."""
        progress = True
        while progress:
            progress = False
            for task in self.tasks:  # tasks spawned meanwhile are visited too
                if task.state == _BLOCKED and task.comp.effect.ivar in self.ivars:
                    task.state = _READY
                if task.state == _READY:
                    self._advance(task)
                    progress = True

    def _tick(self) -> bool:
        busy = [t for t in self.tasks if t.state == _BUSY]
        if not busy:
            return False
        self.time += 1
        for task in busy:
            event, value = task.result
            self.events.append(event)
            self.work += 1
            task.pending, task.result, task.state = value, None, _READY
        return True

    def run_layer(self, m: Comp) -> Any:
        self._main = self._spawn(m, None)
        while True:
            self._settle()
            if self._main.state == _DONE:
                return self._main.result
            if not self._tick():
                raise Deadlock("every task is blocked on an empty ivar")

    def finish(self) -> None:
        """Let speculative tasks still in flight run to completion."""
        while True:
            self._settle()
            if not self._tick():
                break
        if any(t.state == _BLOCKED for t in self.tasks):
            raise Deadlock("tasks left blocked on ivars that are never filled")

    @property
    def span(self) -> int:
        return self.time


# ---------- entry points ----------


def run_seq(m: Comp, cfg: Config | Mapping[str, int] | None = None, fuel: int = DEFAULT_FUEL) -> tuple[Any, Trace]:
    rt = SeqRuntime(cfg, fuel)
    value = rt.run(m)
    return value, rt.trace


def run_par(m: Comp, cfg: Config | Mapping[str, int] | None = None, fuel: int = DEFAULT_FUEL) -> ParReport:
    rt = ParRuntime(cfg, fuel)
    value = rt.run(m)
    return ParReport(value, rt.trace, rt.span, rt.work)


def flatten_nested(
    mm: Comp,
    cfg: Config | Mapping[str, int] | None = None,
    depth: int = 2,
    parallel: bool = False,
    fuel: int = DEFAULT_FUEL,
) -> tuple:
    """Run a computation nested ``depth`` layers deep, one layer at a time.

    All layers share one runtime (cell store, ivars, scheduler).  Returns one
    trace per layer, outermost first, followed by the final value; for the
    default depth of 2 that is ``(outer, inner, value)``.
    """
    rt: _Runtime = ParRuntime(cfg, fuel) if parallel else SeqRuntime(cfg, fuel)
    traces = []
    value: Any = mm
    try:
        for layer in range(depth):
            if not is_comp(value):
                raise NotAComputation(value)
            start = len(rt.events)
            value = rt.run_layer(value)
            if layer == depth - 1:
                rt.finish()
            traces.append(Trace(tuple(rt.events[start:])))
    except RuntimeFailure as err:
        err.trace = rt.trace
        raise
    return (*traces, value)
