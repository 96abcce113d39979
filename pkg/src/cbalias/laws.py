"""Randomized observational checks of the malias laws and the translations.

Every check runs ``cases`` independent cases.  Case ``i`` draws all of its
randomness from ``case_seed(spec.seed, i)``; a failure records that seed and
``replay`` re-runs exactly that case.

Two computations are observationally equal when running them yields the same
final value and the same visible trace, layer by layer for nested
computations.  Under the parallel strategy, traces are compared as multisets
because the scheduler interleaves tasks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from .effects import (
    Pure,
    RuntimeFailure,
    Trace,
    comp_join,
    comp_map,
    flatten_nested,
    run_par,
    run_seq,
)
from .evaluator import Interpreter, observe
from .gen import FUNCTION_POOL, GenSpec, gen_comp, gen_config, gen_typed_term, term_keys
from .strategies import StrategyId, get_strategy
from .syntax import INT, BOOL, Effect, Expr, Lam, Let, TArrow, Var, children, pretty_source, subst
from .translate import translate, translate_cba

MALIAS_LAWS = ("naturality", "associativity", "computationality", "identity")
TRANSFORMS = ("let-lambda", "let-identity")


@dataclass(frozen=True)
class Failure:
    seed: int
    counterexample: str

    def to_json(self) -> dict:
        return {"seed": self.seed, "counterexample": self.counterexample}


@dataclass
class LawReport:
    law: str
    strategy: str
    cases: int = 0
    failures: list[Failure] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "law": self.law,
            "strategy": self.strategy,
            "cases": self.cases,
            "passed": self.passed,
            "failures": [f.to_json() for f in self.failures],
        }

    def summary(self) -> str:
        status = "PASS" if self.passed else f"FAIL ({len(self.failures)} failures)"
        return f"{self.law:<28} {self.strategy:<5} {self.cases:>6} cases  {status}"


# ---------- observation ----------


def _events(trace: Trace, parallel: bool) -> tuple[str, ...]:
    events = tuple(str(e) for e in trace)
    return tuple(sorted(events)) if parallel else events


def observe_nested(comp, cfg, depth: int, parallel: bool) -> tuple:
    """Layered observation of a nested computation, errors included."""
    try:
        *traces, value = flatten_nested(comp, cfg, depth, parallel)
    except RuntimeFailure as err:
        return ("error", err.kind, _events(err.trace, parallel))
    return ("ok", tuple(_events(t, parallel) for t in traces), observe(value))


def observe_target(target: Expr, strategy: StrategyId, cfg) -> tuple:
    """Evaluate a closed target term under ``strategy`` and observe the run."""
    try:
        comp = Interpreter(strategy).eval(target, {})
        if strategy.parallel:
            report = run_par(comp, cfg)
            return ("ok", _events(report.trace, True), observe(report.value))
        value, trace = run_seq(comp, cfg)
    except RuntimeFailure as err:
        return ("error", err.kind, _events(err.trace, strategy.parallel))
    return ("ok", _events(trace, False), observe(value))


# ---------- malias laws ----------


def _malias_case(law: str, strategy: StrategyId, spec: GenSpec) -> str | None:
    rng = spec.rng()
    g = gen_comp(spec, rng)
    fname = rng.choice(spec.function_pool)
    f = FUNCTION_POOL[fname]
    v = rng.randint(-5, 5)
    cfg = gen_config(rng, spec.effect_keys)
    malias = get_strategy(strategy)
    m = g.comp
    if law == "naturality":
        lhs = comp_map(malias(m), lambda inner: comp_map(inner, f))
        rhs, depth = malias(comp_map(m, f)), 2
    elif law == "associativity":
        lhs = comp_map(malias(m), malias)
        rhs, depth = malias(malias(m)), 3
    elif law == "computationality":
        lhs = malias(Pure(v))
        rhs, depth = Pure(Pure(v)), 2
    elif law == "identity":
        lhs = comp_join(malias(m))
        rhs, depth = m, 1
    else:
        raise ValueError(f"unknown law {law!r}")
    left = observe_nested(lhs, cfg, depth, strategy.parallel)
    right = observe_nested(rhs, cfg, depth, strategy.parallel)
    if left == right:
        return None
    return f"m = {g}; f = {fname}; v = {v}; cfg = {cfg}; lhs = {left}; rhs = {right}"


# ---------- translation equivalence ----------


def _equivalence_case(mode: str, spec: GenSpec) -> str | None:
    rng = spec.rng()
    e, t = gen_typed_term(spec, rng)
    cfg = gen_config(rng, spec.effect_keys)
    strategy = StrategyId.parse(mode)
    aliased = observe_target(translate_cba(e), strategy, cfg)
    direct = observe_target(translate(e, mode), strategy, cfg)
    if aliased == direct:
        return None
    return f"term = {pretty_source(e)} : {t}; cfg = {cfg}; cba = {aliased}; {mode} = {direct}"


# ---------- source transformations ----------


def _transform_case(which: str, strategy: StrategyId, spec: GenSpec) -> str | None:
    rng = spec.rng()
    if which == "let-lambda":
        s = rng.choice((INT, BOOL, TArrow(INT, INT)))
        t = rng.choice((INT, BOOL))
        x = rng.choice(("x", "y"))
        body, _ = gen_typed_term(_shallower(spec), rng, ty=t, ctx=((x, s),))
        lam = Lam(x, body, s)
        fname = rng.choice(("f", "g"))
        e2, _ = gen_typed_term(spec, rng, ctx=((fname, TArrow(s, t)),))
        lhs, rhs = Let(fname, lam, e2), subst(e2, fname, lam)
    elif which == "let-identity":
        e, _ = gen_typed_term(spec, rng)
        lhs, rhs = Let("x", e, Var("x")), e
    else:
        raise ValueError(f"unknown transformation {which!r}")
    cfg = gen_config(rng, spec.effect_keys)
    left = observe_target(translate_cba(lhs), strategy, cfg)
    right = observe_target(translate_cba(rhs), strategy, cfg)
    if left == right:
        return None
    return f"lhs = {pretty_source(lhs)}; rhs = {pretty_source(rhs)}; cfg = {cfg}; {left} != {right}"


def _shallower(spec: GenSpec) -> GenSpec:
    return GenSpec(spec.seed, max(spec.max_depth - 1, 0), spec.effect_keys, spec.function_pool)


# ---------- call-by-need sharing ----------


def sites_outside_lambdas(e: Expr) -> list[str]:
    """Keys/labels of effect leaves that are not inside any lambda body."""
    out: list[str] = []
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Effect):
            out.append(node.arg)
        elif not isinstance(node, Lam):
            stack.extend(children(node))
    return out


def _event_site(ev) -> str:
    return getattr(ev, "key", None) or ev.label


def _at_most_once_case(spec: GenSpec) -> str | None:
    rng = spec.rng()
    e, t = gen_typed_term(spec, rng, unique_sites=True)
    cfg = gen_config(rng, term_keys(e))
    target = translate_cba(e)
    need = _run(target, StrategyId.NEED, cfg)
    cbn = _run(target, StrategyId.CBN, cfg)
    problems = []
    if observe(need[0]) != observe(cbn[0]):
        problems.append(f"values differ: need {observe(need[0])} vs cbn {observe(cbn[0])}")
    need_ms, cbn_ms = need[1].multiset(), cbn[1].multiset()
    if need_ms - cbn_ms:
        problems.append(f"need trace not contained in cbn trace: extra {dict(need_ms - cbn_ms)}")
    counts: dict[str, int] = {}
    for ev in need[1]:
        counts[_event_site(ev)] = counts.get(_event_site(ev), 0) + 1
    for site in sites_outside_lambdas(e):
        if counts.get(site, 0) > 1:
            problems.append(f"site {site} ran {counts[site]} times")
    if not problems:
        return None
    return f"term = {pretty_source(e)} : {t}; cfg = {cfg}; " + "; ".join(problems)


def _par_agreement_case(spec: GenSpec) -> str | None:
    rng = spec.rng()
    e, t = gen_typed_term(spec, rng)
    cfg = gen_config(rng, spec.effect_keys)
    target = translate_cba(e)
    need_value, _ = _run(target, StrategyId.NEED, cfg)
    comp = Interpreter(StrategyId.PAR).eval(target, {})
    report = run_par(comp, cfg)
    problems = []
    if observe(report.value) != observe(need_value):
        problems.append(f"par value {observe(report.value)} != need value {observe(need_value)}")
    if report.span > report.work:
        problems.append(f"span {report.span} > work {report.work}")
    if not problems:
        return None
    return f"term = {pretty_source(e)} : {t}; cfg = {cfg}; " + "; ".join(problems)


def _run(target: Expr, strategy: StrategyId, cfg) -> tuple[Any, Trace]:
    return run_seq(Interpreter(strategy).eval(target, {}), cfg)


# ---------- drivers ----------


def _sweep(law: str, strategy: str, spec: GenSpec, cases: int, case: Callable[[GenSpec], str | None]) -> LawReport:
    report = LawReport(law, strategy)
    for i in range(cases):
        case_spec = spec.case(i)
        try:
            problem = case(case_spec)
        except RuntimeFailure as err:
            problem = f"unexpected {err.kind}: {err}"
        report.cases += 1
        if problem is not None:
            report.failures.append(Failure(case_spec.seed, problem))
    return report


def check_malias_laws(
    strategy: StrategyId | str, spec: GenSpec, cases: int = 1000, laws: tuple[str, ...] = MALIAS_LAWS
) -> list[LawReport]:
    """One report per law: naturality, associativity, computationality, identity."""
    sid = StrategyId.parse(strategy)
    return [_sweep(law, sid.value, spec, cases, lambda s, law=law: _malias_case(law, sid, s)) for law in laws]


def check_equivalence(source_strategy: str, spec: GenSpec, cases: int = 1000) -> LawReport:
    """Call-by-alias with the cbn/cbv malias against the direct cbn/cbv translation."""
    if source_strategy not in ("cbn", "cbv"):
        raise ValueError("equivalence is defined for 'cbn' and 'cbv' only")
    return _sweep(
        f"equivalence-{source_strategy}",
        source_strategy,
        spec,
        cases,
        lambda s: _equivalence_case(source_strategy, s),
    )


def check_source_transforms(strategy: StrategyId | str, spec: GenSpec, cases: int = 1000) -> list[LawReport]:
    sid = StrategyId.parse(strategy)
    return [
        _sweep(f"transform-{which}", sid.value, spec, cases, lambda s, w=which: _transform_case(w, sid, s))
        for which in TRANSFORMS
    ]


def check_at_most_once(spec: GenSpec, cases: int = 500) -> LawReport:
    """Under call-by-need, effects outside lambdas run at most once and agree with cbn."""
    return _sweep("need-at-most-once", "need", spec, cases, _at_most_once_case)


def check_par_agreement(spec: GenSpec, cases: int = 500) -> LawReport:
    """The parallel strategy computes the call-by-need value with span <= work."""
    return _sweep("par-agrees-with-need", "par", spec, cases, _par_agreement_case)


def replay(law: str, strategy: StrategyId | str, seed: int, spec: GenSpec | None = None) -> str | None:
    """Re-run the single case with the given case seed; None means it passes."""
    base = spec or GenSpec()
    case_spec = GenSpec(seed, base.max_depth, base.effect_keys, base.function_pool)
    sid = StrategyId.parse(strategy)
    if law in MALIAS_LAWS:
        return _malias_case(law, sid, case_spec)
    if law.startswith("equivalence-"):
        return _equivalence_case(law.split("-", 1)[1], case_spec)
    if law.startswith("transform-"):
        return _transform_case(law.split("-", 1)[1], sid, case_spec)
    if law == "need-at-most-once":
        return _at_most_once_case(case_spec)
    if law == "par-agrees-with-need":
        return _par_agreement_case(case_spec)
    raise ValueError(f"unknown law {law!r}")


def run_suites(
    strategy: StrategyId | str,
    spec: GenSpec,
    cases: int,
    suites: tuple[str, ...] = ("malias", "equivalence", "transforms"),
) -> list[LawReport]:
    """Every applicable suite for ``strategy``, in a fixed order."""
    sid = StrategyId.parse(strategy)
    reports: list[LawReport] = []
    if "malias" in suites:
        reports += check_malias_laws(sid, spec, cases)
    if "equivalence" in suites and sid in (StrategyId.CBN, StrategyId.CBV):
        reports.append(check_equivalence(sid.value, spec, cases))
    if "transforms" in suites:
        reports += check_source_transforms(sid, spec, cases)
    if "sharing" in suites and sid is StrategyId.NEED:
        reports.append(check_at_most_once(spec, cases))
    if "sharing" in suites and sid is StrategyId.PAR:
        reports.append(check_par_agreement(spec, cases))
    return reports

