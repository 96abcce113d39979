import json

import pytest

import cbalias.laws as laws
from cbalias.effects import Pure, Read, comp_bind, comp_join, perform
from cbalias.gen import GenSpec, gen_typed_term
from cbalias.laws import (
    MALIAS_LAWS,
    check_at_most_once,
    check_equivalence,
    check_malias_laws,
    check_par_agreement,
    check_source_transforms,
    observe_nested,
    observe_target,
    replay,
    run_suites,
    sites_outside_lambdas,
)
from cbalias.parser import parse_expr
from cbalias.strategies import StrategyId, malias_need
from cbalias.syntax import Let, Var
from cbalias.translate import translate, translate_cba, translate_cbv

SPEC = GenSpec(seed=7, max_depth=4)


@pytest.mark.parametrize("strategy", list(StrategyId))
def test_malias_laws_hold(strategy):
    reports = check_malias_laws(strategy, SPEC, cases=200)
    assert [r.law for r in reports] == list(MALIAS_LAWS)
    for r in reports:
        assert r.cases == 200
        assert r.passed, r.failures[:2]


@pytest.mark.parametrize("mode", ["cbn", "cbv"])
def test_equivalence_holds(mode):
    r = check_equivalence(mode, GenSpec(seed=5, max_depth=5), cases=200)
    assert r.passed, r.failures[:2]


def test_equivalence_rejects_other_modes():
    with pytest.raises(ValueError):
        check_equivalence("need", SPEC, 1)


@pytest.mark.parametrize("strategy", list(StrategyId))
def test_source_transforms_hold(strategy):
    for r in check_source_transforms(strategy, GenSpec(seed=2, max_depth=4), cases=150):
        assert r.passed, r.failures[:2]


def test_at_most_once_and_par_agreement():
    assert check_at_most_once(GenSpec(seed=4, max_depth=5), 150).passed
    assert check_par_agreement(GenSpec(seed=4, max_depth=5), 150).passed


# ---------- worked examples ----------


def test_cbv_equivalence_example():
    e = parse_expr('let x = read "k" in x + x')
    cfg = {"k": 4}
    expected = ("ok", ('read k = 4',), 8)
    assert observe_target(translate_cba(e), StrategyId.CBV, cfg) == expected
    assert observe_target(translate_cbv(e), StrategyId.CBV, cfg) == expected


def test_need_identity_on_read():
    m = perform(Read("k"))
    expected = ("ok", (("read k = 6",),), 6)
    assert observe_nested(comp_join(malias_need(m)), {"k": 6}, 1, False) == expected
    assert observe_nested(m, {"k": 6}, 1, False) == expected


@pytest.mark.parametrize("strategy", list(StrategyId))
def test_let_identity_on_read(strategy):
    e = parse_expr('read "k"')
    lhs = observe_target(translate_cba(Let("x", e, Var("x"))), strategy, {"k": 1})
    assert lhs == observe_target(translate_cba(e), strategy, {"k": 1})


def test_let_identity_on_literal():
    lhs = observe_target(translate_cba(parse_expr("let x = 3 in x")), StrategyId.NEED, {})
    assert lhs == ("ok", (), 3)


def test_let_lambda_effect_free_body():
    lhs = parse_expr("let f = \\x:int. x + 1 in f (f 2)")
    rhs = parse_expr("(\\x:int. x + 1) ((\\x:int. x + 1) 2)")
    for sid in StrategyId:
        assert observe_target(translate_cba(lhs), sid, {}) == observe_target(translate_cba(rhs), sid, {})


def test_errors_are_observations():
    obs = observe_target(translate_cba(parse_expr('read "missing"')), StrategyId.CBN, {})
    assert obs == ("error", "MissingKey", ())


def test_sites_outside_lambdas():
    e = parse_expr('(\\x:int. read "in") (read "out" + tick "t")')
    assert sorted(sites_outside_lambdas(e)) == ["out", "t"]


# ---------- the checks catch broken implementations ----------


def run_effects_twice(m):
    # outer layer runs m, inner layer runs it again
    return comp_bind(m, lambda _v: Pure(m))


def drop_effects(m):
    return Pure(Pure(0))


@pytest.mark.parametrize("broken", [run_effects_twice, drop_effects])
def test_broken_malias_is_caught(monkeypatch, broken):
    monkeypatch.setattr(laws, "get_strategy", lambda sid: broken)
    reports = check_malias_laws("cbv", SPEC, cases=100)
    identity = next(r for r in reports if r.law == "identity")
    assert not identity.passed
    assert identity.failures[0].counterexample


def test_broken_par_malias_is_caught(monkeypatch):
    monkeypatch.setattr(laws, "get_strategy", lambda sid: run_effects_twice)
    reports = check_malias_laws("par", SPEC, cases=100)
    assert not all(r.passed for r in reports)


def test_mismatched_equivalence_is_detected(monkeypatch):
    monkeypatch.setattr(laws, "translate", lambda e, mode: translate(e, "cbn"))
    r = check_equivalence("cbv", GenSpec(seed=1, max_depth=5), cases=200)
    assert not r.passed
    assert "cba =" in r.failures[0].counterexample


def test_broken_need_sharing_is_detected(monkeypatch):
    import cbalias.evaluator as ev

    real = ev.get_strategy
    monkeypatch.setattr(ev, "get_strategy", lambda sid: real("cbn") if sid is StrategyId.NEED else real(sid))
    r = check_at_most_once(GenSpec(seed=4, max_depth=5), 200)
    assert not r.passed


def test_replay_reproduces_failure(monkeypatch):
    monkeypatch.setattr(laws, "get_strategy", lambda sid: run_effects_twice)
    report = next(r for r in check_malias_laws("cbn", SPEC, cases=50) if r.law == "identity")
    failure = report.failures[0]
    assert replay("identity", "cbn", failure.seed, SPEC) == failure.counterexample


def test_replay_passing_case():
    assert replay("identity", "need", SPEC.case(3).seed, SPEC) is None
    assert replay("equivalence-cbn", "cbn", SPEC.case(3).seed, SPEC) is None
    assert replay("transform-let-identity", "par", SPEC.case(3).seed, SPEC) is None
    with pytest.raises(ValueError):
        replay("no-such-law", "cbn", 0)


# ---------- reports ----------


def test_report_json_and_determinism():
    a = [r.to_json() for r in run_suites("need", SPEC, 30, ("malias", "transforms", "sharing"))]
    b = [r.to_json() for r in run_suites("need", SPEC, 30, ("malias", "transforms", "sharing"))]
    assert json.dumps(a) == json.dumps(b)
    assert [r["law"] for r in a] == [*MALIAS_LAWS, "transform-let-lambda", "transform-let-identity", "need-at-most-once"]
    assert set(a[0]) == {"law", "strategy", "cases", "passed", "failures"}


def test_suites_per_strategy():
    names = [r.law for r in run_suites("cbv", SPEC, 2, ("equivalence", "sharing"))]
    assert names == ["equivalence-cbv"]
    names = [r.law for r in run_suites("par", SPEC, 2, ("equivalence", "sharing"))]
    assert names == ["par-agrees-with-need"]


def test_generation_is_pure_function_of_seed():
    assert gen_typed_term(SPEC.case(12)) == gen_typed_term(SPEC.case(12))
