import pytest
from hypothesis import given
from hypothesis import strategies as st

from cbalias.gen import GenSpec, gen_typed_term
from cbalias.parser import parse_expr, parse_program
from cbalias.syntax import (
    INT,
    TM,
    App,
    Bind,
    DefRef,
    Effect,
    IntLit,
    Lam,
    Let,
    MAlias,
    PrimOp,
    TArrow,
    Unit,
    Var,
    alpha_equivalent,
    count_nodes,
    free_vars,
)
from cbalias.translate import (
    PreservationError,
    translate,
    translate_cba,
    translate_cbn,
    translate_cbv,
    translate_program,
    translate_type_cba,
    translate_type_cbv,
    verify_typing_preservation,
)
from cbalias.typecheck import TypeContext, check_program, check_target

seeds = st.integers(min_value=0, max_value=2**32)
E1 = Effect("read", "k")


# ---------- call-by-name ----------


def test_cbn_lambda():
    assert translate_cbn(Lam("x", Var("x"))) == Unit(Lam("x", Var("x")))


def test_cbn_let():
    assert translate_cbn(Let("x", E1, Var("x"))) == App(Lam("x", Var("x")), E1)


def test_cbn_var():
    assert translate_cbn(Var("y")) == Var("y")


def test_cbn_app():
    out = translate_cbn(App(Var("f"), Var("a")))
    assert alpha_equivalent(out, Bind(Var("f"), Lam("g", App(Var("g"), Var("a")))))


# ---------- call-by-value ----------


def test_cbv_var():
    assert translate_cbv(Var("x")) == Unit(Var("x"))


def test_cbv_let():
    assert translate_cbv(Let("x", E1, Var("y"))) == Bind(E1, Lam("x", Unit(Var("y"))))


def test_cbv_literal():
    assert translate_cbv(IntLit(3)) == Unit(IntLit(3))


def test_cbv_app():
    out = translate_cbv(App(Var("f"), Var("a")))
    expected = Bind(Unit(Var("f")), Lam("g", Bind(Unit(Var("a")), Lam("v", App(Var("g"), Var("v"))))))
    assert alpha_equivalent(out, expected)


# ---------- call-by-alias ----------


def test_cba_let_identity():
    assert translate_cba(Let("x", E1, Var("x"))) == Bind(MAlias(E1), Lam("x", Var("x")))


def test_cba_app():
    f, a = Var("f"), Var("a")
    out = translate_cba(App(f, a))
    assert alpha_equivalent(out, Bind(f, Lam("g", Bind(MAlias(a), Var("g")))))


def test_cba_var():
    assert translate_cba(Var("z")) == Var("z")


def test_extensions_shared_by_all_modes():
    e = PrimOp("add", IntLit(1), E1)
    for mode in ("cbn", "cbv", "cba"):
        out = translate(e, mode)
        expected = Bind(Unit(IntLit(1)), Lam("a", Bind(E1, Lam("b", Unit(PrimOp("add", Var("a"), Var("b")))))))
        assert alpha_equivalent(out, expected)
        assert translate(DefRef("f"), mode) == DefRef("f")


def test_fresh_binders_cannot_capture():
    # the user's own f must stay free after translation
    e = App(Lam("x", Var("f")), IntLit(1))
    for mode in ("cbn", "cbv", "cba"):
        assert free_vars(translate(e, mode)) == {"f"}


def test_unknown_mode():
    with pytest.raises(ValueError):
        translate(IntLit(1), "cbx")


# ---------- types ----------


def test_type_translation_cba():
    assert translate_type_cba(INT) == INT
    assert translate_type_cba(TArrow(INT, INT)) == TArrow(TM(INT), TM(INT))
    assert translate_type_cba(TArrow(TArrow(INT, INT), INT)) == TArrow(TM(TArrow(TM(INT), TM(INT))), TM(INT))


def test_type_translation_cbv():
    assert translate_type_cbv(TArrow(TArrow(INT, INT), INT)) == TArrow(TArrow(INT, TM(INT)), TM(INT))


def test_nested_arrow_type_checks_at_translated_type():
    e = parse_expr("\\f:int -> int. f 1")
    target = translate_cba(e)
    assert check_target(TypeContext(), target, TM(translate_type_cba(TArrow(TArrow(INT, INT), INT))))


# ---------- preservation ----------


def test_preservation_identity():
    assert verify_typing_preservation(parse_expr("\\x:int. x"))
    assert check_target(TypeContext(), translate_cba(parse_expr("\\x:int. x")), TM(TArrow(TM(INT), TM(INT))))


def test_preservation_open_term():
    ctx = TypeContext.of({"y": INT, "g": TArrow(INT, INT)})
    assert verify_typing_preservation(parse_expr("g (y + 1)"), ctx)


def test_preservation_resultsize(resultsize):
    p, t = check_program(parse_program(resultsize))
    assert t == INT
    ctx = TypeContext.of(defs=p.def_types())
    assert verify_typing_preservation(p.main, ctx)


def test_translated_programs_typecheck(resultsize, fib):
    for text in (resultsize, fib):
        p, t = check_program(parse_program(text))
        for mode in ("cbn", "cbv", "cba"):
            target = translate_program(p, mode)
            defs = {d.name: d.type for d in target.defs}
            ctx = TypeContext.of(defs=defs)
            for d in target.defs:
                assert check_target(ctx, d.body, d.type), (mode, d.name)
            tt = translate_type_cbv(t) if mode == "cbv" else translate_type_cba(t)
            assert check_target(ctx, target.main, TM(tt)), mode


def test_preservation_error_is_raised_on_broken_translation(monkeypatch):
    import cbalias.translate as tr

    monkeypatch.setattr(tr, "translate_cba", lambda e: Unit(Unit(IntLit(0))))
    with pytest.raises(PreservationError):
        tr.verify_typing_preservation(IntLit(1))


def test_preservation_1000_terms():
    spec = GenSpec(seed=3, max_depth=6)
    for i in range(1000):
        e, _ = gen_typed_term(spec.case(i))
        assert verify_typing_preservation(e)


@given(seeds)
def test_malias_count_matches_app_and_let(seed):
    e, _ = gen_typed_term(GenSpec(seed=seed, max_depth=5))
    assert count_nodes(translate_cba(e), MAlias) == count_nodes(e, (App, Let))


@given(seeds)
def test_cbn_cbv_never_emit_malias(seed):
    e, _ = gen_typed_term(GenSpec(seed=seed, max_depth=5))
    assert count_nodes(translate_cbn(e), MAlias) == 0
    assert count_nodes(translate_cbv(e), MAlias) == 0


@given(seeds)
def test_closed_source_gives_closed_target(seed):
    e, _ = gen_typed_term(GenSpec(seed=seed, max_depth=5))
    for mode in ("cbn", "cbv", "cba"):
        assert free_vars(translate(e, mode)) == set()
