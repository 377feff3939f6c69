from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from spcf.programs import corpus_names, corpus_program, template
from spcf.syntax import (
    ADD, HOLE, R, R_TOP, SAMPLE, SUB, App, Arrow, Fix, If, IntervalNum, Lam, Num,
    Prim, Sample, Score, SyntaxError_, TypeError_, Var, is_closed, parse, pretty,
    progress_check, sig_value, subtype, substitute, typecheck, PRIMITIVES,
)


def test_fair_choice_sugar():
    assert parse("0 (+) 1") == If(Prim(SUB, (Sample(), Num(Fraction(1, 2)))), Num(0), Num(1))


def test_biased_choice_sugar():
    t = parse("0 (+ 3/5) 1")
    assert t == If(Prim(SUB, (SAMPLE, Num(Fraction(3, 5)))), Num(0), Num(1))


def test_program_two():
    t = parse("fix f x. if sample <= 1/2 then x else f (f (x+1))")
    one = Num(1)
    expected = Fix("f", "x", If(Prim(SUB, (SAMPLE, Num(Fraction(1, 2)))), Var("x"),
                                App(Var("f"), App(Var("f"), Prim(ADD, (Var("x"), one))))))
    assert t == expected


def test_let_sugar():
    t = parse("let s = sample in s + s")
    assert t == App(Lam("s", Prim(ADD, (Var("s"), Var("s")))), SAMPLE)


def test_iterated_application():
    assert parse("fix f x. f^3(x)") == parse("fix f x. f (f (f x))")


def test_decimal_literals_are_exact():
    assert parse("0.7") == Num(Fraction(7, 10))


def test_syntax_error_position():
    with pytest.raises(SyntaxError_) as e:
        parse("fix f x.\n  (x + )")
    assert e.value.line == 2
    assert e.value.column >= 3


def test_unknown_primitive():
    with pytest.raises(SyntaxError_):
        parse("frob(1, 2)")


def test_interval_numeral_bounds():
    with pytest.raises(ValueError):
        IntervalNum(Fraction(1), Fraction(0))


def test_prim_arity():
    with pytest.raises(ValueError):
        Prim(ADD, (Num(1),))


@pytest.mark.parametrize("name", corpus_names())
def test_corpus_round_trip(name):
    t = corpus_program(name)
    assert parse(pretty(t)) == t


@pytest.mark.parametrize("name", corpus_names())
def test_corpus_closed_and_real(name):
    t = corpus_program(name)
    assert is_closed(t)
    assert typecheck(t) == R


def test_typecheck_examples():
    assert typecheck(Sample()) == R
    assert typecheck(Lam("x", Var("x"))) == Arrow(R, R)
    with pytest.raises(TypeError_):
        typecheck(If(Lam("x", Var("x")), Num(0), Num(1)))
    with pytest.raises(TypeError_):
        typecheck(Var("y"))
    assert typecheck(Score(Num(1))) == R


def test_fix_types_as_function():
    t = parse("fix f x. x (+) f (x + 1)")
    assert typecheck(t) == Arrow(R, R)


def test_subtyping():
    assert subtype(R, R_TOP)
    assert not subtype(R_TOP, R)
    assert subtype(Arrow(R_TOP, R), Arrow(R, R_TOP))
    assert not subtype(Arrow(R, R), Arrow(R_TOP, R))


def test_progress_examples():
    assert progress_check(Prim(ADD, (App(HOLE, Num(1)), Num(1))))
    assert not progress_check(If(App(HOLE, Num(0)), Num(1), Num(2)))
    assert not progress_check(Score(App(HOLE, Num(0))))


def test_progress_running_example():
    fix = corpus_program("ex51").fn
    body = substitute(fix.body, {fix.fvar: HOLE, fix.var: Num(0)})
    assert progress_check(body)


def test_progress_rejects_nested_fix():
    assert not progress_check(parse("fix g y. y"))


def test_progress_weakening():
    # replacing a recursive outcome in a guard by an ordinary numeral
    bad = If(App(HOLE, Num(0)), Num(1), Num(2))
    good = If(Num(0), Num(1), Num(2))
    assert not progress_check(bad)
    assert progress_check(good)


def test_substitution_examples():
    assert substitute(Var("x"), {"x": Num(3)}) == Num(3)
    assert substitute(Lam("x", Var("x")), {"x": Num(3)}) == Lam("x", Var("x"))
    r = substitute(Lam("y", Var("x")), {"x": Var("y")})
    assert isinstance(r, Lam) and r.var != "y" and r.body == Var("y")


def test_sig_enclosure():
    lo, hi = PRIMITIVES["sig"].interval((Fraction(0), Fraction(0)))
    assert lo <= Fraction(1, 2) <= hi
    assert hi - lo <= Fraction(1, 2 ** 60)
    assert sig_value(Fraction(0)) == Fraction(1, 2)


names = st.sampled_from(["x", "y", "z"])


@st.composite
def terms(draw, depth=3):
    if depth == 0:
        return draw(st.one_of(names.map(Var), st.integers(-3, 3).map(Num), st.just(SAMPLE)))
    kind = draw(st.integers(0, 4))
    if kind == 0:
        return draw(terms(depth=0))
    if kind == 1:
        return Lam(draw(names), draw(terms(depth=depth - 1)))
    if kind == 2:
        return App(draw(terms(depth=depth - 1)), draw(terms(depth=depth - 1)))
    if kind == 3:
        return Prim(ADD, (draw(terms(depth=depth - 1)), draw(terms(depth=depth - 1))))
    return If(draw(terms(depth=depth - 1)), draw(terms(depth=depth - 1)), draw(terms(depth=depth - 1)))


@given(terms(), names, terms())
def test_substitution_avoids_capture(t, x, s):
    r = substitute(t, {x: s})
    # free variables of the result are those of t without x, plus those of s if x occurred
    expected = (t._fv - {x}) | (s._fv if x in t._fv else frozenset())
    assert r._fv == expected


@given(terms())
def test_pretty_round_trip(t):
    assert parse(pretty(t)) == t


@given(st.fractions(min_value=0, max_value=1, max_denominator=50))
def test_template_parameter(p):
    t = template("geo", p)
    assert t.fn.body.guard.args[1] == Num(p)
