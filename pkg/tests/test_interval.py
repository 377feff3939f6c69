from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from spcf.interval import (
    as_trace, compatible, embed, pairwise, refinement_check, run_interval,
    step_interval, strong_split, strongly_compatible, weight,
)
from spcf.programs import corpus_program, template
from spcf.semantics import Indeterminate, Outcome, Stuck, run_cbn
from spcf.syntax import IntervalNum, Num, parse

F = Fraction
HALF = F(1, 2)


def I(lo, hi):
    return (F(lo), F(hi))


def test_embed_replaces_numerals():
    assert embed(Num(3)) == IntervalNum(F(3), F(3))
    assert embed(parse("1 + sample")).args[0] == IntervalNum(F(1), F(1))


def test_weight():
    assert weight(()) == 1
    assert weight((I(0, "1/2"), I("1/4", 1))) == F(3, 8)


def test_bad_trace_rejected():
    with pytest.raises(ValueError):
        as_trace([(F(1, 2), F(1, 3))])
    with pytest.raises(ValueError):
        as_trace([(F(-1), F(0))])


def test_sample_reads_interval():
    t, rest = step_interval(embed(parse("sample")), (I(0, HALF),))
    assert t == IntervalNum(F(0), HALF) and rest == ()


def test_guard_straddling_zero_is_indeterminate():
    t = embed(parse("if sample - 1/2 then 0 else 1"))
    r = run_interval(t, (I("1/4", "3/4"),))
    assert r.outcome is Outcome.INDETERMINATE


def test_if_rule_is_strict_on_the_else_side():
    t = embed(parse("if sample - 1/2 then 0 else 1"))
    assert run_interval(t, (I(0, HALF),)).term == IntervalNum(F(0), F(0))
    # [1/2, 1] touches the boundary: the guard interval is [0, 1/2], not > 0
    assert run_interval(t, (I(HALF, 1),)).outcome is Outcome.INDETERMINATE


def test_score_intervals():
    assert run_interval(embed(parse("score(sample)")), (I(0, 1),)).terminated
    r = run_interval(embed(parse("score(sample - 1/2)")), (I(0, 1),))
    assert r.outcome is Outcome.INDETERMINATE
    with pytest.raises(Stuck):
        t = embed(parse("score(0 - 1)"))
        t, _ = step_interval(t, ())
        step_interval(t, ())


def test_indeterminate_step_raises():
    t = embed(parse("if sample - 1/2 then 0 else 1"))
    t, tr = step_interval(t, (I(0, 1),))
    t, tr = step_interval(t, tr)
    with pytest.raises(Indeterminate):
        step_interval(t, tr)


def test_geo_boxes_terminate():
    t = embed(corpus_program("geo_half"))
    r = run_interval(t, (I("3/4", 1), I(0, "1/4")))
    assert r.terminated and r.term == IntervalNum(F(1), F(1))


def test_compatibility_examples():
    a = (I(0, HALF),)
    b = (I(HALF, 1),)
    c = (I(0, 1),)
    assert compatible(a, b) and strongly_compatible(a, b)
    assert not compatible(a, c)
    # different lengths are compatible
    assert compatible(c, (I(0, 1), I(0, 1)))
    # prefix relation fails strong compatibility only when equal
    assert strongly_compatible(c, (I(0, 1), I(0, 1)))
    assert not strongly_compatible(c, c)
    # compatible but not strongly compatible
    p = (I(0, HALF), I(0, 1))
    q = (I(0, 1), I(HALF, 1), I(0, 1))
    assert compatible(p, q)
    assert not strongly_compatible(p, q)


def test_strong_split_example():
    p = (I(0, HALF), I(0, HALF))
    q = (I(0, 1), I(HALF, 1))
    assert compatible(p, q) and not strongly_compatible(p, q)
    pieces = strong_split([p, q])
    assert pairwise(strongly_compatible, pieces)
    assert sum(map(weight, pieces)) == weight(p) + weight(q)


@pytest.mark.parametrize("name", ["geo_half", "print_half", "gr"])
def test_refinement_on_terminating_boxes(name):
    t = corpus_program(name)
    tr = {"geo_half": (I("3/4", 1), I("3/4", 1), I(0, "1/2")),
          "print_half": (I(0, "1/4"),),
          "gr": (I(0, "1/4"),)}[name]
    r = run_interval(embed(t), tr)
    assert r.terminated
    rep = refinement_check(t, tr, samples=200, seed=1)
    assert rep.ok


# --- properties


dyadic = st.integers(0, 16).map(lambda k: F(k, 16))


@st.composite
def boxes(draw, max_len=4):
    n = draw(st.integers(1, max_len))
    out = []
    for _ in range(n):
        a, b = sorted((draw(dyadic), draw(dyadic)))
        assume(a < b)
        out.append((a, b))
    return tuple(out)


@st.composite
def sided(draw, max_len=5):
    """Boxes that sit on one side of 1/2, so guards against 1/2 resolve."""
    n = draw(st.integers(1, max_len))
    out = []
    for _ in range(n):
        if draw(st.booleans()):
            a, b = sorted(draw(st.lists(st.integers(0, 8), min_size=2, max_size=2, unique=True)))
        else:
            a, b = sorted(draw(st.lists(st.integers(9, 16), min_size=2, max_size=2, unique=True)))
        out.append((F(a, 16), F(b, 16)))
    return tuple(out)


@pytest.mark.parametrize("fam", ["geo", "prog2", "print"])
@given(tr=sided(), seed=st.integers(0, 1000))
def test_interval_run_is_sound(fam, tr, seed):
    t = template(fam, HALF)
    r = run_interval(embed(t), tr)
    if r.terminated:
        assert refinement_check(t, tr, samples=20, seed=seed).ok


@pytest.mark.parametrize("fam", ["geo", "prog2"])
@given(tr=sided())
def test_endpoints_agree_with_interval_run(fam, tr):
    t = template(fam, HALF)
    r = run_interval(embed(t), tr)
    if r.terminated:
        for pick in (0, 1):
            res = run_cbn(t, [iv[pick] for iv in tr])
            assert res.terminated and res.steps == r.steps


@given(st.lists(boxes(max_len=3), min_size=1, max_size=4))
def test_strong_split_preserves_weight(traces):
    # make them pairwise compatible by keeping a greedy compatible subset
    keep = []
    for tr in traces:
        if all(compatible(tr, k) for k in keep):
            keep.append(tr)
    pieces = strong_split(keep)
    assert pairwise(strongly_compatible, pieces)
    assert sum(map(weight, pieces)) == sum(map(weight, keep))
