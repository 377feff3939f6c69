from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from oracles import geo_steps
from spcf.programs import corpus_program, template
from spcf.semantics import run_cbn
from spcf.symexec import (
    GT0, LE0, NoPath, BudgetExceeded, check_box, constant_value, oracle_frontier,
    sample_vars, sym_interval, symbolic_run,
)
from spcf.syntax import ADD, SUB, BoxedPrim, Num, SampleVar, parse

F = Fraction
HALF = F(1, 2)


def x(i):
    return SampleVar(i)


@pytest.mark.parametrize("j", range(5))
def test_geo_oracle(j):
    r = symbolic_run(corpus_program("geo_half"), "R" * j + "L")
    assert constant_value(r.value) == j
    assert r.steps == geo_steps(j)
    assert r.var_count == j + 1
    assert [rel for _, rel in r.constraints] == [GT0] * j + [LE0]


def test_wrong_oracles():
    t = corpus_program("geo_half")
    with pytest.raises(NoPath):
        symbolic_run(t, "R")
    with pytest.raises(NoPath):
        symbolic_run(t, "LL")
    with pytest.raises(NoPath):
        symbolic_run(parse("if 1 then 0 else 1"), "L")
    assert symbolic_run(parse("if 1 then 0 else 1"), "R").value == Num(1)


def test_budget():
    with pytest.raises(BudgetExceeded):
        symbolic_run(parse("(fix f x. f x) 0"), "", budget=100)


def test_score_records_constraint():
    r = symbolic_run(parse("score(sample - 1/4)"), "")
    assert len(r.constraints) == 1 and r.constraints[0][1] == ">=0"


def test_helpers():
    v = BoxedPrim(ADD, (x(0), BoxedPrim(SUB, (x(2), Num(HALF)))))
    assert sample_vars(v) == {0, 2}
    assert sym_interval(v, ((F(0), HALF), (F(0), F(1)), (HALF, F(1)))) == (F(0), F(1))
    assert constant_value(BoxedPrim(ADD, (Num(1), Num(2)))) == 3
    assert constant_value(v) is None
    c = [(BoxedPrim(SUB, (x(0), Num(HALF))), LE0)]
    assert check_box(c, ((F(0), HALF),)) == "inside"
    assert check_box(c, ((F(3, 4), F(1)),)) == "outside"
    assert check_box(c, ((F(0), F(1)),)) == "straddle"


@pytest.mark.parametrize("k", [1, 2, 5, 10])
def test_geo_frontier_size(k):
    # the run returning j takes 5j + 4 steps
    f = oracle_frontier(corpus_program("geo_half"), 5 * k)
    assert len(f.results) == k
    assert [r.oracle for r in f.results] == ["R" * j + "L" for j in range(k)]


def test_frontier_matches_single_runs():
    t = corpus_program("print_half")
    for r in oracle_frontier(t, 40).results:
        s = symbolic_run(t, r.oracle)
        assert s.steps == r.steps and s.constraints == r.constraints
        assert s.value == r.value


def _holds(cons, point):
    box = tuple((p, p) for p in point)
    return check_box(cons, box) == "inside"


unit = st.fractions(min_value=0, max_value=1, max_denominator=30)


@pytest.mark.parametrize("fam", ["geo", "prog1", "prog2", "print"])
@given(trace=st.lists(unit, max_size=6))
def test_every_terminating_trace_has_its_oracle(fam, trace):
    t = template(fam, HALF)
    res = run_cbn(t, trace, budget=60)
    if not res.terminated:
        return
    hits = [r for r in oracle_frontier(t, 60).results
            if r.var_count == len(trace) and _holds(r.constraints, trace)]
    assert len(hits) == 1
    assert hits[0].steps == res.steps
    assert constant_value(hits[0].value) == res.term.value
