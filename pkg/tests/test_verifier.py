from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from spcf.programs import corpus_program, template
from spcf.verifier import PreconditionError, verify_ast
from spcf.syntax import parse

F = Fraction


@pytest.mark.parametrize("name", ["prog1_half", "print2_half", "print3_2_3", "ex51", "ex513"])
def test_published_programs_are_ast(name):
    v = verify_ast(corpus_program(name))
    assert v.ast and v.reason == "AST"
    assert v.independence
    assert v.checks["sum"] == 1 and v.checks["not_delta1"] and v.checks["drift"] <= 0


def test_sharp_thresholds():
    assert verify_ast(template("prog2", F(1, 2))).ast
    v = verify_ast(template("prog2", F(49, 100)))
    assert v.decision == "Unknown" and v.checks["drift"] == F(1, 50)
    assert verify_ast(template("ex513", F(13, 20))).ast
    v = verify_ast(template("ex513", F(16, 25)))
    assert v.decision == "Unknown" and v.checks["drift"] == F(19, 1250)


def test_point_mass_is_unknown():
    v = verify_ast(corpus_program("bin_half_2"))
    assert v.decision == "Unknown"
    assert v.checks["not_delta1"] is False


def test_positive_drift_is_unknown():
    v = verify_ast(corpus_program("gr"))
    assert v.decision == "Unknown" and v.checks["drift"] == F(1, 2)


def test_preconditions():
    with pytest.raises(PreconditionError):
        verify_ast(parse("1 + 1"))
    with pytest.raises(PreconditionError):
        verify_ast(parse("fix f x. if f x then 0 else 1"))
    with pytest.raises(PreconditionError):
        verify_ast(parse("fix f x. f y"))


def test_nonlinear_white_guard_is_unknown():
    v = verify_ast(parse("fix f x. if sig(sample) - 3/5 then x else f (f x)"))
    assert v.decision == "Unknown" and "nonlinear" in v.reason


@settings(max_examples=30)
@given(st.integers(0, 40).map(lambda k: F(k, 40)))
def test_prog2_threshold(p):
    # AST iff p >= 1/2
    assert verify_ast(template("prog2", p)).ast == (p >= F(1, 2))


@settings(max_examples=30)
@given(st.integers(0, 100).map(lambda k: F(k, 100)))
def test_ex513_threshold(p):
    # drift -p + (1 - p)^2 / 2 + (1 - p^2) = (3 - 4p - p^2) / 2, so p >= sqrt(7) - 2
    assert verify_ast(template("ex513", p)).ast == (p * p + 4 * p - 3 >= 0)
