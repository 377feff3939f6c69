import json
from fractions import Fraction
from pathlib import Path

import jsonschema
import pytest
from hypothesis import given, settings, strategies as st

from spcf.interval import embed, run_interval, weight
from spcf.itypes import (
    Derivation, Elem, IntervalType, PrimPremise, SynthesisError, check_derivation,
    derivation_json, expectation, find_violation, num_node, omega, prim_type,
    sample_node, score_type, shift, size, synthesize,
)
from spcf.lowerbound import lower_bound
from spcf.programs import corpus_program, template
from spcf.syntax import ADD, IntervalNum, Prim, SAMPLE, Score, parse

F = Fraction
HALF = F(1, 2)
DOCS = Path(__file__).resolve().parent.parent / "docs"


def I(lo, hi):
    return (F(lo), F(hi))


def test_omega_and_expectation():
    a = frozenset({Elem(IntervalType(F(0), F(0)), (I(0, HALF),), 3),
                   Elem(IntervalType(F(1), F(1)), (I(HALF, 1), I(0, 1)), 5)})
    assert omega(a) == 1
    assert expectation(a) == 4


def test_shift():
    a = frozenset({Elem(IntervalType(F(0), F(0)), (I(0, 1),), 1)})
    b = shift(a, (I(0, HALF),), 2)
    assert b == {Elem(IntervalType(F(0), F(0)), (I(0, HALF), I(0, 1)), 3)}


def test_sample_and_num_nodes_check():
    assert check_derivation(num_node(IntervalNum(F(1), F(2))))
    assert check_derivation(sample_node([I(0, HALF), I(HALF, 1)]))


def test_prim_node():
    a = num_node(IntervalNum(F(1), F(1)))
    s = sample_node([I(0, HALF)])
    prem = PrimPremise(a, {e: PrimPremise(s) for e in a.type})
    t = Prim(ADD, (IntervalNum(F(1), F(1)), SAMPLE))
    ty = prim_type(ADD, prem)
    assert ty == {Elem(IntervalType(F(1), F(3, 2)), (I(0, HALF),), 2)}
    d = Derivation("prim", t, ty, prim=prem)
    assert check_derivation(d)
    bad = Derivation("prim", t, frozenset({Elem(IntervalType(F(1), F(2)), (I(0, HALF),), 2)}), prim=prem)
    assert find_violation(bad) is not None


def test_score_drops_negative_boxes():
    s = sample_node([I(0, HALF)])
    assert score_type(s.type) == {Elem(IntervalType(F(0), HALF), (I(0, HALF),), 2)}
    d = Derivation("score", Score(SAMPLE), score_type(s.type), arg=s)
    assert check_derivation(d)


def test_synthesize_single_sample():
    d = synthesize(embed(parse("sample")), [((I(0, HALF),), 1)])
    assert d.type == {Elem(IntervalType(F(0), HALF), (I(0, HALF),), 1)}
    assert check_derivation(d)


def test_synthesize_rejects_overlap():
    t = embed(corpus_program("geo_half"))
    boxes = [((I(0, HALF),), 4), ((I(0, HALF),), 4)]
    with pytest.raises(SynthesisError):
        synthesize(t, boxes)


@pytest.mark.parametrize("name", ["geo_half", "gr", "print_half", "bin_half_2", "rw_half_1"])
def test_certificate_round_trip(name):
    t = corpus_program(name)
    r = lower_bound(t, 12, F(1, 16), certificate=True)
    d = synthesize(embed(t), r.certificate, split=True)
    assert check_derivation(d)
    assert d.omega == r.certified_probability
    assert d.expectation == r.certified_expected_steps
    assert size(d) > 0


def test_tampering_is_detected():
    t = embed(corpus_program("geo_half"))
    r = lower_bound(corpus_program("geo_half"), 10, F(1, 16), certificate=True)
    d = synthesize(t, r.certificate, split=True)
    assert check_derivation(d)
    e = next(iter(d.type))
    d.type = (d.type - {e}) | {Elem(e.alpha, e.trace, e.steps + 1)}
    v = find_violation(d)
    assert v is not None and v.node is d


def test_tampering_deep_leaf():
    t = embed(parse("sample + 1"))
    d = synthesize(t, [((I(0, HALF),), 2)])
    assert check_derivation(d)
    leaf = d.prim.deriv
    leaf.type = frozenset({Elem(IntervalType(F(0), F(1)), (I(0, 1),), 1)})
    assert not check_derivation(d)


def test_derivation_json_schema():
    t = corpus_program("geo_half")
    r = lower_bound(t, 10, F(1, 16), certificate=True)
    d = synthesize(embed(t), r.certificate, split=True)
    schema = json.loads((DOCS / "derivation.schema.json").read_text())
    jsonschema.validate(derivation_json(d), schema)


low = st.lists(st.integers(0, 8), min_size=2, max_size=2, unique=True).map(sorted)
high = st.lists(st.integers(9, 16), min_size=2, max_size=2, unique=True).map(sorted)


@settings(max_examples=25)
@given(st.lists(high, max_size=3), low, st.sampled_from(["geo", "prog1"]))
def test_single_trace_synthesis(prefix, last, fam):
    tr = tuple((F(a, 16), F(b, 16)) for a, b in prefix + [last])
    t = embed(template(fam, HALF))
    r = run_interval(t, tr)
    if not r.terminated:
        return
    d = synthesize(t, [(tr, r.steps)])
    assert check_derivation(d)
    assert d.type == {Elem(IntervalType(r.term.lo, r.term.hi), tr, r.steps)}
    assert d.omega == weight(tr)
