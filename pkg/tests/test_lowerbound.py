import json
from fractions import Fraction

import jsonschema
import pytest
from hypothesis import given, settings, strategies as st

from oracles import geo_expected_steps, geo_lb, print_quarter_probability
from spcf.cli import fmt_rational
from spcf.interval import compatible, embed, pairwise, refinement_check, run_interval
from spcf.lowerbound import (
    certificate_json, emit_certificate, load_certificate, lower_bound,
)
from spcf.programs import corpus_program, template
from spcf.syntax import TypeError_, parse

F = Fraction
DOCS = __import__("pathlib").Path(__file__).resolve().parent.parent / "docs"

# published lower bounds, compared on the first ten decimals (truncated)
TABLE = [
    ("geo_half", 100, "0.9999990463"),
    ("gr", 80, "0.6112594604"),
    ("print_half", 90, "0.8318119049"),
    ("print_quarter", 90, "0.3328795089"),
    ("print3_3_4", 80, "0.9606655982"),
    ("bin_half_2", 100, "0.9998493194"),
    ("rw_half_1", 200, "0.8036193847"),
]


def decimals(q):
    return fmt_rational(q).split("(")[1].rstrip(")")


@pytest.mark.slow
@pytest.mark.parametrize("name,depth,expected", TABLE)
def test_published_lower_bounds(name, depth, expected):
    assert decimals(lower_bound(corpus_program(name), depth).lb_probability) == expected


@pytest.mark.parametrize("k", [1, 3, 8, 20])
def test_geo_closed_form(k):
    r = lower_bound(corpus_program("geo_half"), 5 * k)
    assert r.lb_probability == geo_lb(k)
    assert r.lb_expected_steps == geo_expected_steps(k)
    assert r.oracles_terminated == k


def test_geo_half_depth_100_exact():
    r = lower_bound(corpus_program("geo_half"), 100)
    assert r.lb_probability == 1 - F(1, 2 ** 20)
    assert r.lb_expected_steps == F(9437075, 1048576)


def test_print_quarter_below_truth():
    r = lower_bound(corpus_program("print_quarter"), 40)
    assert F(1, 5) < r.lb_probability <= print_quarter_probability()


@pytest.mark.parametrize("name", ["geo_half", "gr", "print3_2_3", "bin_half_2", "rw_7_10_1"])
def test_anytime_monotone(name):
    t = corpus_program(name)
    prev_p, prev_e = F(0), F(0)
    for d in range(5, 41, 5):
        r = lower_bound(t, d)
        assert r.lb_probability >= prev_p
        assert r.lb_expected_steps >= prev_e
        assert r.lb_probability <= 1
        prev_p, prev_e = r.lb_probability, r.lb_expected_steps


@settings(max_examples=15)
@given(st.fractions(min_value=F(1, 10), max_value=F(9, 10), max_denominator=10), st.integers(1, 12))
def test_geo_family(p, k):
    # the run returning j has probability p (1-p)^j
    r = lower_bound(template("geo", p), 5 * k)
    assert r.lb_probability == 1 - (1 - p) ** k


def test_paths_sum_to_bound():
    r = lower_bound(corpus_program("print_half"), 30)
    assert sum(p.lower for p in r.paths) == r.lb_probability
    assert all(p.lower <= p.upper for p in r.paths)


def test_time_budget_marks_incomplete():
    r = lower_bound(corpus_program("print_half"), 60, time_budget_ms=0)
    assert not r.complete


def test_open_programs_rejected():
    with pytest.raises(TypeError_):
        lower_bound(parse("x + 1"), 10)


@pytest.mark.parametrize("name", ["geo_half", "gr", "print_half", "rw_half_1"])
def test_certificate_is_sound(name):
    t = corpus_program(name)
    r = lower_bound(t, 16, F(1, 16), certificate=True)
    boxes = r.certificate
    assert boxes
    assert pairwise(compatible, [tr for tr, _ in boxes])
    assert r.certified_probability <= r.lb_probability
    et = embed(t)
    for tr, n in boxes:
        res = run_interval(et, tr)
        assert res.terminated and res.steps == n
        assert refinement_check(t, tr, samples=20, seed=n, expected_steps=n).ok


def test_certificate_round_trip(tmp_path):
    boxes = lower_bound(corpus_program("gr"), 16, F(1, 16), certificate=True).certificate
    path = tmp_path / "cert.json"
    emit_certificate(boxes, path)
    assert load_certificate(path) == boxes
    data = json.loads(path.read_text())
    jsonschema.validate(data, json.loads((DOCS / "certificate.schema.json").read_text()))
    assert data == certificate_json(boxes)
