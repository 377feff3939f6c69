"""Interval traces and the interval-based reduction.

An interval trace is a tuple of (lo, hi) rational pairs inside [0, 1].  It
stands for every standard trace of the same length whose i-th element lies in
the i-th interval.  Running a term on an interval trace either terminates
(then every refining standard trace terminates after the same number of
steps), gets stuck, or becomes indeterminate when a guard or score interval
straddles zero.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .semantics import (
    DEFAULT_BUDGET, Indeterminate, Outcome, RunResult, Semantics, Stuck,
    TraceExhausted, advance, plug, run_cbn,
)
from .syntax import (
    App, Fix, If, IntervalNum, Lam, Num, Prim, Score, Term,
)


def as_trace(pairs) -> tuple:
    tr = tuple((Fraction(lo), Fraction(hi)) for lo, hi in pairs)
    for lo, hi in tr:
        if not 0 <= lo <= hi <= 1:
            raise ValueError(f"bad trace interval [{lo}, {hi}]")
    return tr


def weight(trace) -> Fraction:
    w = Fraction(1)
    for lo, hi in trace:
        w *= hi - lo
    return w


def embed(t: Term) -> Term:
    """Replace every numeral r by the interval numeral [r, r]."""
    if isinstance(t, Num):
        return IntervalNum(t.value, t.value)
    if isinstance(t, Lam):
        return Lam(t.var, embed(t.body))
    if isinstance(t, Fix):
        return Fix(t.fvar, t.var, embed(t.body))
    if isinstance(t, App):
        return App(embed(t.fn), embed(t.arg))
    if isinstance(t, If):
        return If(embed(t.guard), embed(t.then), embed(t.orelse))
    if isinstance(t, Prim):
        return Prim(t.op, tuple(embed(a) for a in t.args))
    if isinstance(t, Score):
        return Score(embed(t.arg))
    return t


def _box(v):
    if isinstance(v, IntervalNum):
        return v.lo, v.hi
    if isinstance(v, Num):
        return v.value, v.value
    raise Stuck(f"expected an interval numeral, got {v}")


class IntervalSemantics(Semantics):
    def __init__(self, trace):
        self.trace = as_trace(trace)
        self.pos = 0

    def sample(self):
        if self.pos >= len(self.trace):
            raise TraceExhausted()
        lo, hi = self.trace[self.pos]
        self.pos += 1
        return IntervalNum(lo, hi)

    def prim(self, op, vals):
        lo, hi = op.interval(*(_box(v) for v in vals))
        return IntervalNum(lo, hi)

    def branch(self, v, ctx, focus):
        lo, hi = _box(v)
        if hi <= 0:
            return True
        if lo > 0:
            return False
        raise Indeterminate(f"guard interval [{lo}, {hi}] straddles 0")

    def score(self, v):
        lo, hi = _box(v)
        if lo >= 0:
            return v
        if hi < 0:
            raise Stuck(f"score of negative interval [{lo}, {hi}]")
        raise Indeterminate(f"score interval [{lo}, {hi}] straddles 0")


def step_interval(t: Term, trace):
    """One interval step: (term', trace') or None if t is a value.
    Raises Stuck or Indeterminate."""
    sem = IntervalSemantics(trace)
    outcome, focus, ctx, steps, reason = advance(t, None, sem, 1)
    if steps == 0:
        if outcome is Outcome.VALUE:
            return None
        if outcome is Outcome.INDETERMINATE:
            raise Indeterminate(reason)
        raise Stuck(reason)
    return plug(ctx, focus), sem.trace[sem.pos:]


def run_interval(t: Term, trace, budget: int = DEFAULT_BUDGET) -> RunResult:
    """``result.terminated`` holds iff the trace is in the terminating set."""
    sem = IntervalSemantics(trace)
    outcome, focus, ctx, steps, reason = advance(t, None, sem, budget)
    return RunResult(outcome, plug(ctx, focus), steps, len(sem.trace) - sem.pos, reason)


def almost_disjoint(i, j) -> bool:
    return i[1] <= j[0] or j[1] <= i[0]


def compatible(p, q) -> bool:
    if len(p) != len(q):
        return True
    return any(almost_disjoint(i, j) for i, j in zip(p, q))


def strongly_compatible(p, q) -> bool:
    while p and q:
        if p[0] != q[0]:
            return almost_disjoint(p[0], q[0])
        p, q = p[1:], q[1:]
    return bool(p) or bool(q)


def pairwise(pred, traces) -> bool:
    traces = list(traces)
    return all(pred(traces[i], traces[j])
               for i in range(len(traces)) for j in range(i + 1, len(traces)))


def strong_split(traces) -> list:
    """Refine pairwise compatible traces into pairwise strongly compatible
    ones covering the same standard traces with the same total weight.

    At each position the first intervals are cut at every endpoint occurring
    among them, so that any two pieces are identical or almost disjoint; traces
    sharing a piece are then split recursively on their tails.
    """
    return [tr for tr, _ in _split([(tuple(tr), None) for tr in traces])]


def strong_split_tagged(items) -> list:
    """strong_split on (trace, payload) pairs; pieces keep their payload."""
    return _split([(tuple(tr), payload) for tr, payload in items])


def _split(items):
    done = [it for it in items if not it[0]]
    rest = [it for it in items if it[0]]
    if not rest:
        return done
    cuts = sorted({e for tr, _ in rest for e in tr[0]})
    groups = {}
    for tr, payload in rest:
        lo, hi = tr[0]
        inner = [c for c in cuts if lo < c < hi]
        points = [lo] + inner + [hi]
        for a, b in zip(points, points[1:]) if inner else [(lo, hi)]:
            groups.setdefault((a, b), []).append((tr[1:], payload))
    for head in sorted(groups):
        for tail, payload in _split(groups[head]):
            done.append(((head,) + tail, payload))
    return done


# --------------------------------------------------------------------------
# checking boxes against the standard semantics


@dataclass
class RefinementReport:
    trace: tuple
    expected_steps: int | None
    samples: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.expected_steps is not None and not self.violations


def refining_trace(trace, rng: random.Random) -> list:
    """A uniformly drawn standard trace inside the interval trace."""
    out = []
    for lo, hi in trace:
        u = Fraction(rng.random())
        out.append(lo + (hi - lo) * u)
    return out


def refinement_check(t: Term, trace, samples: int, seed=0,
                     expected_steps: int | None = None,
                     budget: int = DEFAULT_BUDGET) -> RefinementReport:
    """Run ``samples`` standard traces refining ``trace`` and compare each
    with the interval run of embed(t)."""
    trace = as_trace(trace)
    if expected_steps is None:
        r = run_interval(embed(t), trace, budget)
        expected_steps = r.steps if r.terminated else None
    report = RefinementReport(trace, expected_steps, samples)
    rng = random.Random(seed)
    for _ in range(samples):
        s = refining_trace(trace, rng)
        r = run_cbn(t, s, budget)
        if not r.terminated or r.steps != expected_steps:
            report.violations.append((tuple(s), r.outcome.value, r.steps))
    return report
