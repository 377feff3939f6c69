"""Small-step trace semantics (call-by-name and call-by-value) and the
counting reduction that replaces recursive calls by an unknown result.

All reductions share one abstract machine.  A machine state is a focus term
plus an evaluation context stored as a persistent linked list of frames, so
a step costs O(1) besides the contraction itself, and states can be forked
and hashed cheaply.  A step is counted once per redex contraction; descending
into or returning out of a context is free, so the counts coincide with the
number of steps of the textbook relation on whole terms.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .syntax import (
    App, BoxedPrim, Fix, HoleMu, If, IntervalNum, Lam, Num, Prim, STAR,
    Sample, SampleVar, Score, StarValue, Term, UnknownArg, Var, substitute,
)

DEFAULT_BUDGET = 10**6

FN, ARG, GUARD, SCORE, PRIM = range(5)

_VALUE_TYPES = (Num, IntervalNum, SampleVar, BoxedPrim, StarValue, UnknownArg,
                Lam, Fix, HoleMu)


class Ctx:
    """One frame of an evaluation context, linked to the enclosing one.

    FN: [] arg        ARG: fn []  (call-by-value only)
    GUARD: if [] then a else b        SCORE: score([])
    PRIM: op(done..., [], rest...)
    """

    __slots__ = ("kind", "a", "b", "c", "parent", "depth", "_h")

    def __init__(self, kind, a, b, c, parent):
        self.kind = kind
        self.a = a
        self.b = b
        self.c = c
        self.parent = parent
        self.depth = 1 + (parent.depth if parent is not None else 0)
        self._h = hash((kind, a, b, c, parent._h if parent is not None else 0))

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        x, y = self, other
        while x is not y:
            if (x is None or y is None or x._h != y._h or x.kind != y.kind
                    or x.a != y.a or x.b != y.b or x.c != y.c):
                return False
            x, y = x.parent, y.parent
        return True

    def plug(self, t: Term) -> Term:
        ctx = self
        while ctx is not None:
            k = ctx.kind
            if k == FN:
                t = App(t, ctx.a)
            elif k == ARG:
                t = App(ctx.a, t)
            elif k == GUARD:
                t = If(t, ctx.a, ctx.b)
            elif k == SCORE:
                t = Score(t)
            else:
                t = Prim(ctx.a, ctx.b + (t,) + ctx.c)
            ctx = ctx.parent
        return t


def plug(ctx, t):
    return t if ctx is None else ctx.plug(t)


def is_value(t: Term) -> bool:
    return isinstance(t, _VALUE_TYPES)


class Outcome(enum.Enum):
    VALUE = "value"
    STUCK = "stuck"
    TRACE_EXHAUSTED = "trace_exhausted"
    BUDGET_EXCEEDED = "budget_exceeded"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class RunResult:
    outcome: Outcome
    term: Term
    steps: int
    remaining: int = 0
    reason: str = ""
    calls: int = 0

    @property
    def terminated(self) -> bool:
        """Reached a value and used up the whole trace."""
        return self.outcome is Outcome.VALUE and self.remaining == 0


# alias kept for the counting reduction's result
CountResult = RunResult


class Stuck(Exception):
    pass


class Indeterminate(Exception):
    pass


class TraceExhausted(Exception):
    pass


class Pause(Exception):
    """Raised by a semantics to hand a redex back to the driver."""

    def __init__(self, kind, value, ctx, focus):
        super().__init__(kind)
        self.kind = kind
        self.value = value
        self.ctx = ctx
        self.focus = focus


class Semantics:
    """Contraction rules; subclasses override the base-type redexes."""

    cbv = False

    def sample(self):
        raise Stuck("sample is not supported")

    def prim(self, op, vals):
        raise Stuck(f"{op} on {vals}")

    def branch(self, v, ctx, focus):
        """Return True to take the then-branch, False for the else-branch."""
        raise Stuck(f"guard {v}")

    def score(self, v):
        raise Stuck(f"score {v}")

    def hole(self, v):
        raise Stuck("recursive call placeholder applied outside counting")

    def apply(self, fn, arg):
        if isinstance(fn, Lam):
            return substitute(fn.body, {fn.var: arg})
        if isinstance(fn, Fix):
            return substitute(fn.body, {fn.fvar: fn, fn.var: arg})
        if isinstance(fn, HoleMu):
            return self.hole(arg)
        raise Stuck(f"cannot apply the base value {fn}")


def advance(focus: Term, ctx, sem: Semantics, budget: int):
    """Run until a value in the empty context, a failure, or a Pause.

    Returns (outcome, focus, ctx, steps, reason).  A Pause propagates to the
    caller with the state left at the paused redex; its ``steps`` attribute
    holds the steps taken before it.
    """
    steps = 0
    cbv = sem.cbv
    try:
        while True:
            if isinstance(focus, _VALUE_TYPES):
                if ctx is None:
                    return Outcome.VALUE, focus, None, steps, ""
                k = ctx.kind
                if k == PRIM and ctx.c:
                    nxt = ctx.c[0]
                    ctx = Ctx(PRIM, ctx.a, ctx.b + (focus,), ctx.c[1:], ctx.parent)
                    focus = nxt
                    continue
                if steps >= budget:
                    return Outcome.BUDGET_EXCEEDED, focus, ctx, steps, ""
                if k == FN:
                    if cbv and not isinstance(ctx.a, _VALUE_TYPES):
                        focus, ctx = ctx.a, Ctx(ARG, focus, None, None, ctx.parent)
                        continue
                    new = sem.apply(focus, ctx.a)
                    ctx = ctx.parent
                elif k == ARG:
                    new = sem.apply(ctx.a, focus)
                    ctx = ctx.parent
                elif k == GUARD:
                    try:
                        take_then = sem.branch(focus, ctx, focus)
                    except Pause as p:
                        p.steps = steps
                        raise
                    new = ctx.a if take_then else ctx.b
                    ctx = ctx.parent
                elif k == SCORE:
                    new = sem.score(focus)
                    ctx = ctx.parent
                else:
                    new = sem.prim(ctx.a, ctx.b + (focus,))
                    ctx = ctx.parent
                steps += 1
                focus = new
                continue
            t = type(focus)
            if t is App:
                ctx = Ctx(FN, focus.arg, None, None, ctx)
                focus = focus.fn
            elif t is If:
                ctx = Ctx(GUARD, focus.then, focus.orelse, None, ctx)
                focus = focus.guard
            elif t is Prim:
                args = focus.args
                ctx = Ctx(PRIM, focus.op, (), args[1:], ctx)
                focus = args[0]
            elif t is Score:
                ctx = Ctx(SCORE, None, None, None, ctx)
                focus = focus.arg
            elif t is Sample:
                if steps >= budget:
                    return Outcome.BUDGET_EXCEEDED, focus, ctx, steps, ""
                focus = sem.sample()
                steps += 1
            elif t is Var:
                return Outcome.STUCK, focus, ctx, steps, f"free variable {focus.name}"
            else:
                return Outcome.STUCK, focus, ctx, steps, f"unexpected {t.__name__}"
    except Stuck as e:
        return Outcome.STUCK, focus, ctx, steps, str(e)
    except Indeterminate as e:
        return Outcome.INDETERMINATE, focus, ctx, steps, str(e)
    except TraceExhausted:
        return Outcome.TRACE_EXHAUSTED, focus, ctx, steps, "trace exhausted"


# --------------------------------------------------------------------------
# standard semantics


class TraceSemantics(Semantics):
    """Numbers are exact rationals; samples are read off a finite trace."""

    def __init__(self, trace, cbv=False):
        self.trace = [Fraction(r) for r in trace]
        for r in self.trace:
            if not 0 <= r <= 1:
                raise ValueError(f"trace element {r} outside [0, 1]")
        self.pos = 0
        self.cbv = cbv

    def sample(self):
        if self.pos >= len(self.trace):
            raise TraceExhausted()
        r = self.trace[self.pos]
        self.pos += 1
        return Num(r)

    def prim(self, op, vals):
        if not all(isinstance(v, Num) for v in vals):
            raise Stuck(f"{op} applied to a non-numeral")
        return Num(op.apply(*(v.value for v in vals)))

    def branch(self, v, ctx, focus):
        if not isinstance(v, Num):
            raise Stuck("guard is not a numeral")
        return v.value <= 0

    def score(self, v):
        if not isinstance(v, Num):
            raise Stuck("score of a non-numeral")
        if v.value < 0:
            raise Stuck(f"score of negative {v.value}")
        return v


def _run(t, sem, budget):
    outcome, focus, ctx, steps, reason = advance(t, None, sem, budget)
    remaining = len(sem.trace) - sem.pos if hasattr(sem, "trace") else 0
    return RunResult(outcome, plug(ctx, focus), steps, remaining, reason,
                     getattr(sem, "calls", 0))


def _step(t, trace, cbv):
    sem = TraceSemantics(trace, cbv)
    outcome, focus, ctx, steps, reason = advance(t, None, sem, 1)
    if steps == 0:
        if outcome is Outcome.VALUE:
            return None
        if outcome is not Outcome.BUDGET_EXCEEDED:
            raise Stuck(reason)
        # budget hit before the first redex cannot happen with budget 1
    return plug(ctx, focus), tuple(sem.trace[sem.pos:])


def step_cbn(t: Term, trace):
    """One call-by-name step: (term', trace') or None when t is a value.
    Raises Stuck when no rule applies."""
    return _step(t, trace, False)


def step_cbv(t: Term, trace):
    return _step(t, trace, True)


def run_cbn(t: Term, trace=(), budget: int = DEFAULT_BUDGET) -> RunResult:
    return _run(t, TraceSemantics(trace, False), budget)


def run_cbv(t: Term, trace=(), budget: int = DEFAULT_BUDGET) -> RunResult:
    return _run(t, TraceSemantics(trace, True), budget)


# --------------------------------------------------------------------------
# counting reduction


class CountingSemantics(TraceSemantics):
    """Call-by-value; applying the placeholder yields the unknown result."""

    def __init__(self, trace):
        super().__init__(trace, cbv=True)
        self.calls = 0

    def hole(self, v):
        self.calls += 1
        return STAR

    def prim(self, op, vals):
        if any(isinstance(v, StarValue) for v in vals):
            return STAR
        return super().prim(op, vals)

    def branch(self, v, ctx, focus):
        if isinstance(v, StarValue):
            raise Stuck("unknown recursive result reached a guard")
        return super().branch(v, ctx, focus)

    def score(self, v):
        if isinstance(v, StarValue):
            raise Stuck("unknown recursive result reached a score")
        return super().score(v)


def run_counting(body: Term, trace=(), budget: int = DEFAULT_BUDGET) -> RunResult:
    """Run a fixpoint body with the placeholder in place of the recursive calls;
    ``calls`` counts the placeholder firings."""
    return _run(body, CountingSemantics(trace), budget)
