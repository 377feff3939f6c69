"""Symbolic execution under call-by-name with conditional oracles.

Samples become sample variables a0, a1, ...; primitive applications are kept
as boxed symbolic values; every conditional consumes one oracle letter (L for
the then-branch, R for the else-branch) and records the matching constraint
on the guard.  The constraint set of an oracle describes exactly the traces
that follow its control path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .semantics import (
    DEFAULT_BUDGET, Outcome, Pause, Semantics, Stuck, advance,
)
from .syntax import BoxedPrim, IntervalNum, Num, SampleVar, Term

LE0, GT0, GE0 = "<=0", ">0", ">=0"


class NoPath(Exception):
    """The oracle does not describe a terminating control path."""


class BudgetExceeded(Exception):
    pass


@dataclass(frozen=True)
class SymResult:
    oracle: str
    value: Term
    constraints: tuple  # of (SymValue, relation)
    var_count: int
    steps: int


class SymbolicSemantics(Semantics):
    def __init__(self, var_count=0):
        self.var_count = var_count
        self.constraints = []

    def sample(self):
        v = SampleVar(self.var_count)
        self.var_count += 1
        return v

    def prim(self, op, vals):
        return BoxedPrim(op, vals)

    def branch(self, v, ctx, focus):
        raise Pause("if", v, ctx, focus)

    def score(self, v):
        self.constraints.append((v, GE0))
        return v


# --------------------------------------------------------------------------
# interval evaluation of symbolic values


def sym_interval(v: Term, box) -> tuple:
    """Enclosure of a symbolic value over a box of sample-variable ranges."""
    if isinstance(v, Num):
        return v.value, v.value
    if isinstance(v, SampleVar):
        if v.index < len(box):
            return box[v.index]
        return Fraction(0), Fraction(1)
    if isinstance(v, BoxedPrim):
        return v.op.interval(*(sym_interval(a, box) for a in v.args))
    if isinstance(v, IntervalNum):
        return v.lo, v.hi
    raise Stuck(f"not a symbolic numeral: {v}")


_vars_cache: dict = {}


def sample_vars(v: Term) -> frozenset:
    hit = _vars_cache.get(v)
    if hit is None:
        hit = _sample_vars(v)
        if len(_vars_cache) > 100000:
            _vars_cache.clear()
        _vars_cache[v] = hit
    return hit


def _sample_vars(v):
    out = set()
    stack = [v]
    while stack:
        x = stack.pop()
        if isinstance(x, SampleVar):
            out.add(x.index)
        elif isinstance(x, BoxedPrim):
            stack.extend(x.args)
    return frozenset(out)


def constant_value(v: Term):
    """The exact value of a variable-free symbolic numeral, else None."""
    if isinstance(v, Num):
        return v.value
    if isinstance(v, BoxedPrim):
        args = [constant_value(a) for a in v.args]
        if any(a is None for a in args):
            return None
        return v.op.apply(*args)
    return None


def _holds(rel, lo, hi):
    """(certainly holds, certainly fails) for a relation on an interval."""
    if rel == LE0:
        return hi <= 0, lo > 0
    if rel == GT0:
        return lo > 0, hi <= 0
    return lo >= 0, hi < 0


INSIDE, OUTSIDE, STRADDLE = "inside", "outside", "straddle"


def check_box(constraints, box) -> str:
    """Classify a box against a constraint set by interval arithmetic."""
    inside = True
    for v, rel in constraints:
        lo, hi = sym_interval(v, box)
        yes, no = _holds(rel, lo, hi)
        if no:
            return OUTSIDE
        inside = inside and yes
    return INSIDE if inside else STRADDLE


def _infeasible(v, rel, var_count):
    """Whether v rel 0 fails everywhere on the unit cube."""
    lo, hi = sym_interval(v, ((Fraction(0), Fraction(1)),) * var_count)
    return _holds(rel, lo, hi)[1]


# --------------------------------------------------------------------------
# single oracle


def symbolic_run(t: Term, oracle: str, budget: int = DEFAULT_BUDGET) -> SymResult:
    """Execute t along the oracle.  Raises NoPath or BudgetExceeded."""
    sem = SymbolicSemantics()
    focus, ctx = t, None
    steps = 0
    pos = 0
    while True:
        try:
            outcome, focus, ctx, used, reason = advance(focus, ctx, sem, budget - steps)
        except Pause as p:
            steps += p.steps
            if steps >= budget:
                raise BudgetExceeded()
            if pos >= len(oracle):
                raise NoPath("oracle exhausted at a conditional")
            letter = oracle[pos]
            pos += 1
            c = constant_value(p.value)
            if letter == "L":
                if c is not None and c > 0:
                    raise NoPath("then-branch of a positive constant guard")
                sem.constraints.append((p.value, LE0))
                focus = p.ctx.a
            elif letter == "R":
                if c is not None and c <= 0:
                    raise NoPath("else-branch of a non-positive constant guard")
                sem.constraints.append((p.value, GT0))
                focus = p.ctx.b
            else:
                raise ValueError(f"bad oracle letter {letter!r}")
            ctx = p.ctx.parent
            steps += 1
            continue
        steps += used
        if outcome is Outcome.VALUE:
            if pos != len(oracle):
                raise NoPath("oracle letters left over")
            return SymResult(oracle, focus, tuple(sem.constraints), sem.var_count, steps)
        if outcome is Outcome.BUDGET_EXCEEDED:
            raise BudgetExceeded()
        raise NoPath(reason or outcome.value)


# --------------------------------------------------------------------------
# frontier enumeration


@dataclass
class _Node:
    """A paused conditional (or a final value) after a deterministic run."""

    kind: str  # "if", "value"
    value: Term  # guard value or final value
    ctx: object
    var_count: int
    steps: int
    edges: list  # (letter, constraints added, child key)
    pre: tuple = ()  # constraints recorded on the way in (scores)


@dataclass
class Frontier:
    results: list
    configurations: int
    oracles_explored: int


def _run_segment(focus, ctx, var_count, steps, max_depth):
    """Deterministic run to the next conditional.  Returns (kind, value, ctx,
    var_count, steps, constraints) or None if the run dies."""
    sem = SymbolicSemantics(var_count)
    try:
        outcome, focus, ctx, used, _ = advance(focus, ctx, sem, max_depth - steps)
    except Pause as p:
        total = steps + p.steps
        if total >= max_depth:
            return None
        return "if", p.value, p.ctx, sem.var_count, total, tuple(sem.constraints)
    if outcome is not Outcome.VALUE:
        return None
    return "value", focus, None, sem.var_count, steps + used, tuple(sem.constraints)


def explore(t: Term, max_depth: int):
    """Build the graph of paused configurations reachable within max_depth
    steps.  Configurations reached along different oracles with equal term,
    variable count and step count are merged."""
    nodes = {}
    root_seg = _run_segment(t, None, 0, 0, max_depth)
    if root_seg is None:
        return nodes, None, ()
    root_key = _key(root_seg)
    root_pre = root_seg[5]
    if any(_infeasible(v, r, root_seg[3]) for v, r in root_pre):
        return nodes, None, ()
    stack = [(root_key, root_seg)]
    nodes[root_key] = _Node(root_seg[0], root_seg[1], root_seg[2], root_seg[3],
                            root_seg[4], [])
    while stack:
        key, seg = stack.pop()
        node = nodes[key]
        if node.kind != "if":
            continue
        v, ctx, m, steps = node.value, node.ctx, node.var_count, node.steps
        for letter, rel, branch in (("L", LE0, ctx.a), ("R", GT0, ctx.b)):
            if _infeasible(v, rel, m):
                continue
            child = _run_segment(branch, ctx.parent, m, steps + 1, max_depth)
            if child is None:
                continue
            if any(_infeasible(cv, cr, child[3]) for cv, cr in child[5]):
                continue
            ckey = _key(child)
            node.edges.append((letter, ((v, rel),) + child[5], ckey))
            if ckey not in nodes:
                nodes[ckey] = _Node(child[0], child[1], child[2], child[3], child[4], [])
                stack.append((ckey, child))
    return nodes, root_key, root_pre


def _key(seg):
    kind, value, ctx, m, steps, _ = seg
    return (kind, value, ctx, m, steps)


def oracle_frontier(t: Term, max_depth: int) -> Frontier:
    """All terminating oracles whose run takes at most max_depth steps,
    ordered by (length, oracle) with L before R."""
    nodes, root, root_pre = explore(t, max_depth)
    if root is None:
        return Frontier([], 0, 1)

    # keep only configurations from which a value is reachable
    live = {k for k, n in nodes.items() if n.kind == "value"}
    parents = {}
    for k, n in nodes.items():
        for _, _, c in n.edges:
            parents.setdefault(c, []).append(k)
    stack = list(live)
    while stack:
        k = stack.pop()
        for p in parents.get(k, ()):
            if p not in live:
                live.add(p)
                stack.append(p)

    # number of oracle prefixes leading to each configuration
    order = sorted(nodes, key=lambda k: nodes[k].steps)
    count = {root: 1}
    for k in order:
        c = count.get(k, 0)
        for _, _, ch in nodes[k].edges:
            count[ch] = count.get(ch, 0) + c
    explored = sum(count.values())

    results = []
    if root in live:
        stack = [(root, "", root_pre)]
        while stack:
            k, oracle, cons = stack.pop()
            n = nodes[k]
            if n.kind == "value":
                results.append(SymResult(oracle, n.value, cons, n.var_count, n.steps))
                continue
            for letter, added, ch in reversed(n.edges):
                if ch in live:
                    stack.append((ch, oracle + letter, cons + added))
    results.sort(key=lambda r: (len(r.oracle), r.oracle))
    return Frontier(results, len(nodes), explored)
