"""Counting front end: execution trees of a fixpoint body run on an unknown
argument, strategies resolving the argument-dependent branchings, and the
worst-case counting distribution P_approx over all strategies.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

from .measure import exact_measure
from .semantics import CountingSemantics, Outcome, _run
from .symexec import GE0, GT0, LE0, constant_value, sample_vars
from .syntax import (
    HOLE, UNKNOWN, App, BoxedPrim, Fix, HoleMu, If, IntervalNum, Lam, Num, Prim,
    Sample, SampleVar, Score, StarValue, STAR, Term, UnknownArg, Var,
    pretty, progress_check, substitute, subterms,
)


class CountingError(ValueError):
    """The fixpoint is outside the fragment the counting analysis handles."""


# --------------------------------------------------------------------------
# execution trees


@dataclass(frozen=True)
class Leaf:
    value: Term


@dataclass(frozen=True)
class FixNode:
    child: object


@dataclass(frozen=True)
class ScoreNode:
    child: object
    guard: Term


@dataclass(frozen=True)
class Branch:
    left: object
    right: object
    guard: Term
    red: bool


# strategy nodes replacing red branchings
@dataclass(frozen=True)
class ChooseLeft:
    child: object
    guard: Term


@dataclass(frozen=True)
class ChooseRight:
    child: object
    guard: Term


def mentions_unknown(v: Term) -> bool:
    if isinstance(v, UnknownArg):
        return True
    if isinstance(v, BoxedPrim):
        return any(mentions_unknown(a) for a in v.args)
    return False


def fixpoint_of(t: Term) -> Fix:
    """The top-level fixpoint of a program (itself, or applied to an argument)."""
    if isinstance(t, Fix):
        return t
    if isinstance(t, App) and isinstance(t.fn, Fix):
        return t.fn
    raise CountingError("program is not a fixpoint or a fixpoint application")


def instantiate(fix: Fix, arg: Term) -> Term:
    """The body with the argument in place of x and the placeholder in place
    of every recursive call site."""
    return substitute(fix.body, {fix.fvar: HOLE, fix.var: arg})


def check_fragment(fix: Fix) -> None:
    if any(isinstance(s, Fix) for s in subterms(fix.body)):
        raise CountingError("nested recursion is not supported")
    if not progress_check(instantiate(fix, UNKNOWN)):
        raise CountingError("a recursive result may reach a guard or a score")


class _Builder:
    def __init__(self):
        self.fresh = 0

    def fold(self, tree, h):
        if isinstance(tree, Leaf):
            return h(tree.value)
        if isinstance(tree, FixNode):
            return FixNode(self.fold(tree.child, h))
        if isinstance(tree, ScoreNode):
            return ScoreNode(self.fold(tree.child, h), tree.guard)
        return Branch(self.fold(tree.left, h), self.fold(tree.right, h), tree.guard, tree.red)

    def eval(self, t: Term):
        if isinstance(t, (Num, SampleVar, BoxedPrim, UnknownArg, StarValue, Lam, HoleMu)):
            return Leaf(t)
        if isinstance(t, IntervalNum):
            raise CountingError("interval numerals are not symbolic values")
        if isinstance(t, Sample):
            v = SampleVar(self.fresh)
            self.fresh += 1
            return Leaf(v)
        if isinstance(t, App):
            t1 = self.eval(t.fn)
            t2 = self.eval(t.arg)

            def with_fn(x):
                return self.fold(t2, lambda y: self.beta(x, y))

            return self.fold(t1, with_fn)
        if isinstance(t, Prim):
            trees = [self.eval(a) for a in t.args]

            def build(i, vals):
                if i == len(trees):
                    if any(isinstance(v, StarValue) for v in vals):
                        return Leaf(STAR)
                    c = constant_value(BoxedPrim(t.op, tuple(vals)))
                    if c is not None:
                        return Leaf(Num(c))
                    return Leaf(BoxedPrim(t.op, tuple(vals)))
                return self.fold(trees[i], lambda v: build(i + 1, vals + [v]))

            return build(0, [])
        if isinstance(t, If):
            tg = self.eval(t.guard)
            tn = self.eval(t.then)
            tp = self.eval(t.orelse)

            def branch(x):
                if isinstance(x, StarValue):
                    raise CountingError("a recursive result reaches a guard")
                c = constant_value(x)
                if c is not None:
                    return tn if c <= 0 else tp
                return Branch(tn, tp, x, mentions_unknown(x))

            return self.fold(tg, branch)
        if isinstance(t, Score):
            def score(x):
                if isinstance(x, StarValue):
                    raise CountingError("a recursive result reaches a score")
                c = constant_value(x)
                if c is not None and c < 0:
                    raise CountingError("score of a negative constant")
                return ScoreNode(Leaf(x), x)
            return self.fold(self.eval(t.arg), score)
        if isinstance(t, Var):
            raise CountingError(f"free variable {t.name}")
        raise CountingError(f"unsupported term {pretty(t)}")

    def beta(self, x, y):
        if isinstance(x, HoleMu):
            return FixNode(Leaf(STAR))
        if isinstance(x, Lam):
            return self.eval(substitute(x.body, {x.var: y}))
        raise CountingError(f"applying a non-function {pretty(x)}")


def build_tree(fix: Term):
    """The execution tree of the body on the unknown argument."""
    fix = fixpoint_of(fix)
    check_fragment(fix)
    return _Builder().eval(instantiate(fix, UNKNOWN))


def _children(node):
    if isinstance(node, Leaf):
        return ()
    if isinstance(node, (FixNode, ScoreNode, ChooseLeft, ChooseRight)):
        return (node.child,)
    return (node.left, node.right)


def _values(node):
    """Symbolic values recorded at a node."""
    if isinstance(node, Leaf):
        return (node.value,)
    if isinstance(node, (ScoreNode, Branch, ChooseLeft, ChooseRight)):
        return (node.guard,)
    return ()


def _used_vars(node) -> frozenset:
    out = set()
    stack = [node]
    while stack:
        n = stack.pop()
        for v in _values(n):
            out |= sample_vars(v)
        stack.extend(_children(n))
    return frozenset(out)


def sufficient_independence(tree) -> bool:
    """No sample variable of a red guard is used below that red node."""
    stack = [tree]
    while stack:
        n = stack.pop()
        if isinstance(n, Branch) and n.red:
            mine = sample_vars(n.guard)
            if mine & (_used_vars(n.left) | _used_vars(n.right)):
                return False
        stack.extend(_children(n))
    return True


def rank(tree) -> int:
    """Most fixpoint nodes on any root-to-leaf path."""
    if isinstance(tree, Leaf):
        return 0
    if isinstance(tree, FixNode):
        return 1 + rank(tree.child)
    return max(rank(c) for c in _children(tree))


def red_count(tree) -> int:
    n = 1 if isinstance(tree, Branch) and tree.red else 0
    return n + sum(red_count(c) for c in _children(tree))


# --------------------------------------------------------------------------
# strategies


def strategies(tree) -> list:
    """Every way of resolving the red branchings that can be reached; a red
    node below the discarded side of another one is not resolved."""
    if isinstance(tree, Leaf):
        return [tree]
    if isinstance(tree, FixNode):
        return [FixNode(s) for s in strategies(tree.child)]
    if isinstance(tree, ScoreNode):
        return [ScoreNode(s, tree.guard) for s in strategies(tree.child)]
    if tree.red:
        return ([ChooseLeft(s, tree.guard) for s in strategies(tree.left)]
                + [ChooseRight(s, tree.guard) for s in strategies(tree.right)])
    return [Branch(a, b, tree.guard, False)
            for a, b in itertools.product(strategies(tree.left), strategies(tree.right))]


def paths(s):
    """Terminating paths of a strategy as (oracle, constraints, fixpoint count)."""
    out = []
    stack = [(s, "", (), 0)]
    while stack:
        n, word, cons, calls = stack.pop()
        if isinstance(n, Leaf):
            out.append((word, cons, calls))
        elif isinstance(n, FixNode):
            stack.append((n.child, word, cons, calls + 1))
        elif isinstance(n, ScoreNode):
            stack.append((n.child, word, cons + ((n.guard, GE0),), calls))
        elif isinstance(n, ChooseLeft):
            stack.append((n.child, word + "L", cons, calls))
        elif isinstance(n, ChooseRight):
            stack.append((n.child, word + "R", cons, calls))
        else:
            stack.append((n.right, word + "R", cons + ((n.guard, GT0),), calls))
            stack.append((n.left, word + "L", cons + ((n.guard, LE0),), calls))
    out.sort()
    return out


def call_distribution(s) -> dict:
    """Probability of each number of fixpoint nodes along the paths of a
    strategy.  Raises NotLinear on a nonlinear white guard."""
    dist = {}
    for _, cons, calls in paths(s):
        m = exact_measure(cons)
        if m:
            dist[calls] = dist.get(calls, Fraction(0)) + m
    return dist


def path_prob(s, n: int) -> Fraction:
    """Probability of following a terminating path with at most n fixpoint nodes."""
    return sum((w for k, w in call_distribution(s).items() if k <= n), Fraction(0))


@dataclass
class PApprox:
    dist: dict  # n -> Fraction
    rank: int

    def __getitem__(self, n):
        return self.dist.get(n, Fraction(0))

    @property
    def total(self):
        return sum(self.dist.values(), Fraction(0))


def p_approx(tree) -> PApprox:
    """The least probability over strategies of making at most n calls, as
    a counting distribution."""
    r = rank(tree)
    dists = [call_distribution(s) for s in strategies(tree)]
    cum = []
    for n in range(r + 1):
        cum.append(min(sum((w for k, w in d.items() if k <= n), Fraction(0)) for d in dists))
    out = {}
    prev = Fraction(0)
    for n, c in enumerate(cum):
        if c - prev:
            out[n] = c - prev
        prev = c
    return PApprox(out, r)


# --------------------------------------------------------------------------
# sampling the true counting pattern


class _LazyCounting(CountingSemantics):
    def __init__(self, rng):
        super().__init__(())
        self.rng = rng

    def sample(self):
        r = Fraction(self.rng.random())
        self.trace.append(r)
        self.pos += 1
        return Num(r)


def empirical_counting_pattern(fix: Term, r, samples: int, seed=0,
                               budget: int = 100000) -> dict:
    """Frequency of each number of recursive calls made by one unfolding of
    the fixpoint on argument r, over uniformly drawn traces."""
    fix = fixpoint_of(fix)
    body = instantiate(fix, Num(Fraction(r)))
    rng = random.Random(seed)
    counts = {}
    for _ in range(samples):
        res = _run(body, _LazyCounting(rng), budget)
        if res.outcome is Outcome.VALUE:
            counts[res.calls] = counts.get(res.calls, 0) + 1
    return {n: Fraction(c, samples) for n, c in sorted(counts.items())}


# --------------------------------------------------------------------------
# inspection


def to_dot(tree) -> str:
    lines = ["digraph tree {", "  node [fontname=monospace];"]
    ids = itertools.count()

    def walk(n):
        i = next(ids)
        if isinstance(n, Leaf):
            lines.append(f'  n{i} [shape=circle,label="{pretty(n.value)}"];')
        elif isinstance(n, FixNode):
            lines.append(f'  n{i} [shape=box,label="mu"];')
        elif isinstance(n, ScoreNode):
            lines.append(f'  n{i} [shape=box,label="score {pretty(n.guard)}"];')
        else:
            red = isinstance(n, (ChooseLeft, ChooseRight)) or getattr(n, "red", False)
            colour = ",style=filled,fillcolor=red" if red else ""
            lines.append(f'  n{i} [shape=diamond,label="{pretty(n.guard)}"{colour}];')
        for c in _children(n):
            j = walk(c)
            lines.append(f"  n{i} -> n{j};")
        return i

    walk(tree)
    lines.append("}")
    return "\n".join(lines) + "\n"
