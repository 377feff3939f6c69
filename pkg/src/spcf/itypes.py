"""Set types with interval traces and step counts, derivations, a rule-by-rule
checker, and synthesis of derivations from terminating interval traces.

A set type is a finite set of elements (type, interval trace, steps).  A
derivation of an interval term with set type A certifies that every trace of
A terminates after the stated number of steps.

Synthesis follows the reduction tree of the term over a pairwise strongly
compatible set of terminating traces: the value leaves get axioms, and each
reduction step is undone by subject expansion.  Deterministic steps shift the
derivation by one step; sample steps merge the children, prefixing each
child's traces with its interval.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from fractions import Fraction

from .interval import almost_disjoint, strong_split_tagged, strongly_compatible, weight
from .syntax import (
    App, Fix, If, IntervalNum, Lam, Num, Prim, Sample, Score, Term, Var,
    pretty, substitute,
)


# --------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class IntervalType:
    lo: Fraction
    hi: Fraction

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


@dataclass(frozen=True)
class ArrowType:
    sigma: frozenset  # of set types
    result: frozenset  # set type

    def __str__(self):
        s = ", ".join(sorted(show_set(a) for a in self.sigma))
        return f"{{{s}}} -> {show_set(self.result)}"


@dataclass(frozen=True)
class Elem:
    alpha: object
    trace: tuple
    steps: int

    def __str__(self):
        tr = "".join(f"[{lo},{hi}]" for lo, hi in self.trace) or "e"
        return f"({self.alpha}, {tr}, {self.steps})"


EMPTY = frozenset()


def show_set(a) -> str:
    return "<<" + ", ".join(sorted(str(e) for e in a)) + ">>"


def shift(a, prefix, steps) -> frozenset:
    """Prepend an interval trace to every element and add to every count."""
    prefix = tuple(prefix)
    return frozenset(Elem(e.alpha, prefix + e.trace, e.steps + steps) for e in a)


def omega(a) -> Fraction:
    return sum((weight(e.trace) for e in a), Fraction(0))


def expectation(a) -> Fraction:
    return sum((weight(e.trace) * e.steps for e in a), Fraction(0))


# --------------------------------------------------------------------------
# derivations


@dataclass
class PrimPremise:
    """Derivation of one primitive argument, and for every element of its
    type the premise for the remaining arguments (None after the last)."""

    deriv: "Derivation"
    rest: dict | None = None


@dataclass(eq=False)
class Derivation:
    rule: str
    term: Term
    type: frozenset
    env: dict | None = None
    body: "Derivation | None" = None        # abs, fix
    sigma: frozenset = EMPTY                # abs, fix
    gamma: dict = field(default_factory=dict)   # fix: set type -> derivation
    fn: "Derivation | None" = None          # app
    args: dict = field(default_factory=dict)    # app: set type -> derivation
    guard: "Derivation | None" = None       # if
    then: dict = field(default_factory=dict)    # if: element -> derivation
    orelse: dict = field(default_factory=dict)  # if: element -> derivation
    arg: "Derivation | None" = None         # score
    prim: PrimPremise | None = None         # prim

    @property
    def omega(self):
        return omega(self.type)

    @property
    def expectation(self):
        return expectation(self.type)


def num_node(t: IntervalNum) -> Derivation:
    return Derivation("num", t, frozenset({Elem(IntervalType(t.lo, t.hi), (), 0)}))


def empty_node(t: Term) -> Derivation:
    return Derivation("empty", t, EMPTY)


def sample_node(intervals) -> Derivation:
    ty = frozenset(Elem(IntervalType(lo, hi), ((lo, hi),), 1) for lo, hi in intervals)
    return Derivation("sample", Sample(), ty)


# conclusions of the rules, shared by synthesis and checking


def app_type(fn_type) -> frozenset:
    out = set()
    for e in fn_type:
        out |= shift(e.alpha.result, e.trace, e.steps + 1)
    return frozenset(out)


def if_type(then, orelse) -> frozenset:
    out = set()
    for branches in (then, orelse):
        for e, d in branches.items():
            out |= shift(d.type, e.trace, e.steps + 1)
    return frozenset(out)


def score_type(arg_type) -> frozenset:
    return frozenset(Elem(e.alpha, e.trace, e.steps + 1)
                     for e in arg_type if e.alpha.lo >= 0)


def prim_type(op, premise: PrimPremise) -> frozenset:
    out = set()

    def walk(p, boxes, trace, steps):
        for e in p.deriv.type:
            b = boxes + ((e.alpha.lo, e.alpha.hi),)
            tr = trace + e.trace
            n = steps + e.steps
            if p.rest is None:
                lo, hi = op.interval(*b)
                out.add(Elem(IntervalType(lo, hi), tr, n + 1))
            else:
                walk(p.rest[e], b, tr, n)

    walk(premise, (), (), 0)
    return frozenset(out)


def arrow_node(rule, t, body, sigma, gamma=None) -> Derivation:
    ty = frozenset({Elem(ArrowType(frozenset(sigma), body.type), (), 0)})
    return Derivation(rule, t, ty, body=body, sigma=frozenset(sigma),
                      gamma=dict(gamma or {}))


# --------------------------------------------------------------------------
# checking


class Violation(Exception):
    def __init__(self, node, message):
        super().__init__(f"{node.rule} at {pretty(node.term)}: {message}")
        self.node = node
        self.message = message


def check_derivation(d: Derivation, env: dict | None = None) -> bool:
    return find_violation(d, env) is None


def find_violation(d: Derivation, env: dict | None = None):
    """The first node (pre-order) that does not instantiate its rule, as a
    Violation, or None."""
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20000))
    try:
        _check(d, dict(env or {}), set())
    except Violation as v:
        return v
    finally:
        sys.setrecursionlimit(old)
    return None


def _require(cond, node, message):
    if not cond:
        raise Violation(node, message)


def _is_interval_elem(e):
    return isinstance(e.alpha, IntervalType)


def _check_trace(node, tr):
    for iv in tr:
        _require(isinstance(iv, tuple) and len(iv) == 2 and 0 <= iv[0] <= iv[1] <= 1,
                 node, f"bad trace interval {iv}")


def _check(d: Derivation, env: dict, seen: set):
    key = (id(d), tuple(sorted((k, hash(v)) for k, v in env.items())))
    if key in seen:
        return
    seen.add(key)
    if d.env is not None:
        _require(d.env == env, d, "stored context differs from the inherited one")
    t = d.term
    for e in d.type:
        _check_trace(d, e.trace)
        _require(e.steps >= 0, d, "negative step count")
    r = d.rule
    if r == "empty":
        _require(d.type == EMPTY, d, "empty rule with a nonempty type")
    elif r == "var":
        _require(isinstance(t, Var), d, "var rule on a non-variable")
        _require(t.name in env, d, f"{t.name} not in the context")
        _require(d.type in env[t.name], d, "type not in the variable's intersection")
    elif r == "num":
        _require(isinstance(t, IntervalNum), d, "num rule on a non-numeral")
        _require(d.type == num_node(t).type, d, "numeral type mismatch")
    elif r == "sample":
        _require(isinstance(t, Sample), d, "sample rule on a non-sample")
        elems = list(d.type)
        for e in elems:
            _require(_is_interval_elem(e) and e.steps == 1
                     and e.trace == ((e.alpha.lo, e.alpha.hi),),
                     d, f"malformed sample element {e}")
        for i in range(len(elems)):
            for j in range(i + 1, len(elems)):
                a, b = elems[i].trace[0], elems[j].trace[0]
                _require(almost_disjoint(a, b), d, f"intervals {a} and {b} overlap")
    elif r == "abs":
        _require(isinstance(t, Lam) and d.body is not None, d, "abs rule shape")
        _require(d.body.term == t.body, d, "premise is not about the body")
        _require(d.type == arrow_node("abs", t, d.body, d.sigma).type, d, "abs type")
        _check(d.body, {**env, t.var: d.sigma}, seen)
    elif r == "fix":
        _require(isinstance(t, Fix) and d.body is not None, d, "fix rule shape")
        _require(d.body.term == t.body, d, "premise is not about the body")
        _require(d.type == arrow_node("fix", t, d.body, d.sigma).type, d, "fix type")
        gamma = frozenset(d.gamma)
        for b, sub in d.gamma.items():
            _require(sub.term == t, d, "unfolding premise is about another term")
            _require(sub.type == b, d, "unfolding premise has the wrong type")
            _check(sub, env, seen)
        _check(d.body, {**env, t.fvar: gamma, t.var: d.sigma}, seen)
    elif r == "app":
        _require(isinstance(t, App) and d.fn is not None, d, "app rule shape")
        _require(d.fn.term == t.fn, d, "premise is not about the function")
        needed = set()
        for e in d.fn.type:
            _require(isinstance(e.alpha, ArrowType), d, f"applying a non-arrow {e}")
            needed |= e.alpha.sigma
        _require(set(d.args) == needed, d, "argument premises do not match the intersections")
        for c, sub in d.args.items():
            _require(sub.term == t.arg, d, "argument premise is about another term")
            _require(sub.type == c, d, "argument premise has the wrong type")
        _require(d.type == app_type(d.fn.type), d, "app conclusion")
        _check(d.fn, env, seen)
        for sub in d.args.values():
            _check(sub, env, seen)
    elif r == "if":
        _require(isinstance(t, If) and d.guard is not None, d, "if rule shape")
        _require(d.guard.term == t.guard, d, "premise is not about the guard")
        want_then = set()
        want_else = set()
        for e in d.guard.type:
            _require(_is_interval_elem(e), d, "guard of function type")
            if e.alpha.hi <= 0:
                want_then.add(e)
            elif e.alpha.lo > 0:
                want_else.add(e)
        _require(set(d.then) == want_then and set(d.orelse) == want_else,
                 d, "branch premises do not match the guard elements")
        for sub in d.then.values():
            _require(sub.term == t.then, d, "then-premise is about another term")
        for sub in d.orelse.values():
            _require(sub.term == t.orelse, d, "else-premise is about another term")
        _require(d.type == if_type(d.then, d.orelse), d, "if conclusion")
        _check(d.guard, env, seen)
        for sub in list(d.then.values()) + list(d.orelse.values()):
            _check(sub, env, seen)
    elif r == "score":
        _require(isinstance(t, Score) and d.arg is not None, d, "score rule shape")
        _require(d.arg.term == t.arg, d, "premise is not about the argument")
        _require(all(_is_interval_elem(e) for e in d.arg.type), d, "score of a function")
        _require(d.type == score_type(d.arg.type), d, "score conclusion")
        _check(d.arg, env, seen)
    elif r == "prim":
        _require(isinstance(t, Prim) and d.prim is not None, d, "prim rule shape")
        _check_prim(d, d.prim, 0, env, seen)
        _require(d.type == prim_type(t.op, d.prim), d, "prim conclusion")
    else:
        raise Violation(d, f"unknown rule {r!r}")


def _check_prim(d, p, i, env, seen):
    t = d.term
    _require(p.deriv.term == t.args[i], d, f"premise {i} is about another term")
    _require(all(_is_interval_elem(e) for e in p.deriv.type), d, "primitive on a function")
    last = i == len(t.args) - 1
    if last:
        _require(p.rest is None, d, "premises beyond the arity")
    else:
        _require(p.rest is not None and set(p.rest) == set(p.deriv.type),
                 d, f"premises after argument {i} do not match its elements")
    _check(p.deriv, env, seen)
    if not last:
        for q in p.rest.values():
            _check_prim(d, q, i + 1, env, seen)


# --------------------------------------------------------------------------
# synthesis


class SynthesisError(ValueError):
    pass


def _is_value(t):
    return isinstance(t, (IntervalNum, Num, Lam, Fix))


def _decompose(t):
    """Call-by-name evaluation frames (outermost first) and the redex."""
    frames = []
    while True:
        if isinstance(t, App):
            if _is_value(t.fn):
                return frames, t
            frames.append(("fn", t, 0))
            t = t.fn
        elif isinstance(t, If):
            if _is_value(t.guard):
                return frames, t
            frames.append(("guard", t, 0))
            t = t.guard
        elif isinstance(t, Prim):
            for i, a in enumerate(t.args):
                if not _is_value(a):
                    frames.append(("prim", t, i))
                    t = a
                    break
            else:
                return frames, t
        elif isinstance(t, Score):
            if _is_value(t.arg):
                return frames, t
            frames.append(("score", t, 0))
            t = t.arg
        elif isinstance(t, Sample):
            return frames, t
        elif _is_value(t):
            return frames, None
        else:
            raise SynthesisError(f"stuck on {pretty(t)}")


def _plug(frames, t):
    for kind, outer, i in reversed(frames):
        if kind == "fn":
            t = App(t, outer.arg)
        elif kind == "guard":
            t = If(t, outer.then, outer.orelse)
        elif kind == "score":
            t = Score(t)
        else:
            t = Prim(outer.op, outer.args[:i] + (t,) + outer.args[i + 1:])
    return t


def _box(v):
    if isinstance(v, IntervalNum):
        return v.lo, v.hi
    raise SynthesisError(f"expected an interval numeral, got {pretty(v)}")


def _contract(r):
    """One deterministic interval step on a redex."""
    if isinstance(r, App):
        f = r.fn
        if isinstance(f, Lam):
            return substitute(f.body, {f.var: r.arg})
        if isinstance(f, Fix):
            return substitute(f.body, {f.fvar: f, f.var: r.arg})
        raise SynthesisError("application of a numeral")
    if isinstance(r, If):
        lo, hi = _box(r.guard)
        if hi <= 0:
            return r.then
        if lo > 0:
            return r.orelse
        raise SynthesisError("guard interval straddles 0")
    if isinstance(r, Prim):
        lo, hi = r.op.interval(*(_box(a) for a in r.args))
        return IntervalNum(lo, hi)
    if isinstance(r, Score):
        lo, hi = _box(r.arg)
        if lo < 0:
            raise SynthesisError("score interval is not nonnegative")
        return r.arg
    raise SynthesisError(f"no rule for {pretty(r)}")


def _value_leaf(v):
    if isinstance(v, IntervalNum):
        return num_node(v)
    if isinstance(v, Lam):
        return arrow_node("abs", v, empty_node(v.body), EMPTY)
    if isinstance(v, Fix):
        return arrow_node("fix", v, empty_node(v.body), EMPTY)
    raise SynthesisError(f"unexpected value {pretty(v)}")


def synthesize(t: Term, boxes, split: bool = False) -> Derivation:
    """A derivation of the closed interval term t whose root set type lists
    exactly the given (trace, steps) pairs.  The traces must be pairwise
    strongly compatible and terminate with the given step counts.  With
    ``split`` pairwise compatible traces are first cut into strongly
    compatible pieces (same weight, same step counts)."""
    items = [(tuple((Fraction(lo), Fraction(hi)) for lo, hi in tr), int(n)) for tr, n in boxes]
    if split:
        items = strong_split_tagged(items)
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if not strongly_compatible(items[i][0], items[j][0]):
                raise SynthesisError("traces are not pairwise strongly compatible")
    if not items:
        return empty_node(t)
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20000))
    try:
        d = _derive(t, items)
        assign_envs(d)
    finally:
        sys.setrecursionlimit(old)
    return d


def _derive(t, items):
    """Derivation of t for items = [(remaining trace, remaining steps)]."""
    chain = []  # (frames, redex) of the deterministic steps taken from t
    while True:
        frames, redex = _decompose(t)
        if redex is None:
            for tr, n in items:
                if tr or n:
                    raise SynthesisError(
                        f"value {pretty(t)} reached with {len(tr)} samples and {n} steps left")
            d = _value_leaf(t)
            break
        if isinstance(redex, Sample):
            groups = {}
            for tr, n in items:
                if not tr:
                    raise SynthesisError("trace exhausted at a sample")
                if n < 1:
                    raise SynthesisError("step count exhausted")
                groups.setdefault(tr[0], []).append((tr[1:], n - 1))
            parts = []
            for iv, sub in sorted(groups.items()):
                child = _derive(_plug(frames, IntervalNum(*iv)), sub)
                parts.append((child, (iv,)))
            d = _merge(frames, 0, parts, _sample_hole)
            break
        for tr, n in items:
            if n < 1:
                raise SynthesisError("step count exhausted")
        items = [(tr, n - 1) for tr, n in items]
        chain.append((frames, redex))
        t = _plug(frames, _contract(redex))
    for frames, redex in reversed(chain):
        d = _merge(frames, 0, [(d, ())], lambda holes, r=redex: _expand(r, holes[0][0]))
    return d


def _sample_hole(holes):
    return sample_node([prefix[0] for _, prefix in holes])


def _hole(d, kind, i):
    if kind == "fn":
        return d.fn
    if kind == "guard":
        return d.guard
    if kind == "score":
        return d.arg
    p = d.prim
    for _ in range(i):
        (p,) = p.rest.values()
    return p.deriv


def _merge(frames, k, parts, build_hole):
    """Combine derivations of E[X_j] (one per part, with the trace prefix of
    the part) into a derivation of E[R] whose type is the union of the parts'
    types, each shifted by its prefix and one step.  At the hole, build_hole
    receives the (hole derivation, prefix) pairs."""
    if k == len(frames):
        return build_hole(parts)
    kind, outer, i = frames[k]
    inner = _merge(frames, k + 1, [(_hole(d, kind, i), pre) for d, pre in parts], build_hole)
    t = _replace(kind, outer, i, inner.term)

    def rekey(dct, pre):
        return {Elem(e.alpha, pre + e.trace, e.steps + 1): v for e, v in dct.items()}

    if kind == "fn":
        args = {}
        for d, _ in parts:
            for c, sub in d.args.items():
                args.setdefault(c, sub)
        return Derivation("app", t, app_type(inner.type), fn=inner, args=args)
    if kind == "guard":
        then, orelse = {}, {}
        for d, pre in parts:
            then.update(rekey(d.then, pre))
            orelse.update(rekey(d.orelse, pre))
        return Derivation("if", t, if_type(then, orelse), guard=inner, then=then, orelse=orelse)
    if kind == "score":
        return Derivation("score", t, score_type(inner.type), arg=inner)
    # primitive: rebuild the premise chain down to argument i
    rest = {}
    for d, pre in parts:
        p = d.prim
        for _ in range(i):
            (p,) = p.rest.values()
        if p.rest is not None:
            rest.update(rekey(p.rest, pre))
    node = PrimPremise(inner, rest if i < len(outer.args) - 1 else None)
    p0 = parts[0][0].prim
    chain = []
    for _ in range(i):
        chain.append(p0)
        (p0,) = p0.rest.values()
    for p in reversed(chain):
        (e,) = p.rest.keys()
        node = PrimPremise(p.deriv, {e: node})
    return Derivation("prim", t, prim_type(outer.op, node), prim=node)


def _replace(kind, outer, i, new):
    if kind == "fn":
        return App(new, outer.arg)
    if kind == "guard":
        return If(new, outer.then, outer.orelse)
    if kind == "score":
        return Score(new)
    return Prim(outer.op, outer.args[:i] + (new,) + outer.args[i + 1:])


def _expand(r, dh):
    """Derivation of the redex r from a derivation dh of its contractum."""
    if isinstance(r, App) and isinstance(r.fn, Lam):
        f = r.fn
        body, found = _unsubstitute(f.body, dh, {f.var: r.arg})
        sigma = found.get(f.var, {})
        fn = arrow_node("abs", f, body, frozenset(sigma))
        return Derivation("app", r, app_type(fn.type), fn=fn, args=dict(sigma))
    if isinstance(r, App) and isinstance(r.fn, Fix):
        f = r.fn
        body, found = _unsubstitute(f.body, dh, {f.fvar: f, f.var: r.arg})
        sigma = found.get(f.var, {})
        gamma = found.get(f.fvar, {})
        fn = arrow_node("fix", f, body, frozenset(sigma), gamma)
        return Derivation("app", r, app_type(fn.type), fn=fn, args=dict(sigma))
    if isinstance(r, If):
        g = num_node(r.guard)
        (e,) = g.type
        if r.guard.hi <= 0:
            then, orelse = {e: dh}, {}
        else:
            then, orelse = {}, {e: dh}
        return Derivation("if", r, if_type(then, orelse), guard=g, then=then, orelse=orelse)
    if isinstance(r, Prim):
        node = None
        for a in reversed(r.args):
            d = num_node(a)
            (e,) = d.type
            node = PrimPremise(d, None if node is None else {e: node})
        return Derivation("prim", r, prim_type(r.op, node), prim=node)
    if isinstance(r, Score):
        a = num_node(r.arg)
        return Derivation("score", r, score_type(a.type), arg=a)
    raise SynthesisError(f"cannot expand {pretty(r)}")


def _unsubstitute(m, d, subst):
    """Given a derivation d of m[subst], return a derivation of m in which
    every occurrence of a substituted variable is typed by the var rule, and
    for each variable the map from the types used to derivations of its
    substituted term.  The substituted terms are closed."""
    found = {x: {} for x in subst}
    memo = {}

    def walk(m, d):
        key = (id(d), m)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if d.rule == "empty":
            out = empty_node(m)
        elif isinstance(m, Var) and m.name in subst:
            found[m.name].setdefault(d.type, d)
            out = Derivation("var", m, d.type)
        elif not (m._fv & subst.keys()):
            out = d  # no substituted variable below: the term is unchanged
        elif d.rule == "abs":
            out = arrow_node("abs", m, walk(m.body, d.body), d.sigma)
        elif d.rule == "fix":
            gamma = {b: walk(m, sub) for b, sub in d.gamma.items()}
            out = arrow_node("fix", m, walk(m.body, d.body), d.sigma, gamma)
        elif d.rule == "app":
            args = {c: walk(m.arg, sub) for c, sub in d.args.items()}
            out = Derivation("app", m, d.type, fn=walk(m.fn, d.fn), args=args)
        elif d.rule == "if":
            out = Derivation("if", m, d.type, guard=walk(m.guard, d.guard),
                             then={e: walk(m.then, s) for e, s in d.then.items()},
                             orelse={e: walk(m.orelse, s) for e, s in d.orelse.items()})
        elif d.rule == "score":
            out = Derivation("score", m, d.type, arg=walk(m.arg, d.arg))
        elif d.rule == "prim":
            out = Derivation("prim", m, d.type, prim=walk_prim(m, d.prim, 0))
        else:
            raise SynthesisError(f"cannot reverse substitution through {d.rule}")
        memo[key] = out
        return out

    def walk_prim(m, p, i):
        rest = None if p.rest is None else {e: walk_prim(m, q, i + 1) for e, q in p.rest.items()}
        return PrimPremise(walk(m.args[i], p.deriv), rest)

    body = walk(m, d)
    return body, {x: v for x, v in found.items() if v}


def assign_envs(d: Derivation, env: dict | None = None) -> None:
    """Store on every node the context it is checked in."""
    env = dict(env or {})
    stack = [(d, env)]
    seen = set()
    while stack:
        node, env = stack.pop()
        key = (id(node), tuple(sorted((k, hash(v)) for k, v in env.items())))
        if key in seen:
            continue
        seen.add(key)
        if node.env is not None and node.env != env:
            raise SynthesisError("a shared subderivation is used in two contexts")
        node.env = env
        t = node.term
        if node.rule == "abs":
            stack.append((node.body, {**env, t.var: node.sigma}))
        elif node.rule == "fix":
            stack.append((node.body, {**env, t.fvar: frozenset(node.gamma), t.var: node.sigma}))
            stack.extend((sub, env) for sub in node.gamma.values())
        elif node.rule == "app":
            stack.append((node.fn, env))
            stack.extend((sub, env) for sub in node.args.values())
        elif node.rule == "if":
            stack.append((node.guard, env))
            stack.extend((sub, env) for sub in node.then.values())
            stack.extend((sub, env) for sub in node.orelse.values())
        elif node.rule == "score":
            stack.append((node.arg, env))
        elif node.rule == "prim":
            ps = [node.prim]
            while ps:
                p = ps.pop()
                stack.append((p.deriv, env))
                if p.rest:
                    ps.extend(p.rest.values())


def size(d: Derivation) -> int:
    """Number of distinct derivation nodes."""
    seen = set()
    stack = [d]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        for sub in _premises(n):
            stack.append(sub)
    return len(seen)


def _premises(n):
    out = []
    for x in (n.body, n.fn, n.guard, n.arg):
        if x is not None:
            out.append(x)
    out.extend(n.gamma.values())
    out.extend(n.args.values())
    out.extend(n.then.values())
    out.extend(n.orelse.values())
    ps = [n.prim] if n.prim is not None else []
    while ps:
        p = ps.pop()
        out.append(p.deriv)
        if p.rest:
            ps.extend(p.rest.values())
    return out


# --------------------------------------------------------------------------
# serialization


def _q(x):
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def type_json(a) -> list:
    return [elem_json(e) for e in sorted(a, key=str)]


def elem_json(e) -> dict:
    if isinstance(e.alpha, IntervalType):
        alpha = {"interval": [_q(e.alpha.lo), _q(e.alpha.hi)]}
    else:
        alpha = {"arrow": {"sigma": [type_json(s) for s in sorted(e.alpha.sigma, key=show_set)],
                           "result": type_json(e.alpha.result)}}
    return {"type": alpha, "trace": [[_q(lo), _q(hi)] for lo, hi in e.trace], "steps": e.steps}


def derivation_json(d: Derivation) -> dict:
    out = {"rule": d.rule, "term": pretty(d.term), "type": type_json(d.type)}
    if d.rule in ("abs", "fix"):
        out["sigma"] = [type_json(s) for s in sorted(d.sigma, key=show_set)]
        out["body"] = derivation_json(d.body)
    if d.rule == "fix":
        out["unfoldings"] = [derivation_json(s) for _, s in sorted(d.gamma.items(), key=lambda kv: show_set(kv[0]))]
    if d.rule == "app":
        out["fn"] = derivation_json(d.fn)
        out["args"] = [derivation_json(s) for _, s in sorted(d.args.items(), key=lambda kv: show_set(kv[0]))]
    if d.rule == "if":
        out["guard"] = derivation_json(d.guard)
        out["then"] = [{"element": elem_json(e), "derivation": derivation_json(s)}
                       for e, s in sorted(d.then.items(), key=lambda kv: str(kv[0]))]
        out["else"] = [{"element": elem_json(e), "derivation": derivation_json(s)}
                       for e, s in sorted(d.orelse.items(), key=lambda kv: str(kv[0]))]
    if d.rule == "score":
        out["arg"] = derivation_json(d.arg)
    if d.rule == "prim":
        out["premise"] = _prim_json(d.prim)
    return out


def _prim_json(p):
    out = {"derivation": derivation_json(p.deriv)}
    if p.rest is not None:
        out["rest"] = [{"element": elem_json(e), "premise": _prim_json(q)}
                       for e, q in sorted(p.rest.items(), key=lambda kv: str(kv[0]))]
    return out
