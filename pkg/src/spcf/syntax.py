"""Terms of SPCF, the concrete syntax, and the two simple type systems.

Terms are immutable and hashable.  Every node caches its hash and its set of
free variables at construction time, which keeps substitution and the
configuration tables used by the analyses cheap.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath

Interval = tuple  # (lo, hi) pair of Fractions


class SyntaxError_(ValueError):
    """Raised by the parser; carries a 1-based line and column."""

    def __init__(self, message, line, column):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class TypeError_(ValueError):
    pass


# --------------------------------------------------------------------------
# primitive operations

_SIG_PREC = 64
mpmath.mp.prec = 160


@lru_cache(maxsize=65536)
def _sig_scaled(r: Fraction):
    v = 1 / (1 + mpmath.exp(-mpmath.mpf(r.numerator) / r.denominator))
    return v * (1 << _SIG_PREC)


def sig_value(r: Fraction) -> Fraction:
    """The logistic function at r, rounded to the nearest multiple of 2^-64."""
    return Fraction(int(mpmath.nint(_sig_scaled(r))), 1 << _SIG_PREC)


def _sig_lo(r):
    return Fraction(int(mpmath.floor(_sig_scaled(r))) - 1, 1 << _SIG_PREC)


def _sig_hi(r):
    return Fraction(int(mpmath.ceil(_sig_scaled(r))) + 1, 1 << _SIG_PREC)


@dataclass(frozen=True)
class PrimOp:
    """A primitive function together with its interval extension.

    ``linear`` marks the operations whose symbolic values stay affine in the
    sample variables; ``coeff`` is the constant factor of ``mulc``.
    """

    name: str
    arity: int
    linear: bool
    coeff: Fraction | None = None

    def apply(self, *xs):
        n = self.name
        if n == "add":
            return xs[0] + xs[1]
        if n == "sub":
            return xs[0] - xs[1]
        if n == "neg":
            return -xs[0]
        if n == "mulc":
            return self.coeff * xs[0]
        if n == "min":
            return min(xs)
        if n == "max":
            return max(xs)
        if n == "sig":
            return sig_value(xs[0])
        raise ValueError(f"unknown primitive {n}")

    def interval(self, *boxes):
        """Image of a box, as a rational interval containing f(box)."""
        n = self.name
        if n == "add":
            (a, b), (c, d) = boxes
            return (a + c, b + d)
        if n == "sub":
            (a, b), (c, d) = boxes
            return (a - d, b - c)
        if n == "neg":
            (a, b), = boxes
            return (-b, -a)
        if n == "mulc":
            (a, b), = boxes
            q = self.coeff
            return (q * a, q * b) if q >= 0 else (q * b, q * a)
        if n == "min":
            (a, b), (c, d) = boxes
            return (min(a, c), min(b, d))
        if n == "max":
            (a, b), (c, d) = boxes
            return (max(a, c), max(b, d))
        if n == "sig":
            (a, b), = boxes
            return (_sig_lo(a), _sig_hi(b))
        raise ValueError(f"unknown primitive {n}")

    def __str__(self):
        if self.name == "mulc":
            return f"mulc({_fmt_rational(self.coeff)})"
        return self.name


ADD = PrimOp("add", 2, True)
SUB = PrimOp("sub", 2, True)
NEG = PrimOp("neg", 1, True)
MIN = PrimOp("min", 2, False)
MAX = PrimOp("max", 2, False)
SIG = PrimOp("sig", 1, False)


def mulc(q) -> PrimOp:
    return PrimOp("mulc", 1, True, Fraction(q))


PRIMITIVES = {op.name: op for op in (ADD, SUB, NEG, MIN, MAX, SIG)}


# --------------------------------------------------------------------------
# terms


class Term:
    __slots__ = ()

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or self._h != other._h:
            return False
        return self._key() == other._key()

    def __ne__(self, other):
        return not self == other

    def __str__(self):
        return pretty(self)


def _term(cls):
    """Decorate a term class: slotted frozen dataclass with cached hash/fv."""
    cls = dataclass(frozen=True, eq=False, slots=True)(cls)
    names = [f.name for f in cls.__dataclass_fields__.values() if f.init]

    def _key(self):
        return tuple(getattr(self, n) for n in names)

    cls._key = _key
    return cls


def _fv_of(*parts):
    out = frozenset()
    for p in parts:
        if isinstance(p, Term):
            if p._fv:
                out = out | p._fv
        elif isinstance(p, tuple):
            for q in p:
                if q._fv:
                    out = out | q._fv
    return out


def _init(self, fv, *key):
    object.__setattr__(self, "_fv", fv)
    object.__setattr__(self, "_h", hash((type(self).__name__,) + key))


@_term
class Var(Term):
    name: str
    _h: int = field(init=False, repr=False)
    _fv: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        _init(self, frozenset((self.name,)), self.name)


@_term
class Num(Term):
    value: Fraction
    _h: int = field(init=False, repr=False)
    _fv: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))
        _init(self, frozenset(), self.value)


@_term
class IntervalNum(Term):
    lo: Fraction
    hi: Fraction
    _h: int = field(init=False, repr=False)
    _fv: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        lo, hi = Fraction(self.lo), Fraction(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval numeral [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        _init(self, frozenset(), lo, hi)

    @property
    def interval(self):
        return (self.lo, self.hi)


@_term
class Lam(Term):
    var: str
    body: Term
    _h: int = field(init=False, repr=False)
    _fv: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        _init(self, self.body._fv - {self.var}, self.var, self.body._h)


@_term
class Fix(Term):
    """mu^fvar_var. body"""

    fvar: str
    var: str
    body: Term
    _h: int = field(init=False, repr=False)
    _fv: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        _init(self, self.body._fv - {self.fvar, self.var}, self.fvar, self.var, self.body._h)


@_term
class App(Term):
    fn: Term
    arg: Term
    _h: int = field(init=False, repr=False)
    _fv: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        _init(self, _fv_of(self.fn, self.arg), self.fn._h, self.arg._h)


@_term
class If(Term):
    guard: Term
    then: Term
    orelse: Term
    _h: int = field(init=False, repr=False)
    _fv: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        _init(self, _fv_of(self.guard, self.then, self.orelse),
              self.guard._h, self.then._h, self.orelse._h)


@_term
class Prim(Term):
    op: PrimOp
    args: tuple
    _h: int = field(init=False, repr=False)
    _fv: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != self.op.arity:
            raise ValueError(f"{self.op} expects {self.op.arity} arguments")
        _init(self, _fv_of(self.args), self.op, tuple(a._h for a in self.args))


@_term
class Sample(Term):
    _h: int = field(init=False, repr=False)
    _fv: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        _init(self, frozenset())


@_term
class Score(Term):
    arg: Term
    _h: int = field(init=False, repr=False)
    _fv: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        _init(self, self.arg._fv, self.arg._h)


# analysis-only constructors


@_term
class SampleVar(Term):
    index: int
    _h: int = field(init=False, repr=False)
    _fv: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        _init(self, frozenset(), self.index)


@_term
class BoxedPrim(Term):
    """A primitive applied to symbolic values, kept unevaluated."""

    op: PrimOp
    args: tuple
    _h: int = field(init=False, repr=False)
    _fv: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        _init(self, frozenset(), self.op, tuple(a._h for a in self.args))


@_term
class StarValue(Term):
    """The unknown outcome of a recursive call."""

    _h: int = field(init=False, repr=False)
    _fv: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        _init(self, frozenset())


@_term
class UnknownArg(Term):
    """The unknown actual argument of a fixpoint."""

    _h: int = field(init=False, repr=False)
    _fv: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        _init(self, frozenset())


@_term
class HoleMu(Term):
    """Placeholder for every recursive call site."""

    _h: int = field(init=False, repr=False)
    _fv: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        _init(self, frozenset())


SAMPLE = Sample()
STAR = StarValue()
UNKNOWN = UnknownArg()
HOLE = HoleMu()

BASE_VALUES = (Num, IntervalNum, SampleVar, BoxedPrim, StarValue, UnknownArg)
FUNCTION_VALUES = (Lam, Fix, HoleMu)
VALUES = BASE_VALUES + FUNCTION_VALUES
ANALYSIS_ONLY = (SampleVar, BoxedPrim, StarValue, UnknownArg, HoleMu)


def is_value(t: Term) -> bool:
    return isinstance(t, VALUES)


def free_vars(t: Term) -> frozenset:
    return t._fv


def children(t: Term):
    if isinstance(t, (Lam, Fix)):
        return (t.body,)
    if isinstance(t, App):
        return (t.fn, t.arg)
    if isinstance(t, If):
        return (t.guard, t.then, t.orelse)
    if isinstance(t, (Prim, BoxedPrim)):
        return t.args
    if isinstance(t, Score):
        return (t.arg,)
    return ()


def subterms(t: Term):
    """All subterms, pre-order (iterative)."""
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        stack.extend(reversed(children(s)))


# --------------------------------------------------------------------------
# substitution

_fresh_counter = itertools.count()


def _fresh(name, avoid):
    base = name.rstrip("'0123456789") or name
    while True:
        cand = f"{base}{next(_fresh_counter)}'"
        if cand not in avoid:
            return cand


def substitute(t: Term, bindings: dict) -> Term:
    """Capture-avoiding simultaneous substitution t[bindings]."""
    bindings = {k: v for k, v in bindings.items() if k in t._fv}
    if not bindings:
        return t
    incoming = frozenset()
    for v in bindings.values():
        incoming |= v._fv
    return _subst(t, bindings, incoming)


def _subst(t, b, incoming):
    if not (t._fv & b.keys()):
        return t
    if isinstance(t, Var):
        return b[t.name]
    if isinstance(t, App):
        return App(_subst(t.fn, b, incoming), _subst(t.arg, b, incoming))
    if isinstance(t, If):
        return If(_subst(t.guard, b, incoming), _subst(t.then, b, incoming),
                  _subst(t.orelse, b, incoming))
    if isinstance(t, Prim):
        return Prim(t.op, tuple(_subst(a, b, incoming) for a in t.args))
    if isinstance(t, Score):
        return Score(_subst(t.arg, b, incoming))
    if isinstance(t, Lam):
        var, body = _binder(t.var, t.body, b, incoming)
        inner = {k: v for k, v in b.items() if k != t.var}
        return Lam(var, _subst(body, inner, incoming) if inner else body)
    if isinstance(t, Fix):
        inner = {k: v for k, v in b.items() if k not in (t.fvar, t.var)}
        fvar, body = _binder(t.fvar, t.body, inner, incoming | {t.var})
        var, body = _binder(t.var, body, inner, incoming | {fvar})
        return Fix(fvar, var, _subst(body, inner, incoming) if inner else body)
    raise TypeError(f"cannot substitute into {type(t).__name__}")


def _binder(var, body, b, incoming):
    """Rename a binder if it would capture a free variable of the incoming terms."""
    if var in incoming and any(k in body._fv for k in b if k != var):
        new = _fresh(var, incoming | body._fv | b.keys())
        return new, substitute(body, {var: Var(new)})
    return var, body


# --------------------------------------------------------------------------
# concrete syntax

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9']*)
  | (?P<sym><=|\(\+\)|\(\+|[\\.()^,=+\-*])
""", re.VERBOSE)

KEYWORDS = {"fix", "let", "in", "if", "then", "else", "sample", "score"}


def _tokens(src):
    pos, line, col = 0, 1, 1
    out = []
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise SyntaxError_(f"unexpected character {src[pos]!r}", line, col)
        text = m.group()
        kind = m.lastgroup
        if kind != "ws":
            if kind == "ident" and text in KEYWORDS:
                kind = text
            elif kind == "sym":
                kind = text
            out.append((kind, text, line, col))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    out.append(("eof", "", line, col))
    return out


def _rational(text):
    if "/" in text:
        p, q = text.split("/")
        if Fraction(q) == 0:
            raise ZeroDivisionError(text)
        return Fraction(p) / Fraction(q)
    return Fraction(text)


class _Parser:
    def __init__(self, src):
        self.toks = _tokens(src)
        self.i = 0
        self.scope = []

    def peek(self, k=0):
        return self.toks[self.i + k]

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise SyntaxError_(msg, tok[2], tok[3])

    def take(self, kind):
        tok = self.peek()
        if tok[0] != kind:
            shown = tok[1] or "end of input"
            self.error(f"expected {kind!r}, found {shown!r}")
        self.i += 1
        return tok

    def ident(self):
        return self.take("ident")[1]

    def bound(self, name):
        return name in self.scope

    def with_scope(self, names, parse):
        self.scope.extend(names)
        try:
            return parse()
        finally:
            del self.scope[len(self.scope) - len(names):]

    # expr := fix | lambda | if | let | choice
    def expr(self):
        kind = self.peek()[0]
        if kind == "fix":
            self.i += 1
            f = self.ident()
            x = self.ident()
            self.take(".")
            return Fix(f, x, self.with_scope([f, x], self.expr))
        if kind == "\\":
            self.i += 1
            x = self.ident()
            self.take(".")
            return Lam(x, self.with_scope([x], self.expr))
        if kind == "if":
            self.i += 1
            g = self.expr()
            self.take("then")
            a = self.expr()
            self.take("else")
            return If(g, a, self.expr())
        if kind == "let":
            self.i += 1
            x = self.ident()
            self.take("=")
            bound = self.expr()
            self.take("in")
            return App(Lam(x, self.with_scope([x], self.expr)), bound)
        return self.choice()

    def choice(self):
        left = self.compare()
        kind = self.peek()[0]
        if kind == "(+)":
            self.i += 1
            weight = Num(Fraction(1, 2))
        elif kind == "(+":
            self.i += 1
            weight = self.expr()
            self.take(")")
        else:
            return left
        right = self.expr()
        return If(Prim(SUB, (SAMPLE, weight)), left, right)

    def compare(self):
        left = self.additive()
        if self.peek()[0] == "<=":
            self.i += 1
            return Prim(SUB, (left, self.additive()))
        return left

    def additive(self):
        left = self.mult()
        while self.peek()[0] in ("+", "-"):
            op = ADD if self.take(self.peek()[0])[0] == "+" else SUB
            left = Prim(op, (left, self.mult()))
        return left

    def mult(self):
        left = self.unary()
        while self.peek()[0] == "*":
            tok = self.take("*")
            right = self.unary()
            if isinstance(left, Num):
                left = Prim(mulc(left.value), (right,))
            elif isinstance(right, Num):
                left = Prim(mulc(right.value), (left,))
            else:
                self.error("multiplication needs a rational constant on one side", tok)
        return left

    def unary(self):
        if self.peek()[0] == "-":
            self.i += 1
            if self.peek()[0] == "num":
                return self.application(Num(-_rational(self.take("num")[1])))
            return Prim(NEG, (self.unary(),))
        return self.application()

    def starts_atom(self):
        return self.peek()[0] in ("num", "ident", "(", "sample", "score")

    def application(self, head=None):
        t = head if head is not None else self.atom()
        while self.starts_atom():
            t = App(t, self.atom())
        return t

    def atom(self):
        tok = self.peek()
        kind = tok[0]
        if kind == "num":
            self.i += 1
            return Num(_rational(tok[1]))
        if kind == "sample":
            self.i += 1
            return SAMPLE
        if kind == "score":
            self.i += 1
            self.take("(")
            arg = self.expr()
            self.take(")")
            return Score(arg)
        if kind == "(":
            self.i += 1
            t = self.expr()
            self.take(")")
            return t
        if kind == "ident":
            self.i += 1
            name = tok[1]
            nxt = self.peek()[0]
            if nxt == "^":
                self.i += 1
                k = self.take("num")
                if not k[1].isdigit() or int(k[1]) < 1:
                    self.error("iteration count must be a positive integer", k)
                self.take("(")
                t = self.expr()
                self.take(")")
                for _ in range(int(k[1])):
                    t = App(Var(name), t)
                return t
            if nxt == "(" and not self.bound(name):
                return self.prim_call(name, tok)
            return Var(name)
        self.error(f"unexpected {tok[1] or 'end of input'!r}")

    def prim_call(self, name, tok):
        self.take("(")
        args = [self.expr()]
        while self.peek()[0] == ",":
            self.i += 1
            args.append(self.expr())
        self.take(")")
        op = PRIMITIVES.get(name)
        if op is None:
            if len(args) == 1:
                # an unbound function applied to a parenthesised argument
                return App(Var(name), args[0])
            self.error(f"unknown primitive {name!r}", tok)
        if op.arity != len(args):
            self.error(f"{name} expects {op.arity} argument(s), got {len(args)}", tok)
        return Prim(op, tuple(args))


def parse(source: str) -> Term:
    """Parse concrete syntax into a desugared term."""
    p = _Parser(source)
    t = p.expr()
    if p.peek()[0] != "eof":
        p.error(f"unexpected {p.peek()[1]!r}")
    return t


# --------------------------------------------------------------------------
# printing


def _fmt_rational(q: Fraction) -> str:
    s = str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
    return f"(-{s[1:]})" if q < 0 else s


def pretty(t: Term) -> str:
    """Canonical concrete syntax; parse(pretty(t)) == t for user terms."""
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Num):
        return _fmt_rational(t.value)
    if isinstance(t, IntervalNum):
        return f"[{_fmt_rational(t.lo)}, {_fmt_rational(t.hi)}]"
    if isinstance(t, Lam):
        return f"(\\{t.var}. {pretty(t.body)})"
    if isinstance(t, Fix):
        return f"(fix {t.fvar} {t.var}. {pretty(t.body)})"
    if isinstance(t, App):
        return f"({pretty(t.fn)} {pretty(t.arg)})"
    if isinstance(t, If):
        return f"(if {pretty(t.guard)} then {pretty(t.then)} else {pretty(t.orelse)})"
    if isinstance(t, (Prim, BoxedPrim)):
        a = [pretty(x) for x in t.args]
        n = t.op.name
        if n == "add":
            return f"({a[0]} + {a[1]})"
        if n == "sub":
            return f"({a[0]} - {a[1]})"
        if n == "neg":
            return f"(-({a[0]}))"
        if n == "mulc":
            return f"({_fmt_rational(t.op.coeff)} * {a[0]})"
        return f"{n}({', '.join(a)})"
    if isinstance(t, Sample):
        return "sample"
    if isinstance(t, Score):
        return f"score({pretty(t.arg)})"
    if isinstance(t, SampleVar):
        return f"a{t.index}"
    if isinstance(t, StarValue):
        return "*"
    if isinstance(t, UnknownArg):
        return "?"
    if isinstance(t, HoleMu):
        return "mu"
    raise TypeError(type(t).__name__)


# --------------------------------------------------------------------------
# simple types


@dataclass(frozen=True)
class Real:
    top: bool = False

    def __str__(self):
        return "R^T" if self.top else "R"


@dataclass(frozen=True)
class Arrow:
    domain: object
    codomain: object

    def __str__(self):
        d = f"({self.domain})" if isinstance(self.domain, Arrow) else str(self.domain)
        return f"{d} -> {self.codomain}"


R = Real()
R_TOP = Real(True)


def subtype(a, b) -> bool:
    """a is a subtype of b: R below R^T, contravariant in arrow domains."""
    if isinstance(a, Real) and isinstance(b, Real):
        return a == b or (not a.top and b.top)
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        return subtype(b.domain, a.domain) and subtype(a.codomain, b.codomain)
    return False


class _TVar:
    __slots__ = ("ref",)

    def __init__(self):
        self.ref = None


def _find(t):
    while isinstance(t, _TVar) and t.ref is not None:
        t = t.ref
    return t


def _occurs(v, t):
    t = _find(t)
    if t is v:
        return True
    if isinstance(t, Arrow):
        return _occurs(v, t.domain) or _occurs(v, t.codomain)
    return False


def _unify(a, b, where):
    a, b = _find(a), _find(b)
    if a is b:
        return
    if isinstance(a, _TVar):
        if _occurs(a, b):
            raise TypeError_(f"infinite type at {where}")
        a.ref = b
    elif isinstance(b, _TVar):
        _unify(b, a, where)
    elif isinstance(a, Real) and isinstance(b, Real):
        return
    elif isinstance(a, Arrow) and isinstance(b, Arrow):
        _unify(a.domain, b.domain, where)
        _unify(a.codomain, b.codomain, where)
    else:
        raise TypeError_(f"type mismatch at {where}: {_show(a)} vs {_show(b)}")


def _resolve(t):
    t = _find(t)
    if isinstance(t, _TVar):
        t.ref = R  # unconstrained positions default to the base type
        return R
    if isinstance(t, Arrow):
        return Arrow(_resolve(t.domain), _resolve(t.codomain))
    return R if isinstance(t, Real) else t


def _show(t):
    t = _find(t)
    if isinstance(t, _TVar):
        return "?"
    if isinstance(t, Arrow):
        return f"({_show(t.domain)} -> {_show(t.codomain)})"
    return "R"


def _infer(t, env, table):
    """Skeleton inference by unification; table records each occurrence's
    type in pre-order."""
    slot = len(table)
    table.append(None)
    if isinstance(t, Var):
        if t.name not in env:
            raise TypeError_(f"unbound variable {t.name!r}")
        ty = env[t.name]
    elif isinstance(t, BASE_VALUES) or isinstance(t, Sample):
        if isinstance(t, BoxedPrim):
            for a in t.args:
                _unify(_infer(a, env, table), R, pretty(t))
        ty = R
    elif isinstance(t, HoleMu):
        ty = Arrow(R, R)
    elif isinstance(t, Lam):
        a = _TVar()
        body = _infer(t.body, {**env, t.var: a}, table)
        ty = Arrow(a, body)
    elif isinstance(t, Fix):
        a, b = _TVar(), _TVar()
        ty = Arrow(a, b)
        body = _infer(t.body, {**env, t.fvar: ty, t.var: a}, table)
        _unify(body, b, pretty(t))
    elif isinstance(t, App):
        f = _infer(t.fn, env, table)
        x = _infer(t.arg, env, table)
        ty = _TVar()
        _unify(f, Arrow(x, ty), pretty(t))
    elif isinstance(t, If):
        _unify(_infer(t.guard, env, table), R, "guard of " + pretty(t))
        ty = _infer(t.then, env, table)
        _unify(ty, _infer(t.orelse, env, table), pretty(t))
    elif isinstance(t, Prim):
        for a in t.args:
            _unify(_infer(a, env, table), R, pretty(t))
        ty = R
    elif isinstance(t, Score):
        _unify(_infer(t.arg, env, table), R, pretty(t))
        ty = R
    else:
        raise TypeError_(f"cannot type {type(t).__name__}")
    table[slot] = ty
    return ty


def typecheck(t: Term, env: dict | None = None):
    """The simple type of t, with unconstrained positions defaulted to R."""
    env = dict(env or {})
    ty = _infer(t, env, [])
    return _resolve(ty)


def is_closed(t: Term) -> bool:
    return not t._fv


# --------------------------------------------------------------------------
# progress typing: recursive outcomes must never reach a guard or a score
#
# The check is a Horn problem over one boolean per base-type position:
# "true" means the position may carry R^T.  HoleMu forces its domain and
# codomain to true, guards and scores force false, and subtyping gives
# implications (covariant, flipped on arrow domains).


class _Flags:
    def __init__(self):
        self.n = 0
        self.edges = {}
        self.true = set()
        self.false = set()

    def new(self):
        self.n += 1
        return self.n

    def imply(self, a, b):
        self.edges.setdefault(a, []).append(b)

    def solve(self):
        seen = set(self.true)
        stack = list(self.true)
        while stack:
            a = stack.pop()
            for b in self.edges.get(a, ()):
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        return not (seen & self.false)


def _shape(skel, flags):
    """A flagged copy of a resolved skeleton: Real positions become flag ids."""
    if isinstance(skel, Arrow):
        return ("->", _shape(skel.domain, flags), _shape(skel.codomain, flags))
    return flags.new()


def _sub(a, b, flags):
    if isinstance(a, int):
        flags.imply(a, b)
    else:
        _sub(b[1], a[1], flags)
        _sub(a[2], b[2], flags)


def _force(a, flags, value):
    (flags.true if value else flags.false).add(a)


def _progress(t, env, skel, flags):
    here = next(skel)
    ty = _shape(here, flags)
    if isinstance(t, Var):
        _sub(env[t.name], ty, flags)
    elif isinstance(t, Fix):
        raise TypeError_("nested fixpoint")
    elif isinstance(t, (Num, IntervalNum, Sample, SampleVar, UnknownArg)):
        pass  # R, which is below anything at base type
    elif isinstance(t, StarValue):
        _force(ty, flags, True)
    elif isinstance(t, HoleMu):
        _force(ty[1], flags, True)
        _force(ty[2], flags, True)
    elif isinstance(t, Lam):
        a = _shape(here.domain, flags)
        body = _progress(t.body, {**env, t.var: a}, skel, flags)
        _sub(("->", a, body), ty, flags)
    elif isinstance(t, App):
        f = _progress(t.fn, env, skel, flags)
        x = _progress(t.arg, env, skel, flags)
        _sub(x, f[1], flags)
        _sub(f[2], ty, flags)
    elif isinstance(t, If):
        g = _progress(t.guard, env, skel, flags)
        _force(g, flags, False)
        _sub(_progress(t.then, env, skel, flags), ty, flags)
        _sub(_progress(t.orelse, env, skel, flags), ty, flags)
    elif isinstance(t, (Prim, BoxedPrim)):
        for a in t.args:
            _sub(_progress(a, env, skel, flags), ty, flags)
    elif isinstance(t, Score):
        a = _progress(t.arg, env, skel, flags)
        _force(a, flags, False)
    else:
        raise TypeError_(f"{type(t).__name__} is not allowed here")
    return ty


def progress_check(body: Term) -> bool:
    """Whether body (with HoleMu at the call sites) is typable with result R^T
    such that no recursive outcome can reach a guard or a score."""
    if any(isinstance(s, Fix) for s in subterms(body)):
        return False
    table = []
    try:
        _infer(body, {}, table)
    except TypeError_:
        return False
    skel = iter([_resolve(ty) for ty in table])
    flags = _Flags()
    try:
        _progress(body, {}, skel, flags)
    except (TypeError_, KeyError):
        return False
    return flags.solve()
