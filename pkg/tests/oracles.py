"""Independent reference computations used to derive expected values.

None of these share code paths with the engines under test beyond the term
constructors and capture-avoiding substitution.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from spcf.syntax import App, Fix, If, Lam, Num, Prim, Sample, Score, substitute


# --------------------------------------------------------------------------
# a direct recursive call-by-name stepper


class RefStuck(Exception):
    pass


def _val(t):
    return isinstance(t, (Num, Lam, Fix))


def ref_step(t, trace):
    """One call-by-name step by structural recursion, or None at a value."""
    if _val(t):
        return None
    if isinstance(t, App):
        if isinstance(t.fn, Lam):
            return substitute(t.fn.body, {t.fn.var: t.arg}), trace
        if isinstance(t.fn, Fix):
            f = t.fn
            return substitute(f.body, {f.fvar: f, f.var: t.arg}), trace
        r = ref_step(t.fn, trace)
        if r is None:
            raise RefStuck("numeral applied")
        return App(r[0], t.arg), r[1]
    if isinstance(t, If):
        if isinstance(t.guard, Num):
            return (t.then if t.guard.value <= 0 else t.orelse), trace
        g, tr = ref_step(t.guard, trace)
        return If(g, t.then, t.orelse), tr
    if isinstance(t, Prim):
        for i, a in enumerate(t.args):
            if not isinstance(a, Num):
                a2, tr = ref_step(a, trace)
                return Prim(t.op, t.args[:i] + (a2,) + t.args[i + 1:]), tr
        return Num(t.op.apply(*(a.value for a in t.args))), trace
    if isinstance(t, Score):
        if isinstance(t.arg, Num):
            if t.arg.value < 0:
                raise RefStuck("negative score")
            return t.arg, trace
        a, tr = ref_step(t.arg, trace)
        return Score(a), tr
    if isinstance(t, Sample):
        if not trace:
            raise RefStuck("trace exhausted")
        return Num(Fraction(trace[0])), trace[1:]
    raise RefStuck(f"no rule for {t}")


def ref_run(t, trace, budget=100000):
    """(value, steps) if t reduces to a value consuming exactly the trace,
    else None."""
    trace = tuple(Fraction(x) for x in trace)
    n = 0
    while n <= budget:
        try:
            r = ref_step(t, trace)
        except RefStuck:
            return None
        if r is None:
            return (t, n) if not trace else None
        t, trace = r
        n += 1
    return None


# --------------------------------------------------------------------------
# volumes


def halfspace_cube_volume(a, b) -> Fraction:
    """Volume of {x in [0,1]^n | a.x <= b} for positive a, by inclusion and
    exclusion over the cube's corners."""
    a = [Fraction(x) for x in a]
    b = Fraction(b)
    n = len(a)
    total = Fraction(0)
    for k in range(n + 1):
        for sub in itertools.combinations(range(n), k):
            r = b - sum(a[i] for i in sub)
            if r > 0:
                total += (-1) ** k * r ** n
    prod = Fraction(1)
    for x in a:
        prod *= x
    return total / (math.factorial(n) * prod)


# --------------------------------------------------------------------------
# closed forms


def geo_lb(k) -> Fraction:
    """Termination mass of the first k outcomes of the fair geometric counter."""
    return 1 - Fraction(1, 2 ** k)


def geo_steps(j) -> int:
    """Steps of the run returning j (two β steps, sample, subtraction, if per
    unfolding, plus the final one)."""
    return 5 * j + 4


def geo_expected_steps(k) -> Fraction:
    return sum((Fraction(1, 2 ** (j + 1)) * geo_steps(j) for j in range(k)), Fraction(0))


def print_quarter_probability() -> Fraction:
    """Least root of q = 1/4 + 3/4 q^2."""
    # roots 1 and 1/3
    return Fraction(1, 3)


def ex51_p_approx(p):
    p = Fraction(p)
    return {0: p, 2: (1 - p) / 2, 3: (1 - p) / 2}


def ex513_p_approx(p):
    p = Fraction(p)
    return {0: p, 2: (1 - p) ** 2 / 2, 3: (1 - p * p) / 2}


def ex51_pattern(p, sig_r):
    """Counting pattern of the running example at an argument with sig(r)."""
    return {0: p, 2: (1 - p) * (2 - sig_r) / 2, 3: (1 - p) * sig_r / 2}


def extinction_probability(weights, iterations=200000, tol=1e-13) -> float:
    """Absorption probability from 1 of the walk trapped at 0, as the least
    fixed point of q = sum_z s(z) q^(z+1)."""
    q = 0.0
    for _ in range(iterations):
        nq = sum(float(w) * q ** (z + 1) for z, w in weights.items())
        if abs(nq - q) < tol:
            return nq
        q = nq
    return q


def least_fixed_root(weights) -> float:
    """Least root in [0, 1] of q = sum_z s(z) q^(z+1), from the polynomial's
    roots.  It is the absorption probability from 1."""
    import numpy as np

    top = max(max(weights) + 1, 1)
    coef = [0.0] * (top + 1)  # coef[k] multiplies q^k
    for z, w in weights.items():
        coef[z + 1] += float(w)
    coef[1] -= 1.0
    roots = np.roots(coef[::-1])
    real = [r.real for r in roots if abs(r.imag) < 1e-9 and -1e-9 <= r.real <= 1 + 1e-9]
    return min(real) if real else 1.0
