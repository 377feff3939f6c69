"""Lebesgue measure of constraint sets over the unit cube.

Linear constraint sets are measured exactly: the set becomes a polytope
{x in [0,1]^m | Ax <= b} whose volume is computed by Lasserre's recursion in
rational arithmetic.  Other constraint sets are bracketed by a box sweep
that classifies boxes by interval arithmetic.  Both backends first split the
constraints into groups that share no sample variable and multiply the
groups' measures.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .symexec import (
    GE0, GT0, INSIDE, LE0, OUTSIDE, STRADDLE, sample_vars, sym_interval,
)
from .syntax import BoxedPrim, Num, SampleVar, Term

ZERO, ONE = Fraction(0), Fraction(1)
DEFAULT_GAP = Fraction(1, 2**20)
DEFAULT_SPLITS = 20000


class NotLinear(Exception):
    pass


@dataclass(frozen=True)
class Polytope:
    """{x | a.x <= b for every row (a, b)}; rows are tuples of Fractions."""

    dim: int
    rows: tuple

    @staticmethod
    def unit_box(dim, extra=()):
        rows = []
        for i in range(dim):
            e = [ZERO] * dim
            e[i] = ONE
            rows.append((tuple(e), ONE))
            e = [ZERO] * dim
            e[i] = -ONE
            rows.append((tuple(e), ZERO))
        rows.extend((tuple(Fraction(x) for x in a), Fraction(b)) for a, b in extra)
        return Polytope(dim, tuple(rows))


@dataclass(frozen=True)
class MeasureEstimate:
    lower: Fraction
    upper: Fraction
    boxes: tuple = field(default=(), compare=False)

    @property
    def exact(self):
        return self.lower == self.upper


# --------------------------------------------------------------------------
# linear forms


def linear_form(v: Term) -> tuple:
    """(coefficients by variable index, constant) of an affine symbolic value."""
    if isinstance(v, Num):
        return {}, v.value
    if isinstance(v, SampleVar):
        return {v.index: ONE}, ZERO
    if isinstance(v, BoxedPrim):
        if not v.op.linear:
            const = _const(v)
            if const is None:
                raise NotLinear(f"{v.op} applied to a sample variable")
            return {}, const
        forms = [linear_form(a) for a in v.args]
        n = v.op.name
        if n == "add":
            return _comb(forms[0], ONE, forms[1], ONE)
        if n == "sub":
            return _comb(forms[0], ONE, forms[1], -ONE)
        if n == "neg":
            return _scale(forms[0], -ONE)
        if n == "mulc":
            return _scale(forms[0], v.op.coeff)
    raise NotLinear(f"not a linear symbolic value: {v}")


def _const(v):
    if isinstance(v, Num):
        return v.value
    if isinstance(v, BoxedPrim):
        args = [_const(a) for a in v.args]
        if None in args:
            return None
        return v.op.apply(*args)
    return None


def _comb(f, p, g, q):
    coef = dict()
    for i, c in f[0].items():
        coef[i] = coef.get(i, ZERO) + p * c
    for i, c in g[0].items():
        coef[i] = coef.get(i, ZERO) + q * c
    return {i: c for i, c in coef.items() if c}, p * f[1] + q * g[1]


def _scale(f, q):
    return {i: q * c for i, c in f[0].items() if q * c}, q * f[1]


_row_cache: dict = {}


def _row(v, rel):
    key = (v, rel)
    hit = _row_cache.get(key)
    if hit is None:
        coef, c = linear_form(v)
        if rel == LE0:
            hit = (coef, -c)
        elif rel in (GT0, GE0):
            hit = ({i: -a for i, a in coef.items()}, c)
        else:
            raise ValueError(f"unknown relation {rel}")
        if len(_row_cache) > 100000:
            _row_cache.clear()
        _row_cache[key] = hit
    return hit


def _sparse_rows(constraints):
    """Constraints as sparse rows (coef dict, b) meaning coef.x <= b.
    Strict inequalities are relaxed; the boundary is a null set."""
    return [_row(v, rel) for v, rel in constraints]


def linearize(constraints, var_count: int) -> Polytope:
    """The polytope of a linear constraint set, box rows included."""
    extra = []
    for coef, b in _sparse_rows(constraints):
        a = [ZERO] * var_count
        for i, c in coef.items():
            a[i] = c
        extra.append((a, b))
    return Polytope.unit_box(var_count, extra)


# --------------------------------------------------------------------------
# exact volume


def _normalize(a, b):
    """Scale a row so that its first nonzero coefficient has absolute value 1."""
    for x in a:
        if x:
            s = abs(x)
            return tuple(y / s for y in a), b / s
    return a, b


_volume_cache: dict = {}


def volume_exact(p: Polytope) -> Fraction:
    """Exact volume of a bounded polytope."""
    return _volume(p.dim, p.rows)


def _volume(d, rows):
    # clean: drop trivial rows, detect infeasible constant rows, dedupe
    clean = set()
    for a, b in rows:
        if not any(a):
            if b < 0:
                return ZERO
            continue
        clean.add(_normalize(a, b))
    if d == 0:
        return ONE
    # per-coordinate bounds from single-variable rows
    lo = [None] * d
    hi = [None] * d
    for a, b in clean:
        nz = [j for j in range(d) if a[j]]
        if len(nz) == 1:
            j = nz[0]
            bound = b / a[j]
            if a[j] > 0:
                hi[j] = bound if hi[j] is None else min(hi[j], bound)
            else:
                lo[j] = bound if lo[j] is None else max(lo[j], bound)
    for j in range(d):
        if lo[j] is not None and hi[j] is not None and lo[j] >= hi[j]:
            return ZERO
    if d == 1:
        if lo[0] is None or hi[0] is None:
            raise ValueError("unbounded polytope")
        return hi[0] - lo[0]
    if all(x is not None for x in lo) and all(x is not None for x in hi):
        # keep only the tightest coordinate bounds and the rows that can cut
        # the bounding box
        kept = set()
        for j in range(d):
            e = tuple(ONE if k == j else ZERO for k in range(d))
            kept.add((e, hi[j]))
            kept.add((tuple(-x for x in e), -lo[j]))
        for a, b in clean:
            if sum(1 for x in a if x) > 1:
                top = sum(x * (hi[j] if x > 0 else lo[j]) for j, x in enumerate(a) if x)
                if top > b:
                    kept.add((a, b))
        clean = kept
    key = (d, frozenset(clean))
    hit = _volume_cache.get(key)
    if hit is not None:
        return hit
    rows = sorted(clean)
    total = ZERO
    for i, (a, b) in enumerate(rows):
        if b == 0:
            continue
        j = max(range(d), key=lambda k: (abs(a[k]), -k))
        aj = a[j]
        sub = []
        for k, (r, c) in enumerate(rows):
            if k == i:
                continue
            f = r[j] / aj
            sub.append((tuple(r[m] - f * a[m] for m in range(d) if m != j), c - f * b))
        facet = _volume(d - 1, sub)
        if facet:
            total += b / abs(aj) * facet
    total /= d
    if len(_volume_cache) > 200000:
        _volume_cache.clear()
    _volume_cache[key] = total
    return total


# --------------------------------------------------------------------------
# independent groups


def components(constraints) -> list:
    """Split a constraint set into groups that share no sample variable.
    Returns (variables, constraints) pairs; variable-free constraints come
    in a group with an empty variable list."""
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    cons_vars = []
    for v, rel in constraints:
        vs = sorted(sample_vars(v))
        cons_vars.append(vs)
        for x in vs:
            parent.setdefault(x, x)
        for x in vs[1:]:
            ra, rb = find(vs[0]), find(x)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups = {}
    for (v, rel), vs in zip(constraints, cons_vars):
        key = find(vs[0]) if vs else None
        groups.setdefault(key, []).append((v, rel))
    out = []
    for key, cons in groups.items():
        vs = sorted({x for v, _ in cons for x in sample_vars(v)})
        out.append((vs, cons))
    out.sort(key=lambda g: (g[0][:1] or [-1]))
    return out


def _canonical_rows(variables, cons):
    """Sparse rows renamed to 0..k-1 in the given variable order."""
    index = {x: i for i, x in enumerate(variables)}
    rows = []
    for coef, b in _sparse_rows(cons):
        a = [ZERO] * len(variables)
        for i, c in coef.items():
            a[index[i]] = c
        rows.append((tuple(a), b))
    return rows


_group_cache: dict = {}


def _group_volume(variables, cons):
    rows = _canonical_rows(variables, cons)
    key = (len(variables), frozenset(rows))
    hit = _group_cache.get(key)
    if hit is None:
        hit = volume_exact(Polytope.unit_box(len(variables), rows))
        if len(_group_cache) > 200000:
            _group_cache.clear()
        _group_cache[key] = hit
    return hit


def exact_measure(constraints) -> Fraction:
    """Exact measure of a linear constraint set; raises NotLinear."""
    total = ONE
    for variables, cons in components(constraints):
        if not variables:
            for v, rel in cons:
                _, c = linear_form(v)
                if (rel == LE0 and c > 0) or (rel == GT0 and c <= 0) or (rel == GE0 and c < 0):
                    return ZERO
            continue
        total *= _group_volume(variables, cons)
        if not total:
            return ZERO
    return total


# --------------------------------------------------------------------------
# box sweep


def _box_volume(box):
    v = ONE
    for lo, hi in box:
        v *= hi - lo
    return v


def _split(box):
    j = max(range(len(box)), key=lambda k: (box[k][1] - box[k][0], -k))
    lo, hi = box[j]
    mid = (lo + hi) / 2
    left = box[:j] + ((lo, mid),) + box[j + 1:]
    right = box[:j] + ((mid, hi),) + box[j + 1:]
    return left, right


def merge_boxes(boxes) -> list:
    """Merge boxes that agree on all but one coordinate and touch along it."""
    boxes = list(boxes)
    changed = True
    while changed and boxes:
        changed = False
        d = len(boxes[0])
        for j in range(d):
            groups = {}
            for b in boxes:
                groups.setdefault(b[:j] + b[j + 1:], []).append(b[j])
            merged = []
            for rest, ivs in groups.items():
                ivs.sort()
                cur = list(ivs[0])
                for lo, hi in ivs[1:]:
                    if lo == cur[1]:
                        cur[1] = hi
                        changed = True
                    else:
                        merged.append(rest[:j] + (tuple(cur),) + rest[j:])
                        cur = [lo, hi]
                merged.append(rest[:j] + (tuple(cur),) + rest[j:])
            boxes = merged
    return sorted(boxes)


def _affine_nonconstant(v):
    try:
        return bool(linear_form(v)[0])
    except NotLinear:
        return False


def classify(cons, box, null_boundary=None) -> str:
    """Like check_box, but a box is also outside when the constraint can only
    hold on the zero set of a nonconstant affine value, which is null.  Inside
    stays strict, so inside boxes are valid for the interval semantics."""
    if null_boundary is None:
        null_boundary = [_affine_nonconstant(v) for v, _ in cons]
    inside = True
    for (v, rel), nb in zip(cons, null_boundary):
        lo, hi = sym_interval(v, box)
        if rel == LE0:
            yes, no = hi <= 0, lo > 0 or (nb and lo >= 0)
        elif rel == GT0:
            yes, no = lo > 0, hi <= 0
        else:
            yes, no = lo >= 0, hi < 0 or (nb and hi <= 0)
        if no:
            return OUTSIDE
        inside = inside and yes
    return INSIDE if inside else STRADDLE


def _sweep_group(cons, dim, gap, max_splits):
    nb = [_affine_nonconstant(v) for v, _ in cons]
    lower, outside = ZERO, ZERO
    inside = []
    work = deque([((ZERO, ONE),) * dim])
    pending = []
    splits = 0
    while work:
        if ONE - outside - lower <= gap:
            pending.extend(work)
            break
        box = work.popleft()
        status = classify(cons, box, nb)
        if status == INSIDE:
            lower += _box_volume(box)
            inside.append(box)
        elif status == OUTSIDE:
            outside += _box_volume(box)
        elif splits < max_splits and dim > 0:
            splits += 1
            work.extend(_split(box))
        else:
            pending.append(box)
    return lower, ONE - outside, inside


def sweep_measure(constraints, target_gap=DEFAULT_GAP, max_splits=DEFAULT_SPLITS,
                  var_count: int | None = None) -> MeasureEstimate:
    """Certified bounds by recursive bisection of the unit cube.

    The returned ``boxes`` are product boxes over the sample variables
    0..var_count-1 (unconstrained variables span [0, 1]) that lie inside the
    constraint set; their total volume is ``lower``.
    """
    constraints = list(constraints)
    target_gap = Fraction(target_gap)
    if var_count is None:
        used = set()
        for v, _ in constraints:
            used |= sample_vars(v)
        var_count = max(used) + 1 if used else 0
    groups = components(constraints)
    n = max(1, sum(1 for vs, _ in groups if vs))
    lower, upper = ONE, ONE
    factor_boxes = []
    for variables, cons in groups:
        dim = len(variables)
        index = {x: i for i, x in enumerate(variables)}
        local = [(_rename(v, index), rel) for v, rel in cons]
        lo, hi, inside = _sweep_group(local, dim, target_gap / n, max_splits)
        lower *= lo
        upper *= hi
        factor_boxes.append((variables, merge_boxes(inside) if inside else []))
    boxes = _product_boxes(factor_boxes, var_count) if lower else []
    return MeasureEstimate(lower, upper, tuple(boxes))


def _rename(v, index):
    if isinstance(v, SampleVar):
        return SampleVar(index[v.index])
    if isinstance(v, BoxedPrim):
        return BoxedPrim(v.op, tuple(_rename(a, index) for a in v.args))
    return v


def _product_boxes(factor_boxes, var_count):
    full = (ZERO, ONE)
    out = [[full] * var_count]
    for variables, boxes in factor_boxes:
        if not variables:
            if not boxes:
                return []
            continue
        nxt = []
        for partial in out:
            for b in boxes:
                q = list(partial)
                for x, iv in zip(variables, b):
                    q[x] = iv
                nxt.append(q)
        out = nxt
    return [tuple(b) for b in out]


def measure(constraints, var_count: int | None = None) -> MeasureEstimate:
    """Exact measure when the constraints are linear, sweep bounds otherwise."""
    constraints = list(constraints)
    try:
        v = exact_measure(constraints)
        return MeasureEstimate(v, v)
    except NotLinear:
        return sweep_measure(constraints, var_count=var_count)
