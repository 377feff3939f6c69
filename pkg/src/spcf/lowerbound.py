"""Lower bounds on the termination probability and the expected number of
steps, obtained by enumerating terminating oracles and measuring their
constraint sets."""

from __future__ import annotations

import json
import multiprocessing
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .interval import as_trace, weight
from .measure import DEFAULT_GAP, DEFAULT_SPLITS, measure, sweep_measure
from .symexec import oracle_frontier
from .syntax import Term, TypeError_, is_closed, typecheck

DEFAULT_DEPTH = 100


@dataclass
class PathBound:
    oracle: str
    steps: int
    var_count: int
    lower: Fraction
    upper: Fraction


@dataclass
class LowerBoundResult:
    lb_probability: Fraction
    lb_expected_steps: Fraction
    oracles_terminated: int
    oracles_explored: int
    depth: int
    elapsed_ms: int
    configurations: int = 0
    complete: bool = True
    paths: list = field(default_factory=list, repr=False)
    certificate: list | None = field(default=None, repr=False)

    @property
    def certified_probability(self):
        """Total weight of the certificate boxes (at most lb_probability)."""
        if self.certificate is None:
            return None
        return sum((weight(tr) for tr, _ in self.certificate), Fraction(0))

    @property
    def certified_expected_steps(self):
        if self.certificate is None:
            return None
        return sum((weight(tr) * n for tr, n in self.certificate), Fraction(0))


_WORK = None  # frontier results shared with forked workers


def _measure_one(i):
    r = _WORK[0][i]
    m = measure(r.constraints, r.var_count)
    return m.lower, m.upper


def _certify_one(i):
    r = _WORK[0][i]
    m = sweep_measure(r.constraints, _WORK[1], DEFAULT_SPLITS, r.var_count)
    return [(box, r.steps) for box in m.boxes]


def _map(fn, n, jobs):
    if jobs <= 1 or n < 64 or "fork" not in multiprocessing.get_all_start_methods():
        for i in range(n):
            yield fn(i)
        return
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(jobs) as pool:
        yield from pool.imap(fn, range(n), chunksize=max(1, n // (jobs * 8)))


def check_program(t: Term):
    if not is_closed(t):
        raise TypeError_(f"program has free variables: {sorted(t._fv)}")
    ty = typecheck(t)
    return ty


def lower_bound(t: Term, max_depth: int = DEFAULT_DEPTH,
                per_path_gap=DEFAULT_GAP, time_budget_ms: int | None = None,
                certificate: bool = False, jobs: int = 1) -> LowerBoundResult:
    """Sound lower bounds from all terminating oracles within max_depth steps.

    With ``certificate`` the result also carries a pairwise compatible list of
    (interval trace, steps) that each terminate under the interval semantics.
    """
    global _WORK
    start = time.monotonic()
    check_program(t)
    frontier = oracle_frontier(t, max_depth)
    results = frontier.results
    deadline = None if time_budget_ms is None else start + time_budget_ms / 1000

    lb = Fraction(0)
    lb_steps = Fraction(0)
    paths = []
    complete = True
    _WORK = (results, Fraction(per_path_gap))
    try:
        for r, (lo, hi) in zip(results, _map(_measure_one, len(results), jobs)):
            paths.append(PathBound(r.oracle, r.steps, r.var_count, lo, hi))
            lb += lo
            lb_steps += lo * r.steps
            if deadline is not None and time.monotonic() > deadline:
                complete = False
                break
        cert = None
        if certificate:
            cert = []
            live = [i for i, p in enumerate(paths) if p.lower > 0]
            for boxes in _map(_certify_one_from(live), len(live), jobs):
                cert.extend(boxes)
    finally:
        _WORK = None
    elapsed = int((time.monotonic() - start) * 1000)
    return LowerBoundResult(lb, lb_steps, sum(1 for p in paths if p.lower > 0),
                            frontier.oracles_explored, max_depth, elapsed,
                            frontier.configurations, complete, paths, cert)


class _certify_one_from:
    """Picklable index remapping for the certificate pass."""

    def __init__(self, live):
        self.live = live

    def __call__(self, k):
        return _certify_one(self.live[k])


def certificate_boxes(t: Term, max_depth: int, per_path_gap=DEFAULT_GAP, jobs: int = 1):
    """The (trace, steps) list of a lower-bound certificate."""
    return lower_bound(t, max_depth, per_path_gap, certificate=True, jobs=jobs).certificate


def _q(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def certificate_json(boxes) -> list:
    return [{"trace": [[_q(lo), _q(hi)] for lo, hi in tr], "steps": n} for tr, n in boxes]


def emit_certificate(boxes, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(certificate_json(boxes), fh, indent=1)
        fh.write("\n")


def load_certificate(path) -> list:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return [(as_trace((Fraction(lo), Fraction(hi)) for lo, hi in item["trace"]), int(item["steps"]))
            for item in data]
