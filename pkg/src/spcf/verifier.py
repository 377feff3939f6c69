"""Almost-sure termination of a fixpoint on every argument: build the
execution tree, check sufficient independence, compute P_approx and decide
its shift as a random walk."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .counting import (
    CountingError, PApprox, build_tree, fixpoint_of, p_approx, sufficient_independence,
)
from .measure import NotLinear
from .randomwalk import CountingDist, is_ast, shift
from .syntax import Term, TypeError_, is_closed, typecheck


class PreconditionError(ValueError):
    """The program is outside the fragment the verifier accepts."""


@dataclass
class AstVerdict:
    decision: str  # "AST" or "Unknown"
    reason: str
    p_approx: PApprox | None
    checks: dict = field(default_factory=dict)
    independence: bool = False
    rank: int = 0
    elapsed_ms: int = 0

    @property
    def ast(self) -> bool:
        return self.decision == "AST"


def verify_ast(t: Term) -> AstVerdict:
    """AST on every actual argument, or Unknown naming the stage that failed.
    Unknown is not a refutation."""
    start = time.monotonic()
    try:
        fix = fixpoint_of(t)
    except CountingError as e:
        raise PreconditionError(str(e)) from None
    if not is_closed(fix):
        raise PreconditionError("the fixpoint has free variables")
    try:
        typecheck(fix)
    except TypeError_ as e:
        raise PreconditionError(f"ill-typed: {e}") from None
    try:
        tree = build_tree(fix)
    except CountingError as e:
        raise PreconditionError(str(e)) from None

    def done(decision, reason, pa=None, checks=None, indep=False, rank=0):
        ms = int((time.monotonic() - start) * 1000)
        return AstVerdict(decision, reason, pa, checks or {}, indep, rank, ms)

    indep = sufficient_independence(tree)
    if not indep:
        return done("Unknown", "execution tree is not sufficiently independent", indep=False)
    try:
        pa = p_approx(tree)
    except NotLinear as e:
        return done("Unknown", f"nonlinear guard: {e}", indep=True)
    d = is_ast(shift(CountingDist(pa.dist)))
    checks = {"sum": d.total, "not_delta1": not d.is_delta0, "drift": d.drift}
    if d.ast:
        return done("AST", "AST", pa, checks, True, pa.rank)
    return done("Unknown", d.reason, pa, checks, True, pa.rank)

