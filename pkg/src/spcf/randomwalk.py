"""Counting and step distributions, the random walk on the naturals trapped at
0, and the linear-time decision of whether the walk is absorbed almost surely.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np


def _normalize(weights) -> dict:
    out = {}
    for k, w in dict(weights).items():
        w = Fraction(w)
        if w < 0:
            raise ValueError(f"negative weight {w} at {k}")
        if w:
            out[int(k)] = out.get(int(k), Fraction(0)) + w
    if sum(out.values(), Fraction(0)) > 1:
        raise ValueError("weights sum to more than 1")
    return dict(sorted(out.items()))


class _Dist:
    def __init__(self, weights=None):
        self.weights = _normalize(weights or {})

    def __getitem__(self, k):
        return self.weights.get(k, Fraction(0))

    def __eq__(self, other):
        return type(self) is type(other) and self.weights == other.weights

    def __hash__(self):
        return hash((type(self).__name__, tuple(self.weights.items())))

    def __repr__(self):
        inner = ", ".join(f"{k}: {w}" for k, w in self.weights.items())
        return f"{type(self).__name__}({{{inner}}})"

    def __str__(self):
        if not self.weights:
            return "0"
        return " + ".join(f"{w}·δ{k}" for k, w in self.weights.items())

    @property
    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    @property
    def deficit(self) -> Fraction:
        return 1 - self.total

    def support(self):
        return list(self.weights)


class CountingDist(_Dist):
    """Sub-probability distribution on the number of recursive calls."""

    def __init__(self, weights=None):
        super().__init__(weights)
        if any(k < 0 for k in self.weights):
            raise ValueError("counting distributions live on the naturals")


class StepDist(_Dist):
    """Sub-probability distribution on the change of pending calls."""

    def __init__(self, weights=None):
        super().__init__(weights)
        if any(k < -1 for k in self.weights):
            raise ValueError("a step can decrease the walk by at most 1")

    @property
    def drift(self) -> Fraction:
        return sum((k * w for k, w in self.weights.items()), Fraction(0))


def shift(s: CountingDist) -> StepDist:
    """Making n calls changes the number of pending calls by n - 1."""
    return StepDist({n - 1: w for n, w in s.weights.items()})


@dataclass(frozen=True)
class AstDecision:
    ast: bool
    reason: str
    total: Fraction
    drift: Fraction
    is_delta0: bool

    def __bool__(self):
        return self.ast


def is_ast(s: StepDist) -> AstDecision:
    """The walk trapped at 0 is absorbed from every start with probability 1
    iff the weights sum to 1, s is not the point mass at 0, and the drift is
    not positive."""
    total = Fraction(0)
    drift = Fraction(0)
    for k, w in s.weights.items():
        total += w
        drift += k * w
    delta0 = s.weights == {0: Fraction(1)}
    if total != 1:
        return AstDecision(False, f"weights sum to {total} < 1", total, drift, delta0)
    if delta0:
        return AstDecision(False, "s is the point mass at 0", total, drift, delta0)
    if drift > 0:
        return AstDecision(False, f"drift {drift} > 0", total, drift, delta0)
    return AstDecision(True, "AST", total, drift, delta0)


def cumulative(s: _Dist, upto: int) -> list:
    out = []
    acc = Fraction(0)
    for n in range(upto + 1):
        acc += s[n]
        out.append(acc)
    return out


def leq(s: CountingDist, t: CountingDist) -> bool:
    """s ⊑ t: every cumulative sum of s is at most that of t."""
    top = max(s.support() + t.support() + [0])
    return all(a <= b for a, b in zip(cumulative(s, top), cumulative(t, top)))


def uniform_ast(family) -> bool:
    """A finite family of counting distributions whose shifts are all AST."""
    return all(is_ast(shift(s)).ast for s in family)


def era_corollary(rank: int, epsilon) -> bool:
    """A fixpoint of recursive rank m avoiding recursion with probability at
    least epsilon on every argument is AST when m(1 - epsilon) <= 1."""
    epsilon = Fraction(epsilon)
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    if rank < 0:
        raise ValueError("rank must be a natural number")
    return rank * (1 - epsilon) <= 1


def simulate(s: StepDist, start: int = 1, steps: int = 10_000, runs: int = 10_000,
             seed=0) -> float:
    """Fraction of runs of the trapped walk absorbed at 0 within ``steps``
    moves.  Missing mass kills the run (it is never absorbed)."""
    rng = np.random.default_rng(seed)
    support = np.array(list(s.weights) + [0], dtype=np.int64)
    probs = np.array([float(w) for w in s.weights.values()] + [float(s.deficit)])
    probs = probs / probs.sum()
    dead_index = len(support) - 1
    state = np.full(runs, start, dtype=np.int64)
    alive = np.ones(runs, dtype=bool)
    if start == 0:
        return 1.0
    for _ in range(steps):
        active = alive & (state > 0)
        n = int(active.sum())
        if n == 0:
            break
        idx = rng.choice(len(support), size=n, p=probs)
        moves = support[idx]
        died = idx == dead_index if s.deficit > 0 else np.zeros(n, dtype=bool)
        where = np.flatnonzero(active)
        state[where] = np.maximum(state[where] + moves, 0)
        alive[where[died]] = False
    return float(np.mean(alive & (state == 0)))
