"""Figures for the report command, rendered to PNG files."""

from __future__ import annotations

import os
from fractions import Fraction

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .lowerbound import lower_bound  # noqa: E402
from .programs import corpus_program, template  # noqa: E402
from .randomwalk import CountingDist, StepDist, is_ast, shift  # noqa: E402
from .verifier import verify_ast  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 10,
    "legend.fontsize": 8,
    "legend.frameon": False,
}

# true termination probabilities where known
TRUE_VALUES = {
    "geo_half": 1.0,
    "gr": (5 ** 0.5 - 1) / 2,
    "print_half": 1.0,
    "print_quarter": 1 / 3,
}


def _save(fig, out_dir, name):
    path = os.path.join(out_dir, name)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return path


def lb_convergence(out_dir, max_depth=40):
    """Lower bound against exploration depth."""
    depths = list(range(4, max_depth + 1, 4))
    fig, ax = plt.subplots()
    for i, (name, truth) in enumerate(TRUE_VALUES.items()):
        t = corpus_program(name)
        lbs = [float(lower_bound(t, d).lb_probability) for d in depths]
        line, = ax.plot(depths, lbs, marker="o", ms=3, label=name)
        ax.axhline(truth, ls="--", lw=0.8, color=line.get_color())
    ax.set_xlabel("depth")
    ax.set_ylabel("lower bound on P(termination)")
    ax.set_ylim(0, 1.05)
    ax.legend(loc="lower right")
    return _save(fig, out_dir, "lb_convergence.png")


def p_approx_bars(out_dir):
    """P_approx of the programs verified AST."""
    rows = [("prog1", Fraction(1, 2)), ("prog2", Fraction(1, 2)), ("print3", Fraction(2, 3)),
            ("ex51", Fraction(3, 5)), ("ex513", Fraction(13, 20))]
    fig, axes = plt.subplots(1, len(rows), sharey=True, figsize=(10, 2.8))
    for ax, (fam, p) in zip(axes, rows):
        v = verify_ast(template(fam, p))
        ns = list(range(v.rank + 1))
        ax.bar(ns, [float(v.p_approx[n]) for n in ns], color="0.35", width=0.6)
        ax.set_title(f"{fam}, p={p}", fontsize=9)
        ax.set_xticks(ns)
        ax.set_xlabel("calls")
    axes[0].set_ylabel("P_approx")
    return _save(fig, out_dir, "p_approx.png")


def drift_threshold(out_dir, points=41):
    """Drift of the shifted P_approx across the parameter; AST needs drift <= 0."""
    fig, ax = plt.subplots()
    grid = [Fraction(i, points - 1) for i in range(points)]
    for fam in ("prog2", "ex51", "ex513"):
        xs, ys = [], []
        for p in grid:
            v = verify_ast(template(fam, p))
            if v.checks:
                xs.append(float(p))
                ys.append(float(v.checks["drift"]))
        ax.plot(xs, ys, label=fam)
    ax.axhline(0, color="k", lw=0.8)
    ax.axvline(7 ** 0.5 - 2, color="0.5", ls=":", lw=0.8)
    ax.set_xlabel("p")
    ax.set_ylabel("drift of shifted P_approx")
    ax.legend()
    return _save(fig, out_dir, "drift_threshold.png")


def absorption(out_dir, seed=0, runs=2000, steps=2000):
    """Fraction of walks absorbed at 0 over time."""
    cases = [
        ("1/2 d0 + 1/2 d2", shift(CountingDist({0: Fraction(1, 2), 2: Fraction(1, 2)}))),
        ("0.49 d0 + 0.51 d2", shift(CountingDist({0: Fraction(49, 100), 2: Fraction(51, 100)}))),
        ("0.6 d0 + 0.2 d2 + 0.2 d3",
         shift(CountingDist({0: Fraction(3, 5), 2: Fraction(1, 5), 3: Fraction(1, 5)}))),
        ("0.4 d0 + 0.6 d2", shift(CountingDist({0: Fraction(2, 5), 2: Fraction(3, 5)}))),
    ]
    fig, ax = plt.subplots()
    rng = np.random.default_rng(seed)
    for label, s in cases:
        curve = _absorption_curve(s, runs, steps, rng)
        tag = "AST" if is_ast(s) else "not AST"
        ax.plot(np.arange(1, steps + 1), curve, label=f"{label} ({tag})")
    ax.set_xscale("log")
    ax.set_xlabel("steps")
    ax.set_ylabel("absorbed fraction")
    ax.legend(loc="lower right")
    return _save(fig, out_dir, "absorption.png")


def _absorption_curve(s: StepDist, runs, steps, rng):
    support = np.array(list(s.weights), dtype=np.int64)
    probs = np.array([float(w) for w in s.weights.values()])
    probs = probs / probs.sum()
    state = np.ones(runs, dtype=np.int64)
    curve = np.empty(steps)
    for i in range(steps):
        moves = support[rng.choice(len(support), size=runs, p=probs)]
        state = np.where(state > 0, np.maximum(state + moves, 0), 0)
        curve[i] = np.mean(state == 0)
    return curve


def render_all(out_dir, depth=40, seed=0) -> list:
    os.makedirs(out_dir, exist_ok=True)
    with plt.rc_context(STYLE):
        return [
            lb_convergence(out_dir, depth),
            p_approx_bars(out_dir),
            drift_threshold(out_dir),
            absorption(out_dir, seed),
        ]
