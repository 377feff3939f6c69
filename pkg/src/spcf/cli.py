"""Command line front end.

    spcf lb FILE [--depth N] [--gap Q] [--budget MS] [--format json|table]
    spcf ast FILE [--format json|table] [--dot PATH]
    spcf report [--out DIR]

FILE is a path to a program or the name of a bundled corpus program.
Exit codes: 0 success, 1 the AST analysis was inconclusive, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

from .counting import CountingError, build_tree, fixpoint_of, to_dot
from .lowerbound import DEFAULT_DEPTH, emit_certificate, lower_bound
from .measure import DEFAULT_GAP
from .programs import corpus_names, corpus_source
from .syntax import SyntaxError_, TypeError_, parse
from .verifier import PreconditionError, verify_ast


class InputError(Exception):
    pass


@dataclass
class Config:
    command: str
    term_path: str | None = None
    max_depth: int = DEFAULT_DEPTH
    gap: Fraction = DEFAULT_GAP
    time_budget_ms: int | None = None
    format: str = "json"
    seed: int = 0
    jobs: int = 1

    def validate(self):
        if self.max_depth < 1:
            raise InputError("--depth must be at least 1")
        if not 0 < self.gap < 1:
            raise InputError("--gap must lie in (0, 1)")
        if self.jobs < 1:
            raise InputError("--jobs must be at least 1")


def fmt_rational(q: Fraction, digits: int = 10) -> str:
    """p/q followed by the decimal expansion truncated to ``digits`` places."""
    q = Fraction(q)
    exact = str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
    sign = "-" if q < 0 else ""
    a = abs(q)
    whole = a.numerator // a.denominator
    frac = (a - whole) * 10**digits
    dec = f"{sign}{whole}.{frac.numerator // frac.denominator:0{digits}d}"
    return f"{exact} ({dec})"


def fmt_dist(dist: dict) -> str:
    if not dist:
        return "0"
    parts = []
    for n, w in sorted(dist.items()):
        w = Fraction(w)
        ws = str(w.numerator) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"
        parts.append(f"{ws}·δ{n}")
    return " + ".join(parts)


def load_program(where: str):
    if os.path.isfile(where):
        with open(where, encoding="utf-8") as fh:
            source = fh.read()
        name = os.path.splitext(os.path.basename(where))[0]
    elif where in corpus_names():
        source = corpus_source(where)
        name = where
    else:
        raise InputError(f"cannot read {where!r}: no such file or corpus program")
    try:
        return name, parse(source)
    except SyntaxError_ as e:
        raise InputError(f"{where}: {e}") from None


def lb_json(name, cfg: Config, r, timing: bool) -> dict:
    out = {
        "program": name,
        "depth": r.depth,
        "gap": str(cfg.gap),
        "lb_probability": fmt_rational(r.lb_probability),
        "lb_expected_steps": fmt_rational(r.lb_expected_steps),
        "oracles_terminated": r.oracles_terminated,
        "oracles_explored": r.oracles_explored,
        "configurations": r.configurations,
        "complete": r.complete,
    }
    if r.certificate is not None:
        out["certified_probability"] = fmt_rational(r.certified_probability)
        out["certified_expected_steps"] = fmt_rational(r.certified_expected_steps)
        out["certificate_boxes"] = len(r.certificate)
    if timing:
        out["elapsed_ms"] = r.elapsed_ms
    return out


def ast_json(name, v, timing: bool) -> dict:
    out = {
        "program": name,
        "decision": v.decision,
        "reason": v.reason,
        "p_approx": None if v.p_approx is None else fmt_dist(v.p_approx.dist),
        "checks": None,
        "independence": v.independence,
        "rank": v.rank,
    }
    if v.checks:
        out["checks"] = {
            "sum": fmt_rational(v.checks["sum"]),
            "not_delta1": v.checks["not_delta1"],
            "drift": fmt_rational(v.checks["drift"]),
        }
    if timing:
        out["elapsed_ms"] = v.elapsed_ms
    return out


def _emit(obj: dict, fmt: str, out):
    if fmt == "json":
        json.dump(obj, out, indent=2, ensure_ascii=False)
        out.write("\n")
        return
    width = max(len(k) for k in obj)
    for k, v in obj.items():
        if isinstance(v, dict):
            v = ", ".join(f"{a}={b}" for a, b in v.items())
        out.write(f"{k.ljust(width)}  {v}\n")


def _parser():
    p = argparse.ArgumentParser(prog="spcf", description="Termination analysis for SPCF programs.")
    sub = p.add_subparsers(dest="command", required=True)

    lb = sub.add_parser("lb", help="lower bounds on termination probability and expected steps")
    lb.add_argument("file")
    lb.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    lb.add_argument("--gap", type=Fraction, default=DEFAULT_GAP)
    lb.add_argument("--budget", type=int, default=None, help="time budget in ms")
    lb.add_argument("--format", choices=("json", "table"), default="json")
    lb.add_argument("--jobs", type=int, default=1)
    lb.add_argument("--certificate", metavar="PATH", help="write the interval-trace certificate")
    lb.add_argument("--timing", action="store_true", help="include elapsed time in the output")

    ast = sub.add_parser("ast", help="almost-sure termination on every argument")
    ast.add_argument("file")
    ast.add_argument("--format", choices=("json", "table"), default="json")
    ast.add_argument("--dot", metavar="PATH", help="write the execution tree as a DOT graph")
    ast.add_argument("--timing", action="store_true")

    rep = sub.add_parser("report", help="render the analysis figures")
    rep.add_argument("--out", default="figures")
    rep.add_argument("--depth", type=int, default=40)
    rep.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = _parser().parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        if args.command == "lb":
            cfg = Config("lb", args.file, args.depth, args.gap, args.budget, args.format, jobs=args.jobs)
            cfg.validate()
            name, t = load_program(args.file)
            try:
                r = lower_bound(t, cfg.max_depth, cfg.gap, cfg.time_budget_ms,
                                certificate=bool(args.certificate), jobs=cfg.jobs)
            except TypeError_ as e:
                raise InputError(f"{args.file}: {e}") from None
            if args.certificate:
                emit_certificate(r.certificate, args.certificate)
            _emit(lb_json(name, cfg, r, args.timing), cfg.format, out)
            return 0
        if args.command == "ast":
            name, t = load_program(args.file)
            try:
                v = verify_ast(t)
            except PreconditionError as e:
                raise InputError(f"{args.file}: {e}") from None
            if args.dot:
                with open(args.dot, "w", encoding="utf-8") as fh:
                    fh.write(to_dot(build_tree(fixpoint_of(t))))
            _emit(ast_json(name, v, args.timing), args.format, out)
            return 0 if v.ast else 1
        if args.command == "report":
            from .report import render_all

            if args.depth < 1:
                raise InputError("--depth must be at least 1")
            for path in render_all(args.out, args.depth, args.seed):
                out.write(f"{path}\n")
            return 0
    except (InputError, OSError, CountingError) as e:
        print(f"spcf: error: {e}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
