"""Termination analysis for SPCF, a probabilistic PCF with continuous
sampling and scoring."""

from .counting import build_tree, p_approx, strategies, sufficient_independence
from .interval import embed, run_interval, strong_split
from .itypes import check_derivation, synthesize
from .lowerbound import LowerBoundResult, lower_bound
from .measure import measure, volume_exact
from .programs import corpus_program, template
from .randomwalk import CountingDist, StepDist, is_ast, leq, shift
from .semantics import run_cbn, run_cbv, run_counting
from .syntax import parse, pretty, typecheck
from .verifier import AstVerdict, verify_ast

__version__ = "0.1.0"

__all__ = [
    "AstVerdict", "CountingDist", "LowerBoundResult", "StepDist", "build_tree",
    "check_derivation", "corpus_program", "embed", "is_ast", "leq", "lower_bound",
    "measure", "p_approx", "parse", "pretty", "run_cbn", "run_cbv", "run_counting",
    "run_interval", "shift", "strategies", "strong_split", "sufficient_independence",
    "synthesize", "template", "typecheck", "verify_ast", "volume_exact",
]
