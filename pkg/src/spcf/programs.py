"""The bundled corpus and parameterized program families."""

from __future__ import annotations

from fractions import Fraction
from importlib import resources

from .syntax import Term, parse

TEMPLATES = {
    "geo": "(fix f x. x (+ {p}) f (x + 1)) 0",
    "prog1": "(fix f x. if sample <= {p} then x else f (x + 1)) 1",
    "prog2": "(fix f x. if sample <= {p} then x else f (f (x + 1))) 1",
    "print": "(fix f x. x (+ {p}) f (f x)) 0",
    "print3": "(fix f x. x (+ {p}) f (f (f x))) 0",
    "rw": "(fix f x. if x then 0 else f (x - 1) (+ {p}) f (x + 1)) 1",
    "ex51": "(fix f x. x (+ {p}) ((f^3(x + 1) (+) f^2(x + 1)) (+ sig(x)) f^2(x + 1))) 0",
    "ex513": ("(fix f x. let e = sample in if e <= {p} then x else "
              "((f^3(x + 1) (+ e) f^2(x + 1)) (+ sig(x)) f^2(x + 1))) 0"),
}


def corpus_names() -> list:
    files = resources.files("spcf") / "corpus"
    return sorted(f.name[:-5] for f in files.iterdir() if f.name.endswith(".spcf"))


def corpus_source(name: str) -> str:
    path = resources.files("spcf") / "corpus" / f"{name}.spcf"
    if not path.is_file():
        raise FileNotFoundError(f"no corpus program named {name!r}")
    return path.read_text(encoding="utf-8")


def corpus_program(name: str) -> Term:
    return parse(corpus_source(name))


def template_source(family: str, p) -> str:
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError("the parameter must lie in [0, 1]")
    return TEMPLATES[family].format(p=f"{p.numerator}/{p.denominator}")


def template(family: str, p) -> Term:
    return parse(template_source(family, p))
