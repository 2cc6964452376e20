"""Perfect simulation of Bernoulli and discrete laws from fair coin flips."""

from .analysis import cost_pgf, oracle_value, path_length_pgf
from .bags import GeometricBag, Int1
from .combinators import (
    And,
    Bind,
    Cond,
    ConstRational,
    Even,
    Expr,
    Flip,
    Mean,
    Not,
    Or,
    SampleResult,
    Third,
    Var,
    sample_bernoulli,
)
from .dsl import parse, to_dsl
from .randbits import BitSource, make_source
from .registry import named
from .runner import dist, run

__all__ = [
    "And",
    "Bind",
    "BitSource",
    "Cond",
    "ConstRational",
    "Even",
    "Expr",
    "Flip",
    "GeometricBag",
    "Int1",
    "Mean",
    "Not",
    "Or",
    "SampleResult",
    "Third",
    "Var",
    "cost_pgf",
    "dist",
    "make_source",
    "named",
    "oracle_value",
    "parse",
    "path_length_pgf",
    "run",
    "sample_bernoulli",
    "to_dsl",
]
