"""Geometric bags and the Buffon integrator.

A bag is a uniform U in [0, 1] whose bits are revealed on demand.  Reading
bit 1 + Geo(1/2) of U gives a Bernoulli(U) draw, and all reads during one
output sample share the same U.
"""

from __future__ import annotations

from dataclasses import dataclass

from .combinators import (
    And,
    Bind,
    ConstRational,
    Even,
    Expr,
    Flip,
    Mean,
    Not,
    Sq,
    Third,
    UnboundVariable,
    Var,
)
from .randbits import BitSource
from .vonneumann import ExpNeg, Polylog
from .walks import Sqrt1m


class GeometricBag:
    """Sparse map from bit index (1-based) to revealed bit; no size cap."""

    __slots__ = ("revealed",)

    def __init__(self):
        self.revealed: dict[int, int] = {}

    def bit(self, src: BitSource) -> int:
        j = 1
        while not src.flip():
            j += 1
        v = self.revealed.get(j)
        if v is None:
            v = self.revealed[j] = src.flip()
        return v

    def __repr__(self):
        top = max(self.revealed, default=0)
        cells = "".join(str(self.revealed.get(i, "?")) for i in range(1, top + 1))
        return f"GeometricBag({cells})"


def bag_bernoulli(bag: GeometricBag, src: BitSource) -> int:
    return bag.bit(src)


@dataclass(frozen=True)
class Int1(Expr):
    """phi -> (1/lambda) * integral_0^lambda phi(w) dw.

    Each output sample opens a fresh bag; inside the body every read of x
    becomes Bernoulli(U) followed, if that succeeds, by the outer x.
    """

    e: Expr

    def sample(self, src, x):
        if x is None:
            raise UnboundVariable("int1 needs a binding for x")
        bag = GeometricBag()

        def scaled():
            return x() if bag.bit(src) else 0

        return self.e.sample(src, scaled)

    def children(self):
        return (self.e,)


def int1(e: Expr) -> Expr:
    return Int1(e)


X = Var()
HALF_OF = lambda e: Mean(e, ConstRational(0, 1))  # noqa: E731


def log1p_machine() -> Expr:
    """log(1 + x)."""
    return And(X, Int1(Even(X)))


def atan_machine() -> Expr:
    """arctan(x) = x * (1/x) int_0^x dw / (1 + w^2)."""
    return And(X, Int1(Even(Sq(X))))


def erf_int_machine() -> Expr:
    """int_0^x exp(-w^2/2) dw."""
    return And(X, Int1(ExpNeg(HALF_OF(Sq(X)))))


def asin_half_machine() -> Expr:
    """arcsin(x)/2, as the mean of int_0^x sqrt(1-w^2)/(1+w) dw and 1 - sqrt(1-x^2)."""
    s = Sqrt1m(Sq(X))
    return Mean(And(X, Int1(And(s, Even(X)))), Not(s))


def named_integrator_machines() -> dict[str, Expr]:
    return {
        "log1p": log1p_machine(),
        "atan": atan_machine(),
        "erf_int": erf_int_machine(),
        "asin_half": asin_half_machine(),
    }


def atan_over_x() -> Expr:
    return Int1(Even(Sq(X)))


def mgl_quarter_pi() -> Expr:
    """pi/4 as arctan(1); infinite expected cost."""
    return Bind(atan_over_x(), ConstRational(1, 1))


def machin_quarter_pi() -> Expr:
    """pi/4 = (1/2) [2 atan(1/2) + (2/3) * 3 atan(1/3)]."""
    return Mean(
        Bind(atan_over_x(), Flip()),
        And(Not(Third()), Bind(atan_over_x(), Third())),
    )


def pi_eighth() -> Expr:
    """pi/8 as the mean of atan(1/2) and atan(1/3)."""
    atan = atan_machine()
    return Mean(Bind(atan, Flip()), Bind(atan, Third()))


def pi2_over_24() -> Expr:
    """pi^2/24 = Li2(1/2)/2 + log(2)^2/4."""
    log2 = Polylog(1, Flip())
    return Mean(Polylog(2, Flip()), HALF_OF(And(log2, log2)))


def zeta2_machine() -> Expr:
    """int_0^1 log(1+w)/w dw = pi^2/12."""
    return Bind(Int1(Int1(Even(X))), ConstRational(1, 1))


def zeta4_machine() -> Expr:
    """Four nested integrators of 1/(1+x) at x = 1: 7 pi^4 / 720."""
    return Bind(Int1(Int1(Int1(Int1(Even(X))))), ConstRational(1, 1))
