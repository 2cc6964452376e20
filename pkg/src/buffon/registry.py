"""Named closed machines."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bags import (
    Int1,
    asin_half_machine,
    erf_int_machine,
    machin_quarter_pi,
    mgl_quarter_pi,
    pi2_over_24,
    pi_eighth,
    zeta2_machine,
    zeta4_machine,
)
from .combinators import And, Bind, ConstRational, Expr, Flip, Mean, Not, Var
from .vonneumann import ExpNeg, PermClass, Polylog, VNValue, theorem4_machine
from .walks import Rama, Sqrt1m


@dataclass(frozen=True)
class Entry:
    expr: Expr
    description: str
    weak: bool = False


def _stress() -> Expr:
    # nested exp / square root / integrator, with truth from the oracle only
    x = Var()
    inner = And(x, Int1(ExpNeg(Sqrt1m(Not(x)))))
    return Bind(ExpNeg(Mean(Polylog(3, Flip()), Sqrt1m(Not(inner)))), Flip())


REGISTRY: dict[str, Entry] = {
    "mgl": Entry(mgl_quarter_pi(), "pi/4 as arctan(1), one bag; infinite mean cost", weak=True),
    "machin": Entry(machin_quarter_pi(), "pi/4 = atan(1/2) + atan(1/3)"),
    "pi8": Entry(pi_eighth(), "pi/8, mean of atan(1/2) and atan(1/3)"),
    "rama": Entry(Rama(), "1/pi from three balanced walks"),
    "li1half": Entry(Polylog(1, Flip()), "Li1(1/2) = log 2"),
    "li2half": Entry(Polylog(2, Flip()), "Li2(1/2) = pi^2/12 - log(2)^2/2"),
    "li3half": Entry(Polylog(3, Flip()), "Li3(1/2)"),
    "pi2over24": Entry(pi2_over_24(), "pi^2/24 = Li2(1/2)/2 + log(2)^2/4"),
    "zeta2": Entry(zeta2_machine(), "pi^2/12, two nested integrators of 1/(1+x) at 1"),
    "zeta4": Entry(zeta4_machine(), "7 pi^4/720, four nested integrators of 1/(1+x) at 1"),
    "asin_half_at_half": Entry(Bind(asin_half_machine(), Flip()), "arcsin(1/2)/2 = pi/12"),
    "erf1": Entry(Bind(erf_int_machine(), ConstRational(1, 1)), "int_0^1 exp(-w^2/2) dw"),
    "exp_neg_half": Entry(theorem4_machine("exp_x_minus_1", Flip()), "e^{x-1} at x = 1/2"),
    "poisson_zero": Entry(VNValue(PermClass.SORTED, 0, Flip()), "P(Poisson(1/2) = 0) = e^{-1/2}"),
    "exp_neg_one": Entry(And(ExpNeg(Flip()), ExpNeg(Flip())), "e^{-1}"),
    "inv_sqrt2": Entry(Sqrt1m(Not(Flip())), "1/sqrt(2)"),
    "cos_quarter": Entry(theorem4_machine("cos", ConstRational(1, 4)), "cos(1/4)"),
    "stress": Entry(_stress(), "nested expn/sqrt0/int1 soak machine"),
}

# closed forms, for display only; tests keep their own reference values
CLOSED_FORMS: dict[str, float] = {
    "mgl": math.pi / 4,
    "machin": math.pi / 4,
    "pi8": math.pi / 8,
    "rama": 1 / math.pi,
    "li1half": math.log(2),
    "li2half": math.pi**2 / 12 - math.log(2) ** 2 / 2,
    "pi2over24": math.pi**2 / 24,
    "zeta2": math.pi**2 / 12,
    "zeta4": 7 * math.pi**4 / 720,
    "asin_half_at_half": math.pi / 12,
    "exp_neg_half": math.exp(-0.5),
    "poisson_zero": math.exp(-0.5),
    "exp_neg_one": math.exp(-1),
    "inv_sqrt2": 1 / math.sqrt(2),
    "cos_quarter": math.cos(0.25),
}


def named(name: str) -> Expr:
    try:
        return REGISTRY[name].expr
    except KeyError:
        raise KeyError(f"unknown machine {name!r}; available: {', '.join(sorted(REGISTRY))}") from None
