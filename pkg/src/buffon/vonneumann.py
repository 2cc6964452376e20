"""Von Neumann schema over permutation classes, and the machines built on it.

A trial draws N ~ Geo(lambda) and then N lazily revealed uniforms; the trial
succeeds when their order type lies in the class.  The accepted N follows
P_n lambda^n / (n! P(lambda)).  Order types are checked in a streaming way
with a single string register holding the bits revealed so far of one
uniform, so no trie is ever materialised.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .combinators import Expr, Lam, Not, geometric_count
from .randbits import BitSource

FRESH_LESS = 0
FRESH_GREATER = 1


class UniformRegister:
    """Revealed prefix of the binary expansion of one uniform real."""

    __slots__ = ("bits",)

    def __init__(self, bits: list[int] | None = None):
        self.bits = [] if bits is None else bits

    def __repr__(self):
        return "UniformRegister(" + "".join(map(str, self.bits)) + ")"


def compare_fresh(reg: UniformRegister, src: BitSource) -> tuple[int, list[int]]:
    """Compare a fresh uniform V with the register's U, bit by bit.

    Returns ``(FRESH_LESS or FRESH_GREATER, revealed bits of V)``.  The
    register only grows, up to the first position where U and V differ.
    """
    bits = reg.bits
    fresh = []
    i = 0
    while True:
        if i < len(bits):
            u = bits[i]
        else:
            u = src.flip()
            bits.append(u)
        v = src.flip()
        fresh.append(v)
        if u != v:
            return (FRESH_GREATER if v else FRESH_LESS), fresh
        i += 1


@lru_cache(maxsize=None)
def zigzag(n: int) -> int:
    """Number of alternating permutations of size n (Euler zigzag numbers)."""
    # Seidel's boustrophedon triangle
    row = [1]
    for _ in range(n):
        nxt = [0]
        for v in reversed(row):
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[-1]


def _accept_sorted(n: int, src: BitSource) -> bool:
    if n <= 1:
        return True
    reg = UniformRegister()
    for _ in range(n - 1):
        outcome, fresh = compare_fresh(reg, src)
        if outcome == FRESH_LESS:
            return False
        reg = UniformRegister(fresh)
    return True


def _accept_record_first(n: int, src: BitSource) -> bool:
    if n == 0:
        return False
    reg = UniformRegister()
    for _ in range(n - 1):
        if compare_fresh(reg, src)[0] == FRESH_GREATER:
            return False
    return True


def _accept_alternating(n: int, src: BitSource) -> bool:
    # U1 < U2 > U3 < U4 ...
    reg = UniformRegister()
    want = FRESH_GREATER
    for _ in range(n - 1):
        outcome, fresh = compare_fresh(reg, src)
        if outcome != want:
            return False
        reg = UniformRegister(fresh)
        want = 1 - want
    return True


class PermClass(enum.Enum):
    ALL = "all"
    SORTED = "sorted"
    RECORD_FIRST_MAX = "recordmax"
    ALTERNATING_EVEN = "alteven"
    ALTERNATING_ODD = "altodd"

    def accepts(self, n: int, src: BitSource) -> bool:
        """Streaming membership test for n fresh uniforms."""
        if self is PermClass.ALL:
            return True
        if self is PermClass.SORTED:
            return _accept_sorted(n, src)
        if self is PermClass.RECORD_FIRST_MAX:
            return _accept_record_first(n, src)
        if self is PermClass.ALTERNATING_EVEN:
            return n % 2 == 0 and _accept_alternating(n, src)
        return n % 2 == 1 and _accept_alternating(n, src)

    def count(self, n: int) -> int:
        """P_n, the number of size-n permutations in the class."""
        if self is PermClass.ALL:
            return math.factorial(n)
        if self is PermClass.SORTED:
            return 1
        if self is PermClass.RECORD_FIRST_MAX:
            return math.factorial(n - 1) if n >= 1 else 0
        if self is PermClass.ALTERNATING_EVEN:
            return zigzag(n) if n % 2 == 0 else 0
        return zigzag(n) if n % 2 == 1 else 0

    def density(self, n: int) -> Fraction:
        """P_n / n!, the acceptance probability of a length-n trial."""
        return Fraction(self.count(n), math.factorial(n))

    def egf(self, lam: float) -> float:
        if self is PermClass.ALL:
            return 1.0 / (1.0 - lam)
        if self is PermClass.SORTED:
            return math.exp(lam)
        if self is PermClass.RECORD_FIRST_MAX:
            return -math.log1p(-lam)
        if self is PermClass.ALTERNATING_EVEN:
            return 1.0 / math.cos(lam)
        return math.tan(lam)


@dataclass
class VNOutcome:
    value: int
    trials: int
    geo_flips: int = 0
    test_flips: int = 0


def vn_run(cls: PermClass, lam: Lam, src: BitSource, max_trials: int | None = None) -> VNOutcome:
    """Run the schema until a trial is accepted (or ``max_trials`` fail).

    On giving up, ``value`` is -1.  Flips spent inside the geometric draw
    are kept apart from the comparison flips.
    """
    out = VNOutcome(-1, 0)
    while max_trials is None or out.trials < max_trials:
        out.trials += 1
        c0 = src.flip_count
        n = geometric_count(lam)
        c1 = src.flip_count
        ok = cls.accepts(n, src)
        out.geo_flips += c1 - c0
        out.test_flips += src.flip_count - c1
        if ok:
            out.value = n
            return out
    return out


def vn_variate(cls: PermClass, lam: Lam, src: BitSource) -> int:
    return vn_run(cls, lam, src).value


def vn_iterations_stat(cls: PermClass, lam: float) -> float:
    """Expected number of trials, 1/s with s = (1 - lambda) P(lambda)."""
    s = (1.0 - lam) * cls.egf(lam)
    if not 0.0 < s <= 1.0 + 1e-12:
        raise ValueError(f"trial success rate {s} outside (0, 1]")
    return 1.0 / s


def vn_law(cls: PermClass, lam: float, n: int) -> float:
    """P(N = n) for the accepted value."""
    return float(cls.density(n)) * lam**n / cls.egf(lam)


# --- Bernoulli machines -----------------------------------------------------


@dataclass(frozen=True)
class VNValue(Expr):
    """Success iff the schema returns N = a."""

    cls: PermClass
    a: int
    e: Expr

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("a must be >= 0")

    def sample(self, src, x):
        e = self.e
        return int(vn_run(self.cls, lambda: e.sample(src, x), src).value == self.a)

    def children(self):
        return (self.e,)


@dataclass(frozen=True)
class VNIter(Expr):
    """Success iff the schema needs exactly b trials."""

    cls: PermClass
    b: int
    e: Expr

    def __post_init__(self):
        if self.b < 1:
            raise ValueError("b must be >= 1")

    def sample(self, src, x):
        e = self.e
        out = vn_run(self.cls, lambda: e.sample(src, x), src, max_trials=self.b)
        return int(out.value >= 0 and out.trials == self.b)

    def children(self):
        return (self.e,)


def vn_value_bernoulli(cls: PermClass, a: int, lam: Expr) -> Expr:
    return VNValue(cls, a, lam)


def vn_iter_bernoulli(cls: PermClass, b: int, lam: Expr) -> Expr:
    return VNIter(cls, b, lam)


def ExpNeg(e: Expr) -> Expr:
    return VNValue(PermClass.SORTED, 0, e)


@dataclass(frozen=True)
class Polylog(Expr):
    """((1-lambda)/lambda) Li_r(lambda): N = 1 + Geo(lambda), then r
    independent first-is-maximum tests on N uniforms must all pass."""

    r: int
    e: Expr

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be >= 1")

    def sample(self, src, x):
        e = self.e
        n = 1 + geometric_count(lambda: e.sample(src, x))
        for _ in range(self.r):
            if not _accept_record_first(n, src):
                return 0
        return 1

    def children(self):
        return (self.e,)


def polylog_bernoulli(r: int, lam: Expr) -> Expr:
    return Polylog(r, lam)


_S, _R = PermClass.SORTED, PermClass.RECORD_FIRST_MAX
_AE, _AO = PermClass.ALTERNATING_EVEN, PermClass.ALTERNATING_ODD

# name -> (builder, flip input?, closed form)
THEOREM4: dict[str, tuple[str, PermClass, int, bool]] = {
    "exp_neg": ("value", _S, 0, False),  # e^{-x}
    "exp_x_minus_1": ("value", _S, 0, True),  # e^{x-1}
    "one_minus_x_exp_x": ("iter", _S, 1, False),  # (1-x) e^x
    "x_exp_one_minus_x": ("iter", _S, 1, True),  # x e^{1-x}
    "x_over_log": ("value", _R, 1, False),  # x / log(1/(1-x))
    "one_minus_x_over_log": ("value", _R, 1, True),  # (1-x) / log(1/x)
    "one_minus_x_log": ("iter", _R, 1, False),  # (1-x) log(1/(1-x))
    "x_log_inv_x": ("iter", _R, 1, True),  # x log(1/x)
    "cos": ("value", _AE, 0, False),  # cos x
    "one_minus_x_over_cos": ("iter", _AE, 1, False),  # (1-x)/cos x
    "x_over_tan": ("value", _AO, 1, False),  # x / tan x
    "one_minus_x_tan": ("iter", _AO, 1, False),  # (1-x) tan x
}


def theorem4_machine(name: str, arg: Expr) -> Expr:
    """Exp/log/trig machine by name, applied to ``arg``."""
    try:
        kind, cls, k, flip_input = THEOREM4[name]
    except KeyError:
        raise KeyError(f"unknown function {name!r}; known: {', '.join(THEOREM4)}") from None
    inp = Not(arg) if flip_input else arg
    if kind == "value":
        return VNValue(cls, k, inp)
    return VNIter(cls, k, inp)
