"""Base Bernoulli algebra.

An :class:`Expr` is an immutable description of a machine with one free
variable ``x``.  Sampling walks the tree: ``node.sample(src, x)`` returns one
bit, where ``x`` is a zero-argument callable producing Bernoulli(lambda)
bits for the current binding of the free variable.  Nothing here touches
floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .randbits import BitSource, BudgetExceeded

Lam = Callable[[], int]


class UnboundVariable(Exception):
    pass


class Expr:
    """Base class of all machine nodes."""

    __slots__ = ()

    def sample(self, src: BitSource, x: Lam | None) -> int:
        raise NotImplementedError

    def children(self) -> tuple["Expr", ...]:
        return ()

    def is_closed(self) -> bool:
        return not any_var(self)

    def __str__(self) -> str:
        from .dsl import to_dsl

        return to_dsl(self)


def any_var(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, Bind):
        return any_var(e.arg)
    return any(any_var(c) for c in e.children())


@dataclass(frozen=True)
class SampleResult:
    value: int
    flips: int
    censored: bool = False


# --- leaves -----------------------------------------------------------------


@dataclass(frozen=True)
class Var(Expr):
    def sample(self, src, x):
        if x is None:
            raise UnboundVariable("free variable x has no binding")
        return x()


@dataclass(frozen=True)
class Flip(Expr):
    def sample(self, src, x):
        return src.flip()


@dataclass(frozen=True)
class ConstRational(Expr):
    a: int
    b: int

    def __post_init__(self):
        if self.b <= 0 or not 0 <= self.a <= self.b:
            raise ValueError(f"const({self.a}/{self.b}) is not in [0, 1]")

    def sample(self, src, x):
        return bernoulli_rational_bit(self.a, self.b, src)


@dataclass(frozen=True)
class Third(Expr):
    """Bernoulli(1/3) from pairs of flips (11 wins, 01/10 lose, 00 retries)."""

    def sample(self, src, x):
        return bernoulli_third_bit(src)


# --- boolean compositions ---------------------------------------------------


@dataclass(frozen=True)
class Not(Expr):
    e: Expr

    def sample(self, src, x):
        return 1 - self.e.sample(src, x)

    def children(self):
        return (self.e,)


@dataclass(frozen=True)
class And(Expr):
    e1: Expr
    e2: Expr

    def sample(self, src, x):
        if self.e1.sample(src, x):
            return self.e2.sample(src, x)
        return 0

    def children(self):
        return (self.e1, self.e2)


@dataclass(frozen=True)
class Or(Expr):
    e1: Expr
    e2: Expr

    def sample(self, src, x):
        if self.e1.sample(src, x):
            return 1
        return self.e2.sample(src, x)

    def children(self):
        return (self.e1, self.e2)


@dataclass(frozen=True)
class Mean(Expr):
    e1: Expr
    e2: Expr

    def sample(self, src, x):
        if src.flip():
            return self.e1.sample(src, x)
        return self.e2.sample(src, x)

    def children(self):
        return (self.e1, self.e2)


@dataclass(frozen=True)
class Cond(Expr):
    r: Expr
    p: Expr
    q: Expr

    def sample(self, src, x):
        if self.r.sample(src, x):
            return self.p.sample(src, x)
        return self.q.sample(src, x)

    def children(self):
        return (self.r, self.p, self.q)


@dataclass(frozen=True)
class Even(Expr):
    """p -> 1/(1+p): succeed iff the run of successes before the first failure is even."""

    e: Expr

    def sample(self, src, x):
        e = self.e
        while True:
            if not e.sample(src, x):
                return 1
            if not e.sample(src, x):
                return 0

    def children(self):
        return (self.e,)


@dataclass(frozen=True)
class Bind(Expr):
    """Composition: run ``body`` with its free variable fed by ``arg``.

    ``arg`` itself is evaluated under the enclosing binding, so ``Bind``
    realizes body(arg(lambda)).
    """

    body: Expr
    arg: Expr

    def sample(self, src, x):
        arg = self.arg
        return self.body.sample(src, lambda: arg.sample(src, x))

    def children(self):
        return (self.body, self.arg)


def Sq(e: Expr) -> Expr:
    """Squaring is a conjunction of two independent calls."""
    return And(e, e)


def even_parity(e: Expr) -> Expr:
    return Even(e)


# --- primitive samplers -----------------------------------------------------


def geometric_count(lam: Lam) -> int:
    """Number of successes of ``lam`` before its first failure: Geo(lambda)."""
    k = 0
    while lam():
        k += 1
    return k


def geo_half(src: BitSource) -> int:
    k = 0
    while not src.flip():
        k += 1
    return k


def bernoulli_rational_bit(a: int, b: int, src: BitSource) -> int:
    """Return bit Z of a/b with Z = 1 + Geo(1/2), by long division on demand.

    Each round produces the next binary digit of a/b and one flip decides
    whether the geometric index stops there.  Once the remainder hits zero
    the rest of the expansion is zeros and the answer is known.
    """
    if a == b:
        return 1
    if a == 0:
        return 0
    r = a
    while True:
        r <<= 1
        if r >= b:
            r -= b
            bit = 1
        else:
            bit = 0
        if src.flip():
            return bit
        if r == 0:
            return 0


def binary_digits(a: int, b: int, count: int) -> list[int]:
    """First ``count`` binary digits of a/b (a/b = 1 gives 1, 1, 1, ...)."""
    if a == b:
        return [1] * count
    out = []
    r = a
    for _ in range(count):
        r <<= 1
        if r >= b:
            r -= b
            out.append(1)
        else:
            out.append(0)
    return out


def bernoulli_third_bit(src: BitSource) -> int:
    while True:
        a = src.flip()
        b = src.flip()
        if a and b:
            return 1
        if a or b:
            return 0


def bernoulli_rational_rejection(a: int, b: int, src: BitSource) -> int:
    """Bernoulli(a/b) by drawing a uniform integer below b with rejection.

    Used as an independent exact alternative to the binary-expansion machine.
    """
    if a == b:
        return 1
    if a == 0:
        return 0
    nbits = (b - 1).bit_length()
    while True:
        v = 0
        for _ in range(nbits):
            v = (v << 1) | src.flip()
        if v < b:
            return 1 if v < a else 0


# --- public sampling entry points -------------------------------------------


def _measure(src: BitSource, budget: int | None, fn: Callable[[], int]) -> SampleResult:
    start = src.flip_count
    if budget is not None:
        src.limit = start + budget
    try:
        value = fn()
    except BudgetExceeded:
        return SampleResult(0, src.flip_count - start, censored=True)
    finally:
        src.limit = None
    return SampleResult(value, src.flip_count - start)


def lam_of(binding: Expr | None, src: BitSource) -> Lam | None:
    if binding is None:
        return None
    if not binding.is_closed():
        raise UnboundVariable("binding must be a closed expression")
    return lambda: binding.sample(src, None)


def sample_bernoulli(
    e: Expr, binding: Expr | None, src: BitSource, budget: int | None = None
) -> SampleResult:
    """Draw one Bernoulli(phi(lambda)) sample of ``e`` with x bound to ``binding``."""
    x = lam_of(binding, src)
    return _measure(src, budget, lambda: e.sample(src, x))


def geometric(e: Expr, binding: Expr | None, src: BitSource, budget: int | None = None) -> SampleResult:
    x = lam_of(binding, src)
    return _measure(src, budget, lambda: geometric_count(lambda: e.sample(src, x)))


def bernoulli_rational(a: int, b: int, src: BitSource) -> SampleResult:
    if b < 1 or not 0 <= a <= b:
        raise ValueError(f"need 0 <= a <= b and b >= 1, got {a}/{b}")
    return _measure(src, None, lambda: bernoulli_rational_bit(a, b, src))


def bernoulli_third_markov(src: BitSource) -> SampleResult:
    return _measure(src, None, lambda: bernoulli_third_bit(src))
