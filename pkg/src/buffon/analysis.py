"""Ground truth for the samplers.

Two independent pieces live here:

* an exact engine for the probability generating function of the flip cost
  of the von Neumann schema (trie cost model), over rationals;
* a floating-point oracle giving the success probability denoted by any
  :class:`~buffon.combinators.Expr`, with integrators done by quadrature.

The oracle is vectorised over the value of ``x`` so that nested integrators
evaluate whole grids at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .bags import Int1
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
    Third,
    UnboundVariable,
    Var,
    any_var,
)
from .vonneumann import PermClass, Polylog, VNIter, VNValue
from .walks import BinomWalk, BistochGrammar, GrammarBernoulli, Rama, Sqrt1m, ogf_coefficients

# --- exact truncated power series -------------------------------------------


class RationalSeries:
    """Power series c_0 + c_1 q + ... + c_d q^d with exact rational coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence, order: int | None = None):
        cs = [Fraction(c) for c in coeffs]
        if order is not None:
            cs = (cs + [Fraction(0)] * (order + 1))[: order + 1]
        if not cs:
            raise ValueError("a series needs at least one coefficient")
        self.coeffs = cs

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def monomial(cls, k: int, order: int, c=1) -> "RationalSeries":
        cs = [Fraction(0)] * (order + 1)
        if k <= order:
            cs[k] = Fraction(c)
        return cls(cs)

    def _coerce(self, other) -> "RationalSeries":
        if isinstance(other, RationalSeries):
            if other.order != self.order:
                raise ValueError("series orders differ")
            return other
        return RationalSeries([other], self.order)

    def __add__(self, other):
        other = self._coerce(other)
        return RationalSeries([a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return RationalSeries([-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, RationalSeries):
            c = Fraction(other)
            return RationalSeries([a * c for a in self.coeffs])
        other = self._coerce(other)
        d = self.order
        out = [Fraction(0)] * (d + 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j in range(d + 1 - i):
                    out[i + j] += a * other.coeffs[j]
        return RationalSeries(out)

    __rmul__ = __mul__

    def reciprocal(self) -> "RationalSeries":
        c0 = self.coeffs[0]
        if c0 == 0:
            raise ZeroDivisionError("series has no reciprocal: zero constant term")
        d = self.order
        inv = [Fraction(0)] * (d + 1)
        inv[0] = 1 / c0
        for k in range(1, d + 1):
            acc = sum((self.coeffs[j] * inv[k - j] for j in range(1, k + 1)), Fraction(0))
            inv[k] = -acc / c0
        return RationalSeries(inv)

    def __truediv__(self, other):
        if isinstance(other, RationalSeries):
            return self * other.reciprocal()
        return self * (1 / Fraction(other))

    def __eq__(self, other):
        return isinstance(other, RationalSeries) and self.coeffs == other.coeffs

    def __call__(self, q):
        return sum(c * q**k for k, c in enumerate(self.coeffs))

    def derivative_at(self, q):
        return sum(k * c * q ** (k - 1) for k, c in enumerate(self.coeffs) if k)

    def __repr__(self):
        return f"RationalSeries([{', '.join(map(str, self.coeffs))}])"


@lru_cache(maxsize=None)
def _path_length_table(order: int) -> tuple[RationalSeries, ...]:
    one = RationalSeries([1], order)
    hs = [one, one]
    for n in range(2, order + 1):
        acc = RationalSeries([0], order)
        for k in range(1, n):
            acc = acc + hs[k] * hs[n - k] * math.comb(n, k)
        qn = RationalSeries.monomial(n, order)
        num = qn * acc * Fraction(1, 2**n)
        den = 1 - qn * Fraction(2, 2**n)
        hs.append(num / den)
    return tuple(hs)


def path_length_pgf(n: int, d: int) -> RationalSeries:
    """PGF in q of the path length of a trie built on n uniform keys, to order d.

    h_0 = h_1 = 1 and for n >= 2
    h_n = (q/2)^n sum_{k=1}^{n-1} C(n,k) h_k h_{n-k} / (1 - 2 (q/2)^n),
    which is the coefficient form of H(z,q) = H(zq/2, q)^2 + z(1-q).
    """
    if n < 0 or d < 0:
        raise ValueError("n and d must be nonnegative")
    if n <= 1:
        return RationalSeries([1], d)
    if n > d:
        # path length is at least n, nothing below q^{d+1}
        return RationalSeries([0], d)
    return _path_length_table(d)[n]


def cost_pgf(cls: PermClass, lam, d: int = 16) -> RationalSeries:
    """E(q^C) for the comparison flips of the schema, truncated at order d.

    Uses E(q^C) = H+ / (1 - H-) with
    H+ = (1-lam) sum P_n/n! h_n lam^n and H- = (1-lam) sum (1 - P_n/n!) h_n lam^n.
    Terms with n > d vanish below q^{d+1}, so the truncation is exact.
    """
    lam = Fraction(lam)
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    h_plus = RationalSeries([0], d)
    h_minus = RationalSeries([0], d)
    for n in range(d + 1):
        hn = path_length_pgf(n, d)
        w = (1 - lam) * lam**n
        dens = cls.density(n)
        h_plus = h_plus + hn * (w * dens)
        h_minus = h_minus + hn * (w * (1 - dens))
    return h_plus / (1 - h_minus)


def expected_path_length(n: int, tol: float = 1e-15) -> float:
    """Mean trie path length for n keys: n sum_k [1 - (1 - 2^-k)^(n-1)]."""
    if n <= 1:
        return 0.0
    total, k = 0.0, 0
    while True:
        term = 1.0 - (1.0 - 2.0**-k) ** (n - 1)
        total += term
        if term < tol and k > 0:
            return n * total
        k += 1


# --- exact evaluation of the rational fragment ------------------------------


def exact_value(e: Expr, x: Fraction | None = None) -> Fraction:
    """Exact success probability for machines built from rational operations."""
    if isinstance(e, Var):
        if x is None:
            raise ValueError("x is unbound")
        return Fraction(x)
    if isinstance(e, Flip):
        return Fraction(1, 2)
    if isinstance(e, Third):
        return Fraction(1, 3)
    if isinstance(e, ConstRational):
        return Fraction(e.a, e.b)
    if isinstance(e, Not):
        return 1 - exact_value(e.e, x)
    if isinstance(e, And):
        return exact_value(e.e1, x) * exact_value(e.e2, x)
    if isinstance(e, Or):
        p, q = exact_value(e.e1, x), exact_value(e.e2, x)
        return p + q - p * q
    if isinstance(e, Mean):
        return (exact_value(e.e1, x) + exact_value(e.e2, x)) / 2
    if isinstance(e, Cond):
        r = exact_value(e.r, x)
        return r * exact_value(e.p, x) + (1 - r) * exact_value(e.q, x)
    if isinstance(e, Even):
        return 1 / (1 + exact_value(e.e, x))
    if isinstance(e, Bind):
        return exact_value(e.body, exact_value(e.arg, x))
    raise TypeError(f"{type(e).__name__} has no exact rational value")


# --- floating-point oracle --------------------------------------------------


class UnsupportedKind(TypeError):
    pass


@dataclass(frozen=True)
class OracleValue:
    value: float
    error_bound: float

    def __float__(self):
        return self.value


QUAD_TOL = 1e-11
GAUSS_NODES = 48


def _romberg(f, tol: float, kmin: int = 3, kmax: int = 16):
    """Integrate f over [0, 1] by Richardson extrapolation of composite rules.

    Column one of the table is composite Simpson; refinement doubles the
    panel count until successive diagonal entries agree to ``tol``.
    ``f(u)`` returns ``(values, errors)`` of shape (batch, len(u)).
    """
    v, e = f(np.array([0.0, 1.0]))
    inner = e.max(axis=-1)
    trap = 0.5 * v.sum(axis=-1)
    prev = [trap]
    for k in range(1, kmax + 1):
        m = 1 << (k - 1)
        u = (2.0 * np.arange(m) + 1.0) / (2 * m)
        v, e = f(u)
        inner = np.maximum(inner, e.max(axis=-1))
        trap = 0.5 * trap + v.sum(axis=-1) / (2 * m)
        row = [trap]
        for j in range(1, k + 1):
            row.append(row[j - 1] + (row[j - 1] - prev[j - 1]) / (4**j - 1))
        err = np.abs(row[k] - prev[k - 1])
        prev = row
        if k >= kmin and np.all(err <= tol):
            break
    return row[k], err + inner


@lru_cache(maxsize=None)
def _gauss(n: int):
    t, w = np.polynomial.legendre.leggauss(n)
    return (t + 1.0) / 2.0, w / 2.0


def _gauss_rule(f, n: int = GAUSS_NODES):
    """Gauss-Legendre after u = t^2, which smooths sqrt(u)-type behaviour at 0."""
    t, w = _gauss(n)
    v, e = f(t * t)
    return v @ (2.0 * t * w), e.max(axis=-1)


def _propagate(fn, v, e):
    """Value of fn at v and a bound on its change over [v - e, v + e]."""
    val = fn(v)
    if not np.any(e):
        return val, np.zeros_like(val)
    lo = fn(np.clip(v - e, 0.0, 1.0))
    hi = fn(np.clip(v + e, 0.0, 1.0))
    return val, np.maximum(np.abs(lo - val), np.abs(hi - val))


def _vn_value_fn(cls: PermClass, a: int):
    dens_a = float(cls.density(a))
    low = 0 if cls in (PermClass.ALL, PermClass.SORTED, PermClass.ALTERNATING_EVEN) else 1
    at_zero = 1.0 if a == low else 0.0

    def fn(v):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = dens_a * v**a / _egf(cls, v)
        out = np.where(v == 0.0, at_zero, out)
        return np.nan_to_num(out, nan=0.0, posinf=0.0)

    return fn


def _egf(cls: PermClass, v):
    if cls is PermClass.ALL:
        return 1.0 / (1.0 - v)
    if cls is PermClass.SORTED:
        return np.exp(v)
    if cls is PermClass.RECORD_FIRST_MAX:
        return -np.log1p(-v)
    if cls is PermClass.ALTERNATING_EVEN:
        return 1.0 / np.cos(v)
    return np.tan(v)


def _vn_iter_fn(cls: PermClass, b: int):
    def fn(v):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            s = (1.0 - v) * _egf(cls, v)
        if cls is PermClass.RECORD_FIRST_MAX:
            s = np.where(v >= 1.0, 0.0, s)
        if cls is PermClass.ALL:
            s = np.ones_like(v)
        return s * (1.0 - s) ** (b - 1)

    return fn


def _series_sum(coef: np.ndarray, v: np.ndarray, step: int = 1):
    """(1 - v) * sum_n coef[n] v^(step n) with the tail bounded by v^(step N)."""
    n = np.arange(len(coef))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        powers = v[..., None] ** (step * n)
        total = (1.0 - v) * (powers * coef).sum(axis=-1)
        tail = v ** (step * len(coef))
    return total, tail


def _polylog_fn(r: int, terms: int = 4000):
    coef = 1.0 / np.arange(1, terms + 1, dtype=float) ** r

    def fn(v):
        val, _ = _series_sum(coef, v)
        return val

    def tail(v):
        return v**terms

    return fn, tail


@lru_cache(maxsize=None)
def _binom_coefs(t: int, terms: int) -> np.ndarray:
    n = np.arange(terms, dtype=float)
    logc = (
        np.vectorize(math.lgamma)(t * n + 1)
        - np.vectorize(math.lgamma)(n + 1)
        - np.vectorize(math.lgamma)((t - 1) * n + 1)
        - t * n * math.log(2.0)
    )
    return np.exp(logc)


@lru_cache(maxsize=None)
def _grammar_coefs(g: BistochGrammar, terms: int) -> np.ndarray:
    counts = ogf_coefficients(g, terms - 1)
    return np.array([float(Fraction(c, 2**k)) for k, c in enumerate(counts)])


def evaluate(e: Expr, xs, xerr=None, rule: str = "romberg"):
    """Vectorised oracle: ``(values, error bounds)`` of ``e`` at each x in ``xs``."""
    xs = np.asarray(xs, dtype=float)
    if xerr is None:
        xerr = np.zeros_like(xs)
    return _eval(e, xs, np.asarray(xerr, dtype=float), rule)


def _const(xs, c):
    return np.full_like(xs, c), np.zeros_like(xs)


def _eval(e: Expr, xs, xe, rule):
    if isinstance(e, Var):
        return xs, xe
    if isinstance(e, Flip):
        return _const(xs, 0.5)
    if isinstance(e, Third):
        return _const(xs, 1.0 / 3.0)
    if isinstance(e, ConstRational):
        return _const(xs, e.a / e.b)
    if isinstance(e, Rama):
        return _const(xs, 1.0 / math.pi)
    if isinstance(e, Not):
        v, er = _eval(e.e, xs, xe, rule)
        return 1.0 - v, er
    if isinstance(e, (And, Or, Mean)):
        v1, e1 = _eval(e.e1, xs, xe, rule)
        v2, e2 = _eval(e.e2, xs, xe, rule)
        if isinstance(e, And):
            return v1 * v2, e1 + e2
        if isinstance(e, Or):
            return v1 + v2 - v1 * v2, e1 + e2
        return 0.5 * (v1 + v2), 0.5 * (e1 + e2)
    if isinstance(e, Cond):
        r, er = _eval(e.r, xs, xe, rule)
        p, ep = _eval(e.p, xs, xe, rule)
        q, eq = _eval(e.q, xs, xe, rule)
        return r * p + (1.0 - r) * q, er + ep + eq
    if isinstance(e, Even):
        v, er = _eval(e.e, xs, xe, rule)
        return 1.0 / (1.0 + v), er
    if isinstance(e, Bind):
        v, er = _eval(e.arg, xs, xe, rule)
        return _eval(e.body, v, er, rule)
    if isinstance(e, VNValue):
        v, er = _eval(e.e, xs, xe, rule)
        return _propagate(_vn_value_fn(e.cls, e.a), v, er)
    if isinstance(e, VNIter):
        v, er = _eval(e.e, xs, xe, rule)
        return _propagate(_vn_iter_fn(e.cls, e.b), v, er)
    if isinstance(e, Polylog):
        v, er = _eval(e.e, xs, xe, rule)
        fn, tail = _polylog_fn(e.r)
        val, err = _propagate(fn, v, er)
        return val, err + tail(v)
    if isinstance(e, Sqrt1m):
        v, er = _eval(e.e, xs, xe, rule)
        return _propagate(lambda w: np.sqrt(np.clip(1.0 - w, 0.0, None)), v, er)
    if isinstance(e, BinomWalk):
        v, er = _eval(e.e, xs, xe, rule)
        coef = _binom_coefs(e.t, 2000 // e.t)
        fn = lambda w: _series_sum(coef, w, e.t)[0]  # noqa: E731
        val, err = _propagate(fn, v, er)
        # each term C(tn,n) 2^-tn <= 1, so the tail is at most v^(t * terms)
        return val, err + _series_sum(coef, v, e.t)[1]
    if isinstance(e, GrammarBernoulli):
        v, er = _eval(e.e, xs, xe, rule)
        coef = _grammar_coefs(e.g, 600)
        fn = lambda w: _series_sum(coef, w)[0]  # noqa: E731
        val, err = _propagate(fn, v, er)
        return val, err + _series_sum(coef, v)[1]
    if isinstance(e, Int1):
        return _eval_int1(e, xs, xe, rule)
    raise UnsupportedKind(f"no oracle for {type(e).__name__}")


def _eval_int1(e: Int1, xs, xe, rule):
    shape = xs.shape
    flat_x, flat_e = xs.reshape(-1), xe.reshape(-1)

    def f(u):
        grid = flat_x[:, None] * u[None, :]
        gerr = flat_e[:, None] * u[None, :]
        v, er = _eval(e.e, grid.reshape(-1), gerr.reshape(-1), rule)
        return v.reshape(grid.shape), er.reshape(grid.shape)

    if rule == "gauss":
        val, err = _gauss_rule(f)
    else:
        val, err = _romberg(f, QUAD_TOL)
    return val.reshape(shape), err.reshape(shape)


def oracle_value(e: Expr, binding: Expr | None = None, rule: str = "romberg") -> OracleValue:
    """Success probability of ``e`` with x bound to the closed ``binding``."""
    if binding is None and any_var(e):
        raise UnboundVariable("expression uses x but no binding was given")
    if binding is None:
        xs, xe = np.array([np.nan]), np.array([0.0])
    else:
        xs, xe = evaluate(binding, np.array([np.nan]), rule=rule)
    v, er = evaluate(e, xs, xe, rule=rule)
    return OracleValue(float(v[0]), float(er[0]))


# --- reference laws ---------------------------------------------------------


def li(r: int, z: float, tol: float = 1e-17) -> float:
    """Polylogarithm Li_r(z) for 0 <= z < 1 by direct summation."""
    total, n, zn = 0.0, 1, z
    while zn > tol:
        total += zn / n**r
        n += 1
        zn *= z
    return total


def law_pmf(kind: str, lam: float) -> Callable[[int], float]:
    """Reference pmf for ``poisson``, ``logarithmic`` and ``geometric``."""
    if kind == "poisson":
        return lambda r: math.exp(r * math.log(lam) - lam - math.lgamma(r + 1))
    if kind == "logarithmic":
        big_l = -math.log1p(-lam)
        return lambda r: lam**r / (r * big_l) if r >= 1 else 0.0
    if kind == "geometric":
        return lambda r: lam**r * (1.0 - lam)
    raise ValueError(f"unknown law {kind!r}")
