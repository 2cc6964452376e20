"""Ballot-walk machines: square root, {+(t-1), -1} bridges, grammars, 1/pi.

All walks keep a single signed counter; its magnitude plays the role of a
unary pushdown stack and its sign lives in the control flow.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .combinators import (
    Expr,
    Not,
    bernoulli_rational_bit,
    bernoulli_rational_rejection,
    geometric_count,
)
from .randbits import BitSource


def sqrt_walk(lam, src: BitSource) -> int:
    """Two +-1 steps per success of ``lam``; succeed iff the walk ends at 0."""
    delta = 0
    while lam():
        delta += 1 if src.flip() else -1
        delta += 1 if src.flip() else -1
    return int(delta == 0)


@dataclass(frozen=True)
class Sqrt1m(Expr):
    e: Expr

    def sample(self, src, x):
        e = self.e
        return sqrt_walk(lambda: e.sample(src, x), src)

    def children(self):
        return (self.e,)


def sqrt_one_minus(lam: Expr) -> Expr:
    return Sqrt1m(lam)


def sqrt0(lam: Expr) -> Expr:
    """sqrt(lambda), via sqrt(1 - (1 - lambda))."""
    return Sqrt1m(Not(lam))


@dataclass(frozen=True)
class BinomWalk(Expr):
    """One step per success of lambda: +(t-1) on heads, -1 on tails.

    Succeeds iff the walk returns to 0, which happens with probability
    (1 - lambda) * sum_n C(tn, n) (lambda/2)^(tn).
    """

    t: int
    e: Expr

    def __post_init__(self):
        if self.t < 2:
            raise ValueError("t must be >= 2")

    def sample(self, src, x):
        e = self.e
        up = self.t - 1
        delta = 0
        while e.sample(src, x):
            delta += up if src.flip() else -1
        return int(delta == 0)

    def children(self):
        return (self.e,)


def binom_walk(t: int, lam: Expr) -> Expr:
    return BinomWalk(t, lam)


# --- binary stochastic grammars ---------------------------------------------


class GrammarError(ValueError):
    pass


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class BistochGrammar:
    """One production X -> H m + T n per nonterminal.

    ``rules`` maps each nonterminal to ``(m, n)``; an alternative that is
    ``None`` is absent (reading that letter at X is a parse error).
    """

    axiom: str
    rules: tuple[tuple[str, tuple[str, ...] | None, tuple[str, ...] | None], ...]

    def __post_init__(self):
        names = [r[0] for r in self.rules]
        if len(set(names)) != len(names):
            raise GrammarError("a nonterminal has more than one production")
        if self.axiom not in names:
            raise GrammarError(f"axiom {self.axiom!r} has no production")
        defined = set(names)
        for name, m, n in self.rules:
            if name in ("H", "T") or not _IDENT.match(name):
                raise GrammarError(f"bad nonterminal name {name!r}")
            for alt in (m, n):
                for sym in alt or ():
                    if sym not in defined:
                        raise GrammarError(f"{sym!r} used in {name!r} but never defined")
        useless = defined - productive(self)
        if useless:
            raise GrammarError(
                "nonterminals derive no finite word: " + ", ".join(sorted(useless))
            )

    @property
    def table(self) -> dict[str, tuple[tuple[str, ...] | None, tuple[str, ...] | None]]:
        return {name: (m, n) for name, m, n in self.rules}

    def to_text(self, sep: str = "\n") -> str:
        lines = []
        for name, m, n in self.rules:
            alts = []
            if m is not None:
                alts.append(" ".join(("H",) + m))
            if n is not None:
                alts.append(" ".join(("T",) + n))
            lines.append(f"{name} -> {' | '.join(alts)}")
        return sep.join(lines)

    def __str__(self):
        return self.to_text()


def productive(g: BistochGrammar) -> set[str]:
    """Least fixpoint of the nonterminals that derive some finite word."""
    good: set[str] = set()
    changed = True
    while changed:
        changed = False
        for name, m, n in g.rules:
            if name in good:
                continue
            if any(alt is not None and all(s in good for s in alt) for alt in (m, n)):
                good.add(name)
                changed = True
    return good


def parse_grammar(text: str) -> BistochGrammar:
    """Parse ``X -> H A B | T`` lines (or ``;``-separated); ``#`` starts a comment.

    The first nonterminal defined is the axiom.
    """
    rules = []
    for lineno, raw in enumerate(re.split(r"[\n;]", text), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise GrammarError(f"production {lineno}: expected '->' in {line!r}")
        lhs, rhs = (s.strip() for s in line.split("->", 1))
        alts: dict[str, tuple[str, ...]] = {}
        for alt in rhs.split("|"):
            syms = alt.split()
            if not syms or syms[0] not in ("H", "T"):
                raise GrammarError(
                    f"production {lineno}: each alternative must start with H or T, got {alt.strip()!r}"
                )
            if syms[0] in alts:
                raise GrammarError(f"production {lineno}: two alternatives start with {syms[0]}")
            if any(s in ("H", "T") for s in syms[1:]):
                raise GrammarError(f"production {lineno}: terminal inside {alt.strip()!r}")
            alts[syms[0]] = tuple(syms[1:])
        rules.append((lhs, alts.get("H"), alts.get("T")))
    if not rules:
        raise GrammarError("empty grammar")
    return BistochGrammar(rules[0][0], tuple(rules))


class _Parser:
    """Deterministic pushdown recognizer fed one letter at a time (H=1, T=0)."""

    __slots__ = ("table", "stack", "dead")

    def __init__(self, g: BistochGrammar):
        self.table = g.table
        self.stack = [g.axiom]
        self.dead = False

    def feed(self, heads: int) -> bool:
        if self.dead or not self.stack:
            self.dead = True
            return False
        alt = self.table[self.stack.pop()][0 if heads else 1]
        if alt is None:
            self.dead = True
            return False
        self.stack.extend(reversed(alt))
        return True

    def accepted(self) -> bool:
        return not self.dead and not self.stack


def grammar_membership(g: BistochGrammar, word: Sequence[str] | str) -> int:
    p = _Parser(g)
    for ch in word:
        if ch not in ("H", "T"):
            raise ValueError(f"letters must be H or T, got {ch!r}")
        if not p.feed(ch == "H"):
            return 0
    return int(p.accepted())


def ogf_coefficients(g: BistochGrammar, order: int, symbol: str | None = None) -> list[int]:
    """Counts S_0..S_order of words of each length, by fixed-point iteration
    on the truncated system X = z*prod(m) + z*prod(n)."""
    table = g.table
    series = {name: [0] * (order + 1) for name in table}

    def mul(a, b):
        out = [0] * (order + 1)
        for i, ai in enumerate(a):
            if ai:
                for j in range(order + 1 - i):
                    out[i + j] += ai * b[j]
        return out

    # each pass fixes at least one more coefficient
    for _ in range(order + 1):
        new = {}
        for name, (m, n) in table.items():
            acc = [0] * (order + 1)
            for alt in (m, n):
                if alt is None:
                    continue
                prod = [1] + [0] * order
                for s in alt:
                    prod = mul(prod, series[s])
                for k in range(order):
                    acc[k + 1] += prod[k]
            new[name] = acc
        if new == series:
            break
        series = new
    return series[symbol or g.axiom]


@dataclass(frozen=True)
class GrammarBernoulli(Expr):
    """N ~ Geo(lambda) uniform letters; succeed iff the word is in the language.

    Letters are drawn and parsed one at a time; once the parse has failed
    the answer is 0 and no further letters are drawn.
    """

    g: BistochGrammar
    e: Expr

    def sample(self, src, x):
        e = self.e
        p = _Parser(self.g)
        while e.sample(src, x):
            if not p.feed(src.flip()):
                return 0
        return int(p.accepted())

    def children(self):
        return (self.e,)


def grammar_bernoulli(g: BistochGrammar, lam: Expr) -> Expr:
    return GrammarBernoulli(g, lam)


LUKASIEWICZ_BINARY = parse_grammar("D -> H D D | T")
LUKASIEWICZ_TERNARY = parse_grammar("Y -> H Y Y Y | T")
DYCK_RETURN = parse_grammar(
    """
    # first returns of a +-1 walk to zero, either sign
    S -> H Dn | T Up
    Up -> H | T Up Up
    Dn -> H Dn Dn | T
    """
)
SHIPPED_GRAMMARS = {
    "lukasiewicz2": LUKASIEWICZ_BINARY,
    "lukasiewicz3": LUKASIEWICZ_TERNARY,
    "first_return": DYCK_RETURN,
}


# --- Ramanujan's 1/pi -------------------------------------------------------


@dataclass(frozen=True)
class Rama(Expr):
    """Succeeds with probability exactly 1/pi.

    T = X1 + X2 with X1, X2 ~ Geo(1/4), plus one with probability 5/9; then
    three independent runs of 2T fair steps must each end balanced.
    ``five_ninths`` picks how the 5/9 coin is made: ``"binary"`` uses the
    binary-expansion machine, ``"rejection"`` a uniform integer below 9.
    """

    five_ninths: str = "binary"

    def __post_init__(self):
        if self.five_ninths not in ("binary", "rejection"):
            raise ValueError("five_ninths must be 'binary' or 'rejection'")

    def sample(self, src, x):
        quarter = lambda: bernoulli_rational_bit(1, 4, src)  # noqa: E731
        t = geometric_count(quarter) + geometric_count(quarter)
        if self.five_ninths == "binary":
            t += bernoulli_rational_bit(5, 9, src)
        else:
            t += bernoulli_rational_rejection(5, 9, src)
        for _ in range(3):
            delta = 0
            for _ in range(2 * t):
                delta += 1 if src.flip() else -1
            if delta:
                return 0
        return 1


def rama_inv_pi() -> Expr:
    return Rama()
