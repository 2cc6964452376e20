from __future__ import annotations

import itertools
import math

import pytest
from scipy.stats import chi2_contingency

from buffon.analysis import oracle_value
from buffon.combinators import ConstRational, Flip, Not
from buffon.randbits import make_source
from buffon.walks import (
    DYCK_RETURN,
    LUKASIEWICZ_BINARY,
    LUKASIEWICZ_TERNARY,
    SHIPPED_GRAMMARS,
    BinomWalk,
    GrammarBernoulli,
    GrammarError,
    Rama,
    Sqrt1m,
    grammar_membership,
    ogf_coefficients,
    parse_grammar,
    sqrt0,
    sqrt_walk,
)
from conftest import band, rate


@pytest.mark.parametrize("a,b", [(1, 4), (1, 2), (3, 4)])
def test_sqrt_one_minus(a, b, assert_rate):
    target = math.sqrt(1 - a / b)
    assert math.isclose(oracle_value(Sqrt1m(ConstRational(a, b))).value, target, rel_tol=1e-12)
    assert_rate(Sqrt1m(ConstRational(a, b)), None, target, n=50_000, seed=a * 10 + b)


def test_sqrt_walk_cost():
    # lambda comes from its own source so the walk's flips are counted alone
    lam_src, src = make_source(1), make_source(2)
    n = 50_000
    for _ in range(n):
        sqrt_walk(lam_src.flip, src)
    assert abs(src.flip_count / n - 2.0) < 0.1


def test_sqrt_near_zero():
    assert oracle_value(Sqrt1m(ConstRational(1, 10**9))).value == pytest.approx(1, abs=1e-8)
    src = make_source(1)
    assert sqrt_walk(lambda: 0, src) == 1 and src.flip_count == 0


def test_sqrt0(assert_rate):
    assert_rate(sqrt0(ConstRational(1, 4)), None, 0.5)


def _binom_reference(t, lam, terms=40):
    return (1 - lam) * sum(math.comb(t * n, n) * (lam / 2) ** (t * n) for n in range(terms))


@pytest.mark.parametrize("t", [2, 3, 4])
def test_binom_walk(t, assert_rate):
    target = _binom_reference(t, 0.5)
    assert math.isclose(oracle_value(BinomWalk(t, Flip())).value, target, rel_tol=1e-12)
    assert_rate(BinomWalk(t, Flip()), None, target)


def test_binom_walk_values():
    assert _binom_reference(3, 0.5) == pytest.approx(0.52544, abs=1e-5)
    # t = 2 with one step per lambda-success gives sqrt((1 - lam)/(1 + lam))
    assert _binom_reference(2, 0.5) == pytest.approx(math.sqrt(1 / 3), abs=1e-12)
    assert oracle_value(BinomWalk(5, ConstRational(1, 10**9))).value == pytest.approx(1, abs=1e-8)


def test_membership_examples():
    g = LUKASIEWICZ_TERNARY
    assert grammar_membership(g, "T") == 1
    assert grammar_membership(g, "HTTT") == 1
    assert grammar_membership(g, "HT") == 0
    assert grammar_membership(g, "TT") == 0
    assert grammar_membership(g, "") == 0


def test_membership_rejects_other_letters():
    with pytest.raises(ValueError):
        grammar_membership(LUKASIEWICZ_BINARY, "HX")


def _counts_by_dp(g, order):
    # words of X of length N: one letter, then a split of N - 1 among the alternative's symbols
    table = g.table
    memo: dict = {}

    def words(sym, n):
        key = (sym, n)
        if key not in memo:
            memo[key] = 0
            total = 0
            for alt in table[sym]:
                if alt is not None:
                    total += seq(alt, n - 1)
            memo[key] = total
        return memo[key]

    def seq(syms, n):
        if n < 0:
            return 0
        if not syms:
            return int(n == 0)
        return sum(words(syms[0], k) * seq(syms[1:], n - k) for k in range(1, n + 1))

    return [words(g.axiom, n) if n else 0 for n in range(order + 1)]


@pytest.mark.parametrize("name", sorted(SHIPPED_GRAMMARS))
def test_exhaustive_vs_series(name):
    g = SHIPPED_GRAMMARS[name]
    series = ogf_coefficients(g, 10)
    assert series == _counts_by_dp(g, 10)
    for n in range(11):
        accepted = sum(grammar_membership(g, w) for w in itertools.product("HT", repeat=n))
        assert accepted == series[n]


def test_known_counts():
    # Catalan numbers on odd lengths, Fuss-Catalan for the ternary tree grammar
    assert ogf_coefficients(LUKASIEWICZ_BINARY, 9) == [0, 1, 0, 1, 0, 2, 0, 5, 0, 14]
    assert ogf_coefficients(LUKASIEWICZ_TERNARY, 10) == [0, 1, 0, 0, 1, 0, 0, 3, 0, 0, 12]
    assert ogf_coefficients(DYCK_RETURN, 8) == [0, 0, 2, 0, 2, 0, 4, 0, 10]


def test_grammar_bernoulli_binary(assert_rate):
    # (1 - lam) S(lam/2) with S(z) = (1 - sqrt(1 - 4 z^2)) / (2 z)
    z = 0.25
    target = 0.5 * (1 - math.sqrt(1 - 4 * z * z)) / (2 * z)
    e = GrammarBernoulli(LUKASIEWICZ_BINARY, Flip())
    assert math.isclose(oracle_value(e).value, target, rel_tol=1e-12)
    assert_rate(e, None, target)


def test_grammar_bernoulli_first_return(assert_rate):
    # first return to zero of a fair walk: S(z) = 1 - sqrt(1 - 4 z^2)
    lam = 2 / 3
    target = (1 - lam) * (1 - math.sqrt(1 - lam * lam))
    e = GrammarBernoulli(DYCK_RETURN, ConstRational(2, 3))
    assert math.isclose(oracle_value(e).value, target, rel_tol=1e-12)
    assert_rate(e, None, target)


def test_grammar_stops_early():
    # with lambda = 1 the word never ends on its own; the parse failure ends it
    src = make_source(3)
    e = GrammarBernoulli(parse_grammar("A -> T"), ConstRational(1, 1))
    assert [e.sample(src, None) for _ in range(10)] == [0] * 10
    assert src.flip_count <= 20


def test_text_round_trip():
    for g in SHIPPED_GRAMMARS.values():
        assert parse_grammar(g.to_text()) == g
        assert parse_grammar(g.to_text("; ")) == g


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("", "empty"),
        ("A -> H B", "never defined"),
        ("A -> H A", "derive no finite word"),
        ("A -> T; A -> H", "more than one"),
        ("A = T", "expected '->'"),
        ("A -> X", "must start with H or T"),
        ("A -> T | T A", "two alternatives"),
        ("A -> H T", "terminal inside"),
    ],
)
def test_bad_grammars(text, fragment):
    with pytest.raises(GrammarError, match=fragment):
        parse_grammar(text)


def test_rama_variants_agree():
    n = 40_000
    a = rate(Rama("binary"), n=n, seed=5)
    b = rate(Rama("rejection"), n=n, seed=6)
    for s in (a, b):
        assert abs(s.p_hat - 1 / math.pi) <= band(1 / math.pi, n)
    table = [[a.successes, n - a.successes], [b.successes, n - b.successes]]
    assert chi2_contingency(table).pvalue > 0.001
    assert oracle_value(Rama()).value == pytest.approx(1 / math.pi, abs=1e-12)


def test_rama_rejects_unknown_variant():
    with pytest.raises(ValueError):
        Rama("decimal")


def test_sqrt_is_a_walk_on_not():
    assert sqrt0(Flip()) == Sqrt1m(Not(Flip()))
