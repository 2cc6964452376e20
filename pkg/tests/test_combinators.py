from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asts import exact_or_none, random_expr, small_machines
from buffon.analysis import exact_value, oracle_value
from buffon.combinators import (
    And,
    Bind,
    Cond,
    ConstRational,
    Even,
    Flip,
    Mean,
    Not,
    Or,
    Third,
    UnboundVariable,
    Var,
    bernoulli_rational,
    bernoulli_rational_rejection,
    bernoulli_third_markov,
    binary_digits,
    geometric,
    sample_bernoulli,
)
from buffon.randbits import make_source
from conftest import band, rate


def test_binary_digits():
    assert binary_digits(1, 2, 4) == [1, 0, 0, 0]
    assert binary_digits(1, 3, 6) == [0, 1, 0, 1, 0, 1]
    assert binary_digits(5, 9, 6) == [1, 0, 0, 0, 1, 1]  # 5/9 = 0.100011 100011...
    assert binary_digits(1, 1, 3) == [1, 1, 1]


def test_half_costs_one_flip():
    src = make_source(3)
    for _ in range(200):
        assert bernoulli_rational(1, 2, src).flips == 1


def test_certainty_costs_nothing():
    src = make_source(3)
    for _ in range(50):
        r = bernoulli_rational(1, 1, src)
        assert (r.value, r.flips) == (1, 0)
        assert bernoulli_rational(0, 5, src).value == 0


def test_rational_validation():
    with pytest.raises(ValueError):
        ConstRational(4, 3)
    with pytest.raises(ValueError):
        ConstRational(1, 0)
    with pytest.raises(ValueError):
        bernoulli_rational(2, 1, make_source(1))


def test_third_by_expansion():
    src = make_source(11)
    n = 100_000
    results = [bernoulli_rational(1, 3, src) for _ in range(n)]
    p = sum(r.value for r in results) / n
    assert abs(p - 1 / 3) <= 0.006
    flips = sorted(r.flips for r in results)
    # the geometric index Z = 1 + Geo(1/2) is the whole cost
    assert abs(sum(flips) / n - 2) < 0.03
    assert flips[int(0.95 * n)] <= 12


def test_markov_third():
    src = make_source(12)
    n = 100_000
    results = [bernoulli_third_markov(src) for _ in range(n)]
    p = sum(r.value for r in results) / n
    assert abs(p - 1 / 3) <= band(1 / 3, n)
    # two flips per round, a round decides with probability 3/4
    assert abs(sum(r.flips for r in results) / n - 8 / 3) < 0.03
    assert all(r.flips % 2 == 0 for r in results)


def test_markov_first_round():
    # 11 on the first round decides 1 at once
    class Scripted:
        flip_count = 0
        limit = None

        def __init__(self, bits):
            self.it = iter(bits)

        def flip(self):
            self.flip_count += 1
            return next(self.it)

    assert bernoulli_third_markov(Scripted([1, 1])).value == 1
    assert bernoulli_third_markov(Scripted([0, 1])).value == 0
    assert bernoulli_third_markov(Scripted([0, 0, 1, 1])).value == 1


def test_rejection_variant_is_exact():
    src = make_source(13)
    n = 50_000
    p = sum(bernoulli_rational_rejection(5, 9, src) for _ in range(n)) / n
    assert abs(p - 5 / 9) <= band(5 / 9, n)


@pytest.mark.parametrize(
    "e,target",
    [
        (And(ConstRational(1, 2), ConstRational(1, 2)), 0.25),
        (Not(ConstRational(1, 3)), 2 / 3),
        (Mean(Flip(), Flip()), 0.5),
        (Even(Flip()), 2 / 3),
        (Or(Third(), Flip()), 2 / 3),
        (Cond(Third(), ConstRational(1, 1), Flip()), 2 / 3),
    ],
)
def test_small_laws(e, target, assert_rate):
    assert_rate(e, None, target)


def test_even_parity_half_band():
    stats = rate(Even(Flip()), n=100_000, seed=4)
    assert abs(stats.p_hat - 2 / 3) <= 0.006


def test_even_of_zero_is_one():
    assert exact_value(Even(ConstRational(0, 1))) == 1
    src = make_source(1)
    assert all(sample_bernoulli(Even(ConstRational(0, 1)), None, src).value for _ in range(20))


def test_geometric_mean():
    src = make_source(14)
    n = 50_000
    draws = [geometric(Var(), ConstRational(1, 3), src).value for _ in range(n)]
    # Geo(1/3) has mean (1/3)/(2/3) = 1/2 and variance 3/4
    assert abs(sum(draws) / n - 0.5) <= 4 * (0.75 / n) ** 0.5


def test_cond_samples_one_branch():
    src = make_source(2)
    # a branch that would cost flips is skipped when the selector says so
    r = sample_bernoulli(Cond(ConstRational(1, 1), Var(), Third()), ConstRational(1, 1), src)
    assert (r.value, r.flips) == (1, 0)


def test_bind_substitutes():
    e = Bind(And(Var(), Var()), Flip())
    assert exact_value(e) == Fraction(1, 4)
    assert exact_value(e, Fraction(9, 10)) == Fraction(1, 4)


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        sample_bernoulli(Not(Var()), None, make_source(1))
    with pytest.raises(UnboundVariable):
        sample_bernoulli(Var(), Var(), make_source(1))


def test_budget_censoring():
    src = make_source(5)
    results = [sample_bernoulli(Even(ConstRational(7, 8)), None, src, budget=4) for _ in range(2000)]
    censored = [r for r in results if r.censored]
    assert censored and len(censored) < len(results)
    assert all(r.flips == 5 for r in censored)
    assert src.limit is None


def test_replay():
    e = Cond(Third(), Even(Var()), Or(Var(), ConstRational(2, 7)))
    runs = []
    for _ in range(2):
        src = make_source(77)
        runs.append([tuple(vars(sample_bernoulli(e, Flip(), src)).values()) for _ in range(500)])
    assert runs[0] == runs[1]


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32), x=st.fractions(min_value=0, max_value=1, max_denominator=64))
def test_composition_soundness(seed, x):
    rng = random.Random(seed)
    e = random_expr(rng, 3)
    f = random_expr(rng, 2)
    g = random_expr(rng, 2)
    v = exact_or_none(e, x)
    w = exact_or_none(f, x)
    u = exact_or_none(g, x)
    assert exact_value(Not(e), x) == 1 - v
    assert exact_value(And(e, f), x) == v * w
    assert exact_value(Cond(e, f, g), x) == v * w + (1 - v) * u
    assert abs(oracle_value(e, ConstRational(x.numerator, x.denominator)).value - float(v)) < 1e-12


@pytest.mark.parametrize("i,case", list(enumerate(small_machines(50))))
def test_random_machine_matches_oracle(i, case):
    e, b = case
    target = oracle_value(e, b).value
    stats = rate(e, b, n=10_000, seed=1000 + i)
    assert abs(stats.p_hat - target) <= band(target, 10_000) + 1e-9
