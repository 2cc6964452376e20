from __future__ import annotations

import math
from collections import Counter

import pytest
from scipy.stats import chi2, poisson

from buffon.analysis import oracle_value
from buffon.bags import pi2_over_24
from buffon.combinators import ConstRational, Flip, Mean, And
from buffon.randbits import make_source
from buffon.runner import chi_square_fit
from buffon.vonneumann import (
    FRESH_GREATER,
    FRESH_LESS,
    THEOREM4,
    PermClass,
    Polylog,
    UniformRegister,
    VNIter,
    VNValue,
    compare_fresh,
    theorem4_machine,
    vn_iterations_stat,
    vn_law,
    vn_run,
    vn_variate,
    zigzag,
)
from conftest import band, rate


class Scripted:
    def __init__(self, bits):
        self.it = iter(bits)
        self.flip_count = 0
        self.limit = None

    def flip(self):
        self.flip_count += 1
        return next(self.it)


def _lam(p: ConstRational, src):
    return lambda: p.sample(src, None)


def test_compare_uses_known_register_bit():
    src = Scripted([0])
    outcome, fresh = compare_fresh(UniformRegister([1]), src)
    assert outcome == FRESH_LESS and fresh == [0] and src.flip_count == 1


def test_compare_ties_extend_register():
    reg = UniformRegister()
    # register bit first, then fresh bit: (0,0) tie, then (1,0)
    outcome, fresh = compare_fresh(reg, Scripted([0, 0, 1, 0]))
    assert outcome == FRESH_LESS
    assert reg.bits == [0, 1] and fresh == [0, 0]


def test_empty_register_mean_rounds():
    src = make_source(6)
    n = 50_000
    before = src.flip_count
    for _ in range(n):
        compare_fresh(UniformRegister(), src)
    rounds = (src.flip_count - before) / (2 * n)
    assert abs(rounds - 2) < 0.03


def test_zigzag():
    assert [zigzag(n) for n in range(9)] == [1, 1, 1, 2, 5, 16, 61, 272, 1385]


def _acceptance(cls, n, trials=100_000, seed=0):
    src = make_source(seed + 17 * n)
    return sum(cls.accepts(n, src) for _ in range(trials)) / trials


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_sorted_rate(n):
    p = 1 / math.factorial(n)
    assert abs(_acceptance(PermClass.SORTED, n) - p) <= band(p, 100_000) + 1e-12


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_record_rate(n):
    p = 1 / n
    assert abs(_acceptance(PermClass.RECORD_FIRST_MAX, n, seed=1) - p) <= band(p, 100_000)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_alternating_rate(n):
    p = [1, 1, 1, 2, 5, 16][n] / math.factorial(n)
    cls = PermClass.ALTERNATING_EVEN if n % 2 == 0 else PermClass.ALTERNATING_ODD
    assert abs(_acceptance(cls, n, seed=2) - p) <= band(p, 100_000)


def test_empty_trial_conventions():
    src = make_source(1)
    assert PermClass.SORTED.accepts(0, src) and PermClass.ALL.accepts(0, src)
    assert not PermClass.RECORD_FIRST_MAX.accepts(0, src)
    assert not PermClass.ALTERNATING_ODD.accepts(0, src)
    assert PermClass.ALTERNATING_EVEN.accepts(0, src)


def _fit(cls, p, n=100_000, seed=0):
    src = make_source(seed)
    lam = _lam(p, src)
    counts = Counter(vn_variate(cls, lam, src) for _ in range(n))
    x = p.a / p.b
    return counts, chi_square_fit(counts, lambda k: vn_law(cls, x, k), start=0)


@pytest.mark.parametrize("p", [ConstRational(1, 4), ConstRational(1, 2)])
def test_poisson_law(p):
    counts, fit = _fit(PermClass.SORTED, p, seed=21)
    assert fit.p_value > 0.001
    if p.a * 2 == p.b:
        assert abs(counts[0] / 100_000 - math.exp(-0.5)) <= 0.006


def test_logarithmic_law():
    counts, fit = _fit(PermClass.RECORD_FIRST_MAX, ConstRational(1, 2), seed=22)
    assert fit.p_value > 0.001
    assert abs(counts[1] / 100_000 - 0.5 / math.log(2)) <= 0.006


def test_geometric_law():
    counts, fit = _fit(PermClass.ALL, ConstRational(1, 2), n=50_000, seed=23)
    assert fit.p_value > 0.001


def test_law_sums_to_one():
    for cls in PermClass:
        assert math.isclose(sum(vn_law(cls, 0.5, k) for k in range(80)), 1.0)


@pytest.mark.parametrize(
    "cls,expected",
    [
        (PermClass.SORTED, 2 * math.exp(-0.5)),
        (PermClass.RECORD_FIRST_MAX, 2 / math.log(2)),
    ],
)
def test_mean_trials(cls, expected):
    assert math.isclose(vn_iterations_stat(cls, 0.5), expected)
    src = make_source(31)
    lam = _lam(Flip(), src)
    n = 50_000
    trials = sum(vn_run(cls, lam, src).trials for _ in range(n)) / n
    assert abs(trials / expected - 1) < 0.02


def test_run_separates_costs():
    src = make_source(4)
    out = vn_run(PermClass.SORTED, _lam(Flip(), src), src)
    assert out.geo_flips + out.test_flips == src.flip_count


@pytest.mark.parametrize(
    "e,target",
    [
        (VNValue(PermClass.SORTED, 0, Flip()), math.exp(-0.5)),
        (VNValue(PermClass.ALTERNATING_EVEN, 0, Flip()), math.cos(0.5)),
        (VNIter(PermClass.SORTED, 1, Flip()), 0.5 * math.exp(0.5)),
        (VNIter(PermClass.ALTERNATING_ODD, 1, Flip()), 0.5 * math.tan(0.5)),
        (VNIter(PermClass.SORTED, 2, Flip()), 0.5 * math.exp(0.5) * (1 - 0.5 * math.exp(0.5))),
    ],
)
def test_bernoulli_machines(e, target, assert_rate):
    assert math.isclose(oracle_value(e).value, target, rel_tol=1e-12)
    assert_rate(e, None, target)


def test_small_lambda_limits():
    tiny = ConstRational(1, 10**9)
    assert oracle_value(VNValue(PermClass.SORTED, 0, tiny)).value == pytest.approx(1, abs=1e-8)
    for cls in (PermClass.SORTED, PermClass.ALL, PermClass.ALTERNATING_EVEN):
        assert oracle_value(VNIter(cls, 1, tiny)).value == pytest.approx(1, abs=1e-8)
    # classes with P_0 = 0 reject the empty trial, so a first-trial success becomes rare
    assert oracle_value(VNIter(PermClass.RECORD_FIRST_MAX, 1, tiny)).value < 1e-8


_T4 = {
    "exp_neg": lambda x: math.exp(-x),
    "exp_x_minus_1": lambda x: math.exp(x - 1),
    "one_minus_x_exp_x": lambda x: (1 - x) * math.exp(x),
    "x_exp_one_minus_x": lambda x: x * math.exp(1 - x),
    "x_over_log": lambda x: x / math.log(1 / (1 - x)),
    "one_minus_x_over_log": lambda x: (1 - x) / math.log(1 / x),
    "one_minus_x_log": lambda x: (1 - x) * math.log(1 / (1 - x)),
    "x_log_inv_x": lambda x: x * math.log(1 / x),
    "cos": math.cos,
    "one_minus_x_over_cos": lambda x: (1 - x) / math.cos(x),
    "x_over_tan": lambda x: x / math.tan(x),
    "one_minus_x_tan": lambda x: (1 - x) * math.tan(x),
}


@pytest.mark.parametrize("name", sorted(THEOREM4))
def test_theorem4_oracle(name):
    for a, b in [(1, 4), (1, 2), (2, 3)]:
        got = oracle_value(theorem4_machine(name, ConstRational(a, b))).value
        assert math.isclose(got, _T4[name](a / b), rel_tol=1e-12)


@pytest.mark.parametrize("name", ["exp_x_minus_1", "x_log_inv_x", "one_minus_x_tan", "one_minus_x_over_log"])
def test_theorem4_empirical(name, assert_rate):
    assert_rate(theorem4_machine(name, Flip()), None, _T4[name](0.5))


def test_theorem4_examples():
    assert oracle_value(theorem4_machine("exp_x_minus_1", Flip())).value == pytest.approx(0.60653, abs=1e-5)
    assert oracle_value(theorem4_machine("x_log_inv_x", Flip())).value == pytest.approx(0.34657, abs=1e-5)
    assert oracle_value(theorem4_machine("one_minus_x_over_cos", ConstRational(0, 1))).value == 1


def test_unknown_theorem4_name():
    with pytest.raises(KeyError):
        theorem4_machine("sin", Flip())


def _li(r, z, terms=200):
    return sum(z**k / k**r for k in range(1, terms))


@pytest.mark.parametrize("r,closed", [(1, math.log(2)), (2, math.pi**2 / 12 - math.log(2) ** 2 / 2), (3, None)])
def test_polylog_half(r, closed, assert_rate):
    target = _li(r, 0.5)
    if closed is not None:
        assert math.isclose(target, closed, rel_tol=1e-14)
    assert math.isclose(oracle_value(Polylog(r, Flip())).value, target, rel_tol=1e-12)
    assert_rate(Polylog(r, Flip()), None, target)


def test_polylog_general_lambda():
    # ((1 - x)/x) Li_r(x)
    x = 1 / 3
    assert math.isclose(oracle_value(Polylog(2, ConstRational(1, 3))).value, (1 - x) / x * _li(2, x), rel_tol=1e-12)


def test_pi2_over_24_recipe(assert_rate):
    l1 = Polylog(1, Flip())
    e = Mean(Polylog(2, Flip()), Mean(And(l1, l1), ConstRational(0, 1)))
    assert e == pi2_over_24()
    assert math.isclose(oracle_value(e).value, math.pi**2 / 24, rel_tol=1e-12)
    assert_rate(e, None, math.pi**2 / 24)


def test_poisson_additivity():
    src = make_source(41)
    lam = _lam(Flip(), src)
    n = 50_000
    counts = Counter(vn_variate(PermClass.SORTED, lam, src) + vn_variate(PermClass.SORTED, lam, src) for _ in range(n))
    fit = chi_square_fit(counts, lambda k: poisson.pmf(k, 1.0))
    assert fit.p_value > 0.001
    assert chi2.sf(fit.statistic, fit.dof) == pytest.approx(fit.p_value)
