from __future__ import annotations

import math

import pytest

from buffon.combinators import Expr
from buffon.runner import run


def band(p: float, n: int, k: float = 4.0) -> float:
    """k-sigma binomial half-width."""
    return k * math.sqrt(p * (1 - p) / n)


def rate(e: Expr, binding: Expr | None = None, n: int = 20_000, seed: int = 1):
    return run(e, binding, n=n, seed=seed, oracle=False)


@pytest.fixture
def assert_rate():
    def check(e, binding, target, n=20_000, seed=1, k=4.0):
        stats = rate(e, binding, n, seed)
        tol = band(target, n, k)
        assert abs(stats.p_hat - target) <= tol, (stats.p_hat, target, tol)
        return stats

    return check
