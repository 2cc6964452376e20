"""Experiment runner: repeated sampling, summary statistics, goodness of fit."""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Callable

from scipy.stats import chi2

from .combinators import Expr, sample_bernoulli
from .randbits import BitSource, make_source
from .vonneumann import PermClass, vn_run

Z95 = NormalDist().inv_cdf(0.975)


def wilson_interval(successes: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


def hist_quantile(hist: Counter, q: float) -> int:
    """Smallest k with P(X <= k) >= q under the empirical law."""
    total = sum(hist.values())
    if not total:
        return 0
    need = q * total
    acc = 0
    for k in sorted(hist):
        acc += hist[k]
        if acc >= need:
            return k
    return max(hist)


@dataclass
class RunStats:
    n: int
    successes: int
    seed: int
    censored: int = 0
    flip_hist: Counter = field(default_factory=Counter)
    expr: str = ""
    binding: str | None = None
    oracle: float | None = None

    @property
    def p_hat(self) -> float:
        return self.successes / self.n if self.n else float("nan")

    @property
    def ci95(self) -> tuple[float, float]:
        return wilson_interval(self.successes, self.n)

    @property
    def flips(self) -> dict[str, float]:
        total = sum(self.flip_hist.values())
        mean = sum(k * c for k, c in self.flip_hist.items()) / total if total else 0.0
        return {
            "mean": mean,
            "median": hist_quantile(self.flip_hist, 0.5),
            "p95": hist_quantile(self.flip_hist, 0.95),
            "max": max(self.flip_hist, default=0),
        }

    def merge(self, other: "RunStats") -> "RunStats":
        return RunStats(
            n=self.n + other.n,
            successes=self.successes + other.successes,
            seed=self.seed,
            censored=self.censored + other.censored,
            flip_hist=self.flip_hist + other.flip_hist,
            expr=self.expr,
            binding=self.binding,
            oracle=self.oracle,
        )

    def to_json(self) -> dict:
        lo, hi = self.ci95
        return {
            "expr": self.expr,
            "binding": self.binding,
            "n": self.n,
            "seed": self.seed,
            "successes": self.successes,
            "p_hat": self.p_hat,
            "ci95": [lo, hi],
            "flips": self.flips,
            "censored": self.censored,
            "oracle": self.oracle,
        }


def _run_shard(e: Expr, binding: Expr | None, n: int, seed: int, budget: int | None) -> RunStats:
    src = make_source(seed)
    stats = RunStats(n=0, successes=0, seed=seed)
    hist = stats.flip_hist
    for _ in range(n):
        r = sample_bernoulli(e, binding, src, budget)
        if r.censored:
            stats.censored += 1
            continue
        stats.n += 1
        stats.successes += r.value
        hist[r.flips] += 1
    return stats


def _shard_sizes(n: int, workers: int) -> list[int]:
    base, extra = divmod(n, workers)
    return [base + (i < extra) for i in range(workers)]


def run(
    e: Expr,
    binding: Expr | None = None,
    n: int = 10_000,
    seed: int | None = None,
    budget: int | None = None,
    workers: int = 1,
    oracle: bool = True,
) -> RunStats:
    """Draw n samples and summarise them.

    With ``workers > 1`` the samples are split across processes seeded
    ``seed, seed + 1, ...``; single-worker runs are the reproducible reference.
    Censored samples (budget exceeded) are counted apart and excluded from
    ``n`` and ``successes``.
    """
    from .dsl import to_dsl

    if n < 1:
        raise ValueError("n must be >= 1")
    if seed is None:
        seed = make_source().seed
    sizes = _shard_sizes(n, workers)
    if workers == 1:
        shards = [_run_shard(e, binding, n, seed, budget)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_shard, e, binding, k, seed + i, budget) for i, k in enumerate(sizes)
            ]
            shards = [f.result() for f in futures]
    total = shards[0]
    for s in shards[1:]:
        total = total.merge(s)
    total.seed = seed
    total.expr = to_dsl(e)
    total.binding = to_dsl(binding) if binding is not None else None
    if oracle:
        from .analysis import UnsupportedKind, oracle_value

        try:
            total.oracle = oracle_value(e, binding).value
        except UnsupportedKind:
            total.oracle = None
    return total


# --- discrete laws ----------------------------------------------------------

DIST_CLASSES = {
    "poisson": PermClass.SORTED,
    "logarithmic": PermClass.RECORD_FIRST_MAX,
    "geometric": PermClass.ALL,
}


@dataclass
class ChiSquare:
    statistic: float
    dof: int
    p_value: float
    cells: list[tuple[str, int, float]]  # label, observed, expected


@dataclass
class Histogram:
    kind: str
    lam: float
    n: int
    seed: int
    bins: Counter
    trials: int = 0
    chi_square: ChiSquare | None = None

    @property
    def mean_trials(self) -> float:
        return self.trials / self.n

    def to_json(self) -> dict:
        cs = self.chi_square
        return {
            "kind": self.kind,
            "lambda": self.lam,
            "n": self.n,
            "seed": self.seed,
            "bins": {str(k): v for k, v in sorted(self.bins.items())},
            "mean_trials": self.mean_trials,
            "chi_square": None
            if cs is None
            else {
                "statistic": cs.statistic,
                "dof": cs.dof,
                "p_value": cs.p_value,
                "cells": [{"label": l, "observed": o, "expected": x} for l, o, x in cs.cells],
            },
        }


def chi_square_fit(
    counts: Counter, pmf: Callable[[int], float], start: int = 0, tail: float = 0.01, min_expected: float = 5.0
) -> ChiSquare:
    """Pearson chi-square of integer counts against ``pmf``.

    Cells run from ``start`` until the remaining mass is at most ``tail``,
    which forms one last cell; adjacent cells are then merged until each
    expects at least ``min_expected`` observations.
    """
    n = sum(counts.values())
    cells: list[list] = []  # [lo, hi, prob]; hi None means open tail
    mass, k = 0.0, start
    while 1.0 - mass > tail:
        p = pmf(k)
        cells.append([k, k, p])
        mass += p
        k += 1
    cells.append([k, None, max(0.0, 1.0 - mass)])
    merged: list[list] = []
    for c in cells:
        if merged and merged[-1][2] * n < min_expected:
            merged[-1][1] = c[1]
            merged[-1][2] += c[2]
        else:
            merged.append(list(c))
    while len(merged) > 1 and merged[-1][2] * n < min_expected:
        last = merged.pop()
        merged[-1][1] = last[1]
        merged[-1][2] += last[2]
    stat = 0.0
    out = []
    for lo, hi, p in merged:
        if hi is None:
            obs = sum(c for v, c in counts.items() if v >= lo)
            label = f">={lo}"
        else:
            obs = sum(c for v, c in counts.items() if lo <= v <= hi)
            label = str(lo) if lo == hi else f"{lo}-{hi}"
        exp = p * n
        stat += (obs - exp) ** 2 / exp
        out.append((label, obs, exp))
    dof = len(merged) - 1
    return ChiSquare(stat, dof, float(chi2.sf(stat, dof)) if dof > 0 else 1.0, out)


def dist(kind: str, lam: Expr, n: int, seed: int | None = None) -> Histogram:
    """Sample the von Neumann variate for ``kind`` and test it against its law."""
    from .analysis import law_pmf, oracle_value

    if kind not in DIST_CLASSES:
        raise ValueError(f"unknown distribution {kind!r}; one of {', '.join(DIST_CLASSES)}")
    if not lam.is_closed():
        raise ValueError("lambda must be a closed expression")
    lam_value = oracle_value(lam).value
    if not 0.0 < lam_value < 1.0:
        raise ValueError("lambda must lie in (0, 1)")
    src: BitSource = make_source(seed)
    cls = DIST_CLASSES[kind]
    counts: Counter = Counter()
    trials = 0
    lam_fn = lambda: lam.sample(src, None)  # noqa: E731
    for _ in range(n):
        out = vn_run(cls, lam_fn, src)
        counts[out.value] += 1
        trials += out.trials
    h = Histogram(kind, lam_value, n, src.seed, counts, trials)
    h.chi_square = chi_square_fit(counts, law_pmf(kind, lam_value), start=1 if kind == "logarithmic" else 0)
    return h
