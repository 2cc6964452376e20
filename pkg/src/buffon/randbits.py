"""Unbiased coin flips: the only source of randomness used by every machine.

Bits come from a SplitMix64 stream, which is a 64-bit counter-based generator
with period 2**64.  Streams are bit-exact across platforms, so a seed fully
determines every sample and every flip count.
"""

from __future__ import annotations

import os
from typing import Callable

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

DEFAULT_SEED = 20110123


class BudgetExceeded(Exception):
    """Raised when a sample consumes more flips than its configured budget."""


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


class BitSource:
    """Seeded stream of unbiased bits that counts every bit it hands out.

    Machines never keep their own tallies: the cost of a computation is the
    difference of ``flip_count`` before and after it.  ``limit`` is an
    absolute flip count beyond which ``flip`` raises :class:`BudgetExceeded`.
    """

    __slots__ = ("seed", "flip_count", "limit", "_state", "_word", "_left")

    def __init__(self, seed: int):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.flip_count = 0
        self.limit: int | None = None
        self._state = seed
        self._word = 0
        self._left = 0

    def flip(self) -> int:
        if not self._left:
            self._state, self._word = _splitmix64(self._state)
            self._left = 64
        self._left -= 1
        bit = self._word & 1
        self._word >>= 1
        self.flip_count += 1
        if self.limit is not None and self.flip_count > self.limit:
            raise BudgetExceeded(self.flip_count)
        return bit

    def bits(self, n: int) -> list[int]:
        return [self.flip() for _ in range(n)]

    def __repr__(self) -> str:
        return f"BitSource(seed={self.seed}, flip_count={self.flip_count})"


def make_source(seed: int | None = None) -> BitSource:
    """Return a fresh source; ``None`` falls back to ``$BUFFON_SEED``."""
    if seed is None:
        seed = default_seed()
    return BitSource(seed)


def default_seed() -> int:
    env = os.environ.get("BUFFON_SEED")
    if env is None or not env.strip():
        return DEFAULT_SEED
    return int(env, 0)


def flip(src: BitSource) -> int:
    return src.flip()


def debiased_flip(biased: Callable[[], int]) -> int:
    """Von Neumann's trick: turn a coin of unknown bias into a fair one.

    Toss pairs until they differ; ``01`` gives 0 and ``10`` gives 1.
    """
    while True:
        a = biased()
        b = biased()
        if a != b:
            return a
