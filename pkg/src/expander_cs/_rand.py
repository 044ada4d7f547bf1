"""Deterministic randomness primitives.

All randomized code in the package draws through these helpers, built on
``random.Random`` (Mersenne Twister) and consuming only ``getrandbits``
and ``random()``.  Given equal seeds, every generator in this package
therefore reproduces bit-for-bit across platforms.
"""

from __future__ import annotations

import random


def make_rng(seed: int) -> random.Random:
    return random.Random(seed)


def randbelow(rng: random.Random, n: int) -> int:
    """Uniform integer in [0, n) via rejection on getrandbits."""
    if n <= 0:
        raise ValueError("randbelow needs n >= 1")
    k = n.bit_length()
    r = rng.getrandbits(k)
    while r >= n:
        r = rng.getrandbits(k)
    return r


def sample_sorted(rng: random.Random, population: int, k: int) -> list[int]:
    """k distinct integers from [0, population), ascending (Floyd's method)."""
    if not 0 <= k <= population:
        raise ValueError("sample size out of range")
    chosen: set[int] = set()
    for j in range(population - k, population):
        t = randbelow(rng, j + 1)
        chosen.add(j if t in chosen else t)
    return sorted(chosen)


def shuffle_in_place(rng: random.Random, items: list) -> None:
    """Fisher-Yates shuffle driven by randbelow."""
    for i in range(len(items) - 1, 0, -1):
        j = randbelow(rng, i + 1)
        items[i], items[j] = items[j], items[i]


def uniform(rng: random.Random, lo: float, hi: float) -> float:
    return lo + (hi - lo) * rng.random()
