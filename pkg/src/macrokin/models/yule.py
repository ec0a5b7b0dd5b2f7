"""Yule process / preferential attachment for coins.

Day 1 has one resident holding one coin.  On each later day a newcomer
arrives with one coin, and one extra coin goes to an old resident: with
probability ``alpha`` a uniformly chosen one, otherwise one chosen with
probability proportional to current holdings.

Per day two uniforms are drawn: ``u1`` picks the rule and ``u2`` the
resident (``floor(u2 k)`` for the uniform rule, the first resident whose
cumulative holding exceeds ``u2 * total`` for the proportional rule).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..rng import make_rng


@dataclass
class YuleState:
    coin_counts: list[int] = field(default_factory=lambda: [1])
    alpha: float = 0.0

    @property
    def day(self) -> int:
        return len(self.coin_counts)


def yule_new(alpha: float) -> YuleState:
    if not 0 <= alpha < 1:
        raise ValueError("alpha must lie in [0, 1)")
    return YuleState([1], float(alpha))


def yule_step(state: YuleState, rng: np.random.Generator) -> YuleState:
    """Next day (the same draws as :func:`yule_run`)."""
    coins = list(state.coin_counts)
    k = len(coins)
    u1 = rng.random()
    u2 = rng.random()
    if u1 < state.alpha:
        j = int(u2 * k)
    else:
        target = u2 * sum(coins)
        j = int(np.searchsorted(np.cumsum(coins), target, side="right"))
    coins[min(j, k - 1)] += 1
    coins.append(1)
    return YuleState(coins, state.alpha)


@njit(cache=True)
def _yule_kernel(alpha, days, rng):
    coins = np.zeros(days, np.int64)
    tree = np.zeros(days + 1, np.int64)  # Fenwick tree over coins
    top = 1
    while top * 2 <= days:
        top *= 2
    coins[0] = 1
    i = 1
    while i <= days:
        tree[i] += 1
        i += i & (-i)
    total = 1
    for k in range(1, days):
        u1 = rng.random()
        u2 = rng.random()
        if u1 < alpha:
            j = int(u2 * k)
        else:
            # smallest j with cumsum(coins[:j+1]) > u2 * total
            target = u2 * total
            pos = 0
            step = top
            while step > 0:
                if pos + step <= days and tree[pos + step] <= target:
                    pos += step
                    target -= tree[pos]
                step //= 2
            j = pos
        if j > k - 1:
            j = k - 1
        coins[j] += 1
        i = j + 1
        while i <= days:
            tree[i] += 1
            i += i & (-i)
        coins[k] = 1
        i = k + 1
        while i <= days:
            tree[i] += 1
            i += i & (-i)
        total += 2
    return coins


def yule_coins(alpha: float, days: int, seed: int) -> np.ndarray:
    """Holdings of every resident after ``days`` days."""
    if not 0 <= alpha < 1:
        raise ValueError("alpha must lie in [0, 1)")
    if days < 1:
        raise ValueError("days must be >= 1")
    return _yule_kernel(float(alpha), int(days), make_rng(seed))


def yule_run(alpha: float, days: int, seed: int) -> np.ndarray:
    """Coin histogram ``c[s]`` = number of residents holding ``s`` coins."""
    return np.bincount(yule_coins(alpha, days, seed))


def yule_exponent(alpha: float) -> float:
    """Tail exponent ``3 + alpha / (1 - alpha)`` of the coin histogram."""
    return 3.0 + alpha / (1.0 - alpha)
