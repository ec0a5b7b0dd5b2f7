"""Synchronous coin exchange between paired agents."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import make_rng


@dataclass
class WealthState:
    coins: np.ndarray
    day: int = 0

    @property
    def total(self) -> int:
        return int(self.coins.sum())


def wealth_new(N: int, s_bar: int) -> WealthState:
    if N < 2 or N % 2:
        raise ValueError("N must be even and >= 2")
    if s_bar < 1:
        raise ValueError("s_bar must be >= 1")
    return WealthState(np.full(N, int(s_bar), dtype=np.int64), 0)


def wealth_day(state: WealthState, rng: np.random.Generator) -> WealthState:
    """One day: a uniform random perfect matching, then every pair plays once.

    Each solvent member stakes one coin; the winner, chosen uniformly among
    the two, takes the pot.  A pair of bankrupts plays for nothing.
    """
    coins = state.coins
    order = rng.permutation(coins.size)
    a, b = order[0::2], order[1::2]
    stake_a = (coins[a] > 0).astype(np.int64)
    stake_b = (coins[b] > 0).astype(np.int64)
    pot = stake_a + stake_b
    a_wins = rng.random(a.size) < 0.5
    new = coins.copy()
    new[a] += np.where(a_wins, pot, 0) - stake_a
    new[b] += np.where(a_wins, 0, pot) - stake_b
    return WealthState(new, state.day + 1)


def wealth_exchange_days(N: int, s_bar: int, days: int, seed: int) -> WealthState:
    """Run ``days`` exchange days from equal wealth ``s_bar``."""
    rng = make_rng(seed)
    state = wealth_new(N, s_bar)
    for _ in range(int(days)):
        state = wealth_day(state, rng)
    return state


def wealth_histogram(coins, s_max: int | None = None) -> np.ndarray:
    """Number of agents holding ``s`` coins, ``s = 0 .. s_max``."""
    coins = np.asarray(coins, dtype=np.int64)
    size = int(coins.max(initial=0)) + 1 if s_max is None else s_max + 1
    return np.bincount(np.minimum(coins, size - 1), minlength=size)
