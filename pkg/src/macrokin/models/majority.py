"""Majority rule on triples.

State ``k`` is the number of ``+1`` spins among ``N`` agents.  A step draws
three distinct agents uniformly; if they disagree, the lone dissenter
adopts the majority spin.  ``0`` and ``N`` are absorbing.
"""

from __future__ import annotations

from math import comb
from typing import NamedTuple

import numpy as np

from ..rng import make_rng


def majority_kernel(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form step probabilities ``(up[k], down[k])`` for ``k = 0..N``.

    ``up[k] = C(k,2)(N-k)/C(N,3)`` (two plus, one minus drawn) and
    ``down[k] = k C(N-k,2)/C(N,3)``.
    """
    if N < 3:
        raise ValueError("N must be >= 3")
    total = comb(N, 3)
    up = np.array([comb(k, 2) * (N - k) / total for k in range(N + 1)])
    down = np.array([k * comb(N - k, 2) / total for k in range(N + 1)])
    return up, down


def majority_step(k: int, N: int, rng: np.random.Generator) -> int:
    """One triple update.  Draws the number of ``+1`` spins in the triple."""
    plus = int(rng.hypergeometric(k, N - k, 3))
    if plus == 2:
        return k + 1
    if plus == 1:
        return k - 1
    return k


def majority_run(N: int, k0: int, seed: int, max_steps: int = 10**7) -> tuple[int, int]:
    """Run until consensus; returns ``(final_k, steps)``.  ``final_k`` is not 0 or N if capped."""
    if not 0 <= k0 <= N:
        raise ValueError("k0 must lie in 0..N")
    if N < 3:
        raise ValueError("N must be >= 3")
    rng = make_rng(seed)
    k = int(k0)
    steps = 0
    while 0 < k < N and steps < max_steps:
        k = majority_step(k, N, rng)
        steps += 1
    return k, steps


class MajorityOracle(NamedTuple):
    p_plus: np.ndarray       # probability of ending at N, from each k
    mean_steps: np.ndarray   # expected steps to consensus, from each k
    var_steps: np.ndarray


def majority_oracle(N: int) -> MajorityOracle:
    """First-step analysis on the absorbing chain ``0..N``."""
    up, down = majority_kernel(N)
    inner = np.arange(1, N)
    m = inner.size
    # (I - P) restricted to interior states
    A = np.zeros((m, m))
    for i, k in enumerate(inner):
        A[i, i] = up[k] + down[k]
        if i + 1 < m:
            A[i, i + 1] = -up[k]
        if i > 0:
            A[i, i - 1] = -down[k]
    rhs = np.zeros(m)
    rhs[-1] = up[N - 1]
    h = np.linalg.solve(A, rhs)
    t = np.linalg.solve(A, np.ones(m))
    # second moment: E[T^2] = 1 + 2 P E[T] + P E[T^2] on the interior
    P = np.eye(m) - A
    s2 = np.linalg.solve(A, np.ones(m) + 2 * P @ t)
    p_plus = np.concatenate([[0.0], h, [1.0]])
    mean = np.concatenate([[0.0], t, [0.0]])
    var = np.concatenate([[0.0], s2 - t ** 2, [0.0]])
    return MajorityOracle(p_plus, mean, var)
