"""Kac ring: ``n`` balls on a circle rotate one cell per tick and change
color when they leave a marked cell.

Colors are ``+1`` (white) and ``-1`` (black); the marked set ``Q`` is
encoded as ``delta_k = -1`` on marked cells.  With noise probability
``p > 0`` the whole ring is multiplied each tick by a global sign ``chi``
with ``P(chi = 1) = p``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from ..rng import make_rng, split


class QMode(str, enum.Enum):
    FIXED_COUNT = "fixed_count"
    IID_BERNOULLI = "iid_bernoulli"


@dataclass(frozen=True)
class KacRingState:
    colors: np.ndarray
    marked: np.ndarray
    flip_prob: float
    time: int
    rng: np.random.Generator

    @property
    def n(self) -> int:
        return self.colors.size

    @property
    def delta(self) -> np.ndarray:
        return np.where(self.marked, -1, 1).astype(np.int8)


def _marked_set(n: int, m_or_mu, mode: QMode, rng: np.random.Generator) -> np.ndarray:
    if isinstance(m_or_mu, (int, np.integer)):
        m = int(m_or_mu)
        mu = m / n
    else:
        mu = float(m_or_mu)
        m = int(round(mu * n))
    if not 0 <= mu < 0.5:
        raise ValueError(f"marked fraction must lie in [0, 1/2), got {mu}")
    marked = np.zeros(n, dtype=bool)
    if mode is QMode.FIXED_COUNT:
        marked[rng.choice(n, size=m, replace=False)] = True
    else:
        marked = rng.random(n) < mu
    return marked


def kac_ring_new(n: int, m_or_mu, p: float = 0.0, q_mode="fixed_count",
                 seed: int = 0) -> KacRingState:
    """All-white ring with a random marked set.

    ``m_or_mu`` is a count (int) or a fraction (float).  ``fixed_count``
    picks a uniform ``m``-subset; ``iid_bernoulli`` marks each cell
    independently with probability ``mu``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= p < 0.5:
        raise ValueError(f"flip probability must lie in [0, 1/2), got {p}")
    rng = make_rng(seed)
    marked = _marked_set(n, m_or_mu, QMode(q_mode), rng)
    return KacRingState(np.ones(n, dtype=np.int8), marked, float(p), 0, rng)


def kac_ring_step(state: KacRingState) -> KacRingState:
    """Advance one tick.  The ball in cell ``k`` moves to ``k+1`` and is
    multiplied by ``delta_k``, then the ring by ``chi`` when noise is on."""
    colors = np.roll(state.colors * state.delta, 1)
    if state.flip_prob > 0:
        chi = 1 if state.rng.random() < state.flip_prob else -1
        colors = colors * np.int8(chi)
    return replace(state, colors=colors, time=state.time + 1)


def kac_ring_stat(state: KacRingState) -> float:
    """``(N_white - N_black) / n``."""
    return float(state.colors.mean(dtype=float))


def kac_ring_paths(n: int, m_or_mu, T: int, replicas: int, seed: int, p: float = 0.0,
                   q_mode="fixed_count") -> np.ndarray:
    """Statistic at ``t = 0..T`` for independent rings, shape ``(replicas, T+1)``.

    Replica ``r`` draws its marked set and noise from ``split(seed, r)``.
    """
    out = np.empty((replicas, T + 1))
    for r in range(replicas):
        st = kac_ring_new(n, m_or_mu, p, q_mode, split(seed, r))
        out[r, 0] = kac_ring_stat(st)
        for t in range(1, T + 1):
            st = kac_ring_step(st)
            out[r, t] = kac_ring_stat(st)
    return out


def kac_noise_paths(state: KacRingState, T: int, replicas: int, seed: int) -> np.ndarray:
    """Many noise realizations over one fixed marked set, shape ``(replicas, T+1)``."""
    out = np.empty((replicas, T + 1))
    for r in range(replicas):
        st = replace(state, rng=make_rng(split(seed, r)))
        out[r, 0] = kac_ring_stat(st)
        for t in range(1, T + 1):
            st = kac_ring_step(st)
            out[r, t] = kac_ring_stat(st)
    return out
