"""Gallery models that are plain reaction networks."""

from __future__ import annotations

import numpy as np
from scipy.sparse.csgraph import connected_components

from ..network import ConservationBasis, Reaction, ReactionNetwork


def _unit(i: int, S: int, k: int = 1) -> tuple[int, ...]:
    v = [0] * S
    v[i] = k
    return tuple(v)


def ehrenfest(N: int, lam: float = 1.0) -> tuple[ReactionNetwork, tuple[int, int]]:
    """Two urns ``A`` and ``B``; every ball changes urn at rate ``lam``.  Starts with all in ``A``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if not lam > 0:
        raise ValueError("lam must be positive")
    net = ReactionNetwork(("A", "B"), (
        Reaction((1, 0), (0, 1), float(lam)),
        Reaction((0, 1), (1, 0), float(lam)),
    ))
    return net, (int(N), 0)


def lotka_volterra(mu3: float, mu6: float, K: float, N: int = 100,
                   c0=None) -> tuple[ReactionNetwork, tuple[int, int]]:
    """Prey ``R`` and predator ``W``.

    ``R -> 2R @ mu3``, ``W -> 0 @ mu6``, ``R + W -> 2W @ K``.  The default
    start is the interior rest point ``(mu6/K, mu3/K)`` scaled by ``N``.
    """
    if min(mu3, mu6, K) <= 0:
        raise ValueError("Lotka-Volterra parameters must be positive")
    net = ReactionNetwork(("R", "W"), (
        Reaction((1, 0), (2, 0), float(mu3)),
        Reaction((0, 1), (0, 0), float(mu6)),
        Reaction((1, 1), (0, 2), float(K)),
    ))
    c0 = lv_center(mu3, mu6, K) if c0 is None else np.asarray(c0, dtype=float)
    n0 = tuple(int(round(x * N)) for x in c0)
    return net, n0


def lv_center(mu3: float, mu6: float, K: float) -> np.ndarray:
    """Interior rest point (prey, predator) of the mean-field system."""
    return np.array([mu6 / K, mu3 / K])


def lv_period(mu3: float, mu6: float) -> float:
    """Small-oscillation period ``2 pi / sqrt(mu3 mu6)``."""
    return 2 * np.pi / np.sqrt(mu3 * mu6)


def _check_generator(L: np.ndarray) -> np.ndarray:
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1] or L.shape[0] < 2:
        raise ValueError("rate matrix must be square with at least 2 vertices")
    off = L - np.diag(np.diag(L))
    if np.any(off < 0):
        raise ValueError("off-diagonal rates must be nonnegative")
    if np.any(np.abs(L.sum(axis=1)) > 1e-12 * max(1.0, np.abs(L).max())):
        raise ValueError("rate matrix rows must sum to zero")
    ncomp, _ = connected_components(off > 0, directed=True, connection="strong")
    if ncomp != 1:
        raise ValueError("rate matrix is reducible")
    return L


def pagerank_surfers(rate_matrix, N: int) -> tuple[ReactionNetwork, tuple[int, ...]]:
    """``N`` independent surfers on a graph: one unary reaction ``v_i -> v_j`` per positive rate.

    ``rate_matrix[i, j]`` is the jump rate from vertex ``i`` to ``j``; rows
    sum to zero.  All surfers start at vertex 0.
    """
    L = _check_generator(rate_matrix)
    S = L.shape[0]
    species = tuple(f"v{i}" for i in range(S))
    reactions = tuple(Reaction(_unit(i, S), _unit(j, S), float(L[i, j]))
                      for i in range(S) for j in range(S) if i != j and L[i, j] > 0)
    return ReactionNetwork(species, reactions), (int(N),) + (0,) * (S - 1)


def pagerank_vector(rate_matrix) -> np.ndarray:
    """Stationary probability ``p`` with ``p L = 0``, ``sum p = 1``."""
    L = _check_generator(rate_matrix)
    A = np.vstack([L.T, np.ones(L.shape[0])])
    rhs = np.zeros(L.shape[0] + 1)
    rhs[-1] = 1.0
    return np.linalg.lstsq(A, rhs, rcond=None)[0]


def wealth_kinetic(N: int, s_bar: int, s_max: int | None = None,
                   lam: float = 1.0) -> tuple[ReactionNetwork, tuple[int, ...]]:
    """Coin exchange as binary reactions between wealth classes ``s0 .. s{s_max}``.

    Every ordered pair of agents meets at rate ``lam / N``; a meeting moves
    one coin from the first agent to the second with probability ½ when the
    first is solvent (the day rule, where a bankrupt partner may still win
    a pot of one).  That is ``(s1) + (s2) -> (s1 - 1) + (s2 + 1)`` at
    ``K = lam / 2`` for ``s1 >= 1`` and ``s2 < s_max``.  The class ``s_max``
    cannot gain coins; the default ``s_max = 10 s_bar``.
    """
    if N < 1 or s_bar < 1:
        raise ValueError("need N >= 1 and s_bar >= 1")
    s_max = 10 * s_bar if s_max is None else int(s_max)
    if s_max < max(s_bar, 2):
        raise ValueError("s_max must be >= s_bar and >= 2")
    S = s_max + 1
    K = float(lam) / 2.0
    reactions = []
    for s1 in range(1, S):
        for s2 in range(0, s_max):
            if s2 == s1 - 1:
                continue  # (s1, s1-1) -> (s1-1, s1) leaves the class counts unchanged
            a = [0] * S
            b = [0] * S
            a[s1] += 1
            a[s2] += 1
            b[s1 - 1] += 1
            b[s2 + 1] += 1
            reactions.append(Reaction(tuple(a), tuple(b), K))
    species = tuple(f"s{s}" for s in range(S))
    n0 = [0] * S
    n0[s_bar] = int(N)
    return ReactionNetwork(species, tuple(reactions)), tuple(n0)


def wealth_basis(s_max: int) -> ConservationBasis:
    """Agents ``(1, ..., 1)`` and coins ``(0, 1, ..., s_max)``."""
    S = s_max + 1
    return ConservationBasis(((1,) * S, tuple(range(S))), S)
