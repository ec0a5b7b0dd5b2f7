"""Schlögl birth-death process and its critical scaling.

At size ``n`` the population ``j`` gains one at rate ``n lambda_n(j/n)`` and
loses one at rate ``n mu_n(j/n)`` with::

    lambda_n(x) = 1 + 3 x (x - 1/n)
    mu_n(x)     = 3 x + x (x - 1/n)(x - 2/n)

Both are the Kurtz-scaled intensities of ``0 -> R``, ``2R -> 3R``,
``R -> 0`` and ``3R -> 2R``, see :func:`schlogl_network`.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..network import Reaction, ReactionNetwork
from ..rng import make_rng, resolve_threads, split
from ..ssa import SimConfig, Trajectory


def schlogl_rates(n: int, j) -> tuple[np.ndarray, np.ndarray]:
    """Birth and death rates at population ``j`` (array-friendly)."""
    j = np.asarray(j, dtype=float)
    birth = n + 3.0 * j * (j - 1) / n
    death = 3.0 * j + j * (j - 1) * (j - 2) / (n * n)
    return birth, death


def schlogl_network() -> ReactionNetwork:
    """Reaction form; simulate with ``N = n`` under the ``kurtz`` convention."""
    return ReactionNetwork(("R",), (
        Reaction((0,), (1,), 1.0),
        Reaction((2,), (3,), 3.0),
        Reaction((1,), (0,), 3.0),
        Reaction((3,), (2,), 1.0),
    ))


@njit(cache=True, nogil=True)
def _bd_kernel(n, y, grid, max_events, rng, out):
    t = 0.0
    g = 0
    events = 0
    nf = float(n)
    while True:
        birth = nf + 3.0 * y * (y - 1) / nf
        death = 3.0 * y + y * (y - 1.0) * (y - 2.0) / (nf * nf)
        total = birth + death
        dwell = rng.exponential() / total
        u = rng.random() * total
        t_next = t + dwell
        while g < grid.size and grid[g] < t_next:
            out[g] = y
            g += 1
        if g == grid.size:
            return events, 0, g, t
        if events >= max_events:
            return events, 2, g, t
        y += 1 if u < birth else -1
        t = t_next
        events += 1


def _run(n: int, y0: int, cfg: SimConfig, seed: int) -> Trajectory:
    grid = cfg.grid()
    out = np.zeros(grid.size, dtype=np.int64)
    events, status, g, t = _bd_kernel(n, int(y0), grid, cfg.max_events, make_rng(seed), out)
    return Trajectory(("R",), grid[:g].copy(), out[:g, None].copy(), int(n), int(events),
                      int(seed), truncated=status == 2, final_time=float(t))


def schlogl_process(n: int, y0: int, cfg: SimConfig) -> Trajectory:
    """Exact path of the birth-death chain from ``y0``, sampled on ``cfg.grid()``."""
    if n < 3:
        raise ValueError("n must be >= 3")
    if y0 < 0:
        raise ValueError("y0 must be nonnegative")
    return _run(n, y0, cfg, cfg.seed)


def schlogl_ensemble(n: int, y0: int, cfg: SimConfig, replicas: int,
                     threads: int | None = None) -> list[Trajectory]:
    """Replicas seeded ``split(cfg.seed, r)``, like :func:`macrokin.ssa.ensemble`."""
    if n < 3:
        raise ValueError("n must be >= 3")
    seeds = [split(cfg.seed, r) for r in range(replicas)]
    workers = min(resolve_threads(threads), replicas)
    if workers == 1:
        return [_run(n, y0, cfg, s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: _run(n, y0, cfg, s), seeds))


@dataclass
class ScaledPath:
    times: np.ndarray
    values: np.ndarray


def schlogl_scaled(times, counts, n: int, T: float | None = None) -> ScaledPath:
    """``X_n(t) = n**(1/4) (Y_n(sqrt(n) t) / n - 1)`` on the source samples.

    ``times``/``counts`` are the samples of ``Y_n`` (for instance a
    trajectory's ``times`` and ``counts[:, 0]``).  If ``T`` is given the
    source must reach ``sqrt(n) T`` and samples beyond it are dropped.
    """
    times = np.asarray(times, dtype=float)
    counts = np.asarray(counts, dtype=float).reshape(len(times), -1)[:, 0]
    root = np.sqrt(n)
    if T is not None:
        if times[-1] < root * T * (1 - 1e-12):
            raise ValueError(f"source reaches t = {times[-1]}, need {root * T}")
        keep = times <= root * T * (1 + 1e-12)
        times, counts = times[keep], counts[keep]
    return ScaledPath(times / root, n ** 0.25 * (counts / n - 1.0))
