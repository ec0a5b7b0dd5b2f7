"""Exact Markov-jump simulation of reaction networks (Gillespie direct method).

Reaction ``r`` fires at intensity::

    kurtz:          N**(1 - |alpha_r|) * K_r * prod_i ff(n_i, alpha_ri)
    paper_literal:  N**(   - |alpha_r|) * K_r * prod_i ff(n_i, alpha_ri)

where ``ff(n, a) = n (n-1) ... (n-a+1)`` is the falling factorial.  Under the
default ``kurtz`` convention ``n(t)/N`` converges to the mass-action ODE on
an O(1) time scale; ``paper_literal`` only rescales time for networks of a
single molecularity.

Each step draws one exponential dwell (``rng.exponential() / total``) and
then one uniform for the reaction choice (``rng.random() * total``), scanning
reactions in declaration order with a strict ``<`` against the running sum.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from numba import njit

from .network import ReactionNetwork
from .rng import make_rng, resolve_threads, split

ABSORBED = -1

_HORIZON, _ABSORBED, _TRUNCATED = 0, 1, 2


class IntensityConvention(str, enum.Enum):
    KURTZ = "kurtz"
    PAPER_LITERAL = "paper_literal"

    @classmethod
    def parse(cls, value) -> "IntensityConvention":
        if isinstance(value, cls):
            return value
        return cls(str(value).replace("-", "_"))


@dataclass(frozen=True)
class CountState:
    counts: tuple[int, ...]
    scale: int
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be nonnegative")
        if self.scale < 1:
            raise ValueError("scale N must be >= 1")
        if self.time < 0:
            raise ValueError("time must be nonnegative")

    @property
    def concentrations(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float) / self.scale


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    horizon: float = 1.0
    sample_dt: float | None = None
    max_events: int = 10**9
    intensity_convention: IntensityConvention = IntensityConvention.KURTZ

    def __post_init__(self):
        object.__setattr__(self, "intensity_convention",
                           IntensityConvention.parse(self.intensity_convention))
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.sample_dt is None:
            object.__setattr__(self, "sample_dt", float(self.horizon))
        if not (0 < self.sample_dt <= self.horizon):
            raise ValueError("need 0 < sample_dt <= horizon")
        if self.max_events < 1:
            raise ValueError("max_events must be >= 1")

    def grid(self) -> np.ndarray:
        k = int(np.floor(self.horizon / self.sample_dt + 1e-9))
        g = np.arange(k + 1, dtype=float) * self.sample_dt
        if self.horizon - g[-1] > 1e-9 * self.horizon:
            g = np.append(g, self.horizon)
        else:
            g[-1] = self.horizon
        return g


@dataclass
class Trajectory:
    """Counts sampled on a time grid (last-value interpolation between jumps)."""

    species: tuple[str, ...]
    times: np.ndarray
    counts: np.ndarray
    scale: int
    jump_count: int
    seed: int
    truncated: bool = False
    absorbed: bool = False
    final_time: float = field(default=0.0)

    @property
    def final(self) -> CountState:
        return CountState(tuple(self.counts[-1]), self.scale, float(self.times[-1]))

    @property
    def concentrations(self) -> np.ndarray:
        return self.counts / self.scale

    def at(self, t: float) -> np.ndarray:
        """State at time ``t`` (right-continuous lookup on the sample grid)."""
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        if i < 0:
            raise ValueError("time before trajectory start")
        return self.counts[i]


class StepResult(NamedTuple):
    dwell: float
    reaction: int
    state: CountState


# --------------------------------------------------------------------------
# propensities


def _scale_factors(net: ReactionNetwork, N: int, convention) -> np.ndarray:
    convention = IntensityConvention.parse(convention)
    order = net.alpha.sum(axis=1).astype(float)
    shift = 1.0 if convention is IntensityConvention.KURTZ else 0.0
    return np.power(float(N), shift - order)


def propensities(net: ReactionNetwork, n: Sequence[int], N: int,
                 convention=IntensityConvention.KURTZ) -> np.ndarray:
    """Intensity of every reaction at count vector ``n`` and scale ``N``."""
    n = np.asarray(n, dtype=np.int64)
    if n.shape != (net.n_species,):
        raise ValueError(f"state has shape {n.shape}, network has {net.n_species} species")
    if np.any(n < 0):
        raise ValueError("counts must be nonnegative")
    if N < 1:
        raise ValueError("scale N must be >= 1")
    alpha = net.alpha
    ff = np.ones(net.n_reactions)
    for j in range(int(alpha.max(initial=0))):
        ff *= np.where(alpha > j, n[None, :] - j, 1).astype(float).prod(axis=1)
    return _scale_factors(net, N, convention) * net.rates * ff


# --------------------------------------------------------------------------
# compiled kernels


class _Compiled(NamedTuple):
    keff: np.ndarray
    r_ptr: np.ndarray
    r_idx: np.ndarray
    r_pow: np.ndarray
    d_ptr: np.ndarray
    d_idx: np.ndarray
    d_val: np.ndarray
    dep_ptr: np.ndarray
    dep_idx: np.ndarray


def _csr(rows: list[list[int]], vals: list[list[int]] | None = None):
    ptr = np.zeros(len(rows) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(r) for r in rows])
    idx = np.array([x for r in rows for x in r], dtype=np.int64)
    if vals is None:
        return ptr, idx
    return ptr, idx, np.array([x for v in vals for x in v], dtype=np.int64)


def _compile(net: ReactionNetwork, N: int, convention) -> _Compiled:
    alpha, delta = net.alpha, net.stoichiometry
    r_rows = [list(np.flatnonzero(a)) for a in alpha]
    r_vals = [[int(a[i]) for i in row] for a, row in zip(alpha, r_rows)]
    d_rows = [list(np.flatnonzero(d)) for d in delta]
    d_vals = [[int(d[i]) for i in row] for d, row in zip(delta, d_rows)]
    consumers: list[set[int]] = [set() for _ in range(net.n_species)]
    for r, row in enumerate(r_rows):
        for i in row:
            consumers[i].add(r)
    deps = [sorted(set().union(*(consumers[i] for i in row))) if row else []
            for row in d_rows]
    keff = _scale_factors(net, N, convention) * net.rates
    r_ptr, r_idx, r_pow = _csr(r_rows, r_vals)
    d_ptr, d_idx, d_val = _csr(d_rows, d_vals)
    dep_ptr, dep_idx = _csr(deps)
    return _Compiled(keff, r_ptr, r_idx, r_pow, d_ptr, d_idx, d_val, dep_ptr, dep_idx)


@njit(cache=True, nogil=True)
def _prop(r, n, keff, r_ptr, r_idx, r_pow):
    a = keff[r]
    for p in range(r_ptr[r], r_ptr[r + 1]):
        ni = n[r_idx[p]]
        for j in range(r_pow[p]):
            a *= ni - j
    if a < 0.0:
        a = 0.0
    return a


@njit(cache=True, nogil=True)
def _choose(a, total, u):
    acc = 0.0
    last = -1
    for r in range(a.shape[0]):
        if a[r] > 0.0:
            acc += a[r]
            last = r
            if u < acc:
                return r
    return last


@njit(cache=True, nogil=True)
def _direct_kernel(n, keff, r_ptr, r_idx, r_pow, d_ptr, d_idx, d_val, dep_ptr, dep_idx,
                   grid, max_events, rng, out):
    R = keff.shape[0]
    a = np.empty(R)
    for r in range(R):
        a[r] = _prop(r, n, keff, r_ptr, r_idx, r_pow)
    G = grid.shape[0]
    t = 0.0
    g = 0
    events = 0
    status = _HORIZON
    while True:
        total = 0.0
        for r in range(R):
            total += a[r]
        if total <= 0.0:
            status = _ABSORBED
            break
        if events >= max_events:
            status = _TRUNCATED
            break
        t_next = t + rng.exponential() / total
        while g < G and grid[g] < t_next:
            out[g, :] = n
            g += 1
        if g == G:
            t = grid[G - 1]
            break
        r = _choose(a, total, rng.random() * total)
        for p in range(d_ptr[r], d_ptr[r + 1]):
            n[d_idx[p]] += d_val[p]
        t = t_next
        events += 1
        for p in range(dep_ptr[r], dep_ptr[r + 1]):
            q = dep_idx[p]
            a[q] = _prop(q, n, keff, r_ptr, r_idx, r_pow)
    if status == _ABSORBED:
        while g < G:
            out[g, :] = n
            g += 1
        t = grid[G - 1]
    return events, status, g, t


@njit(cache=True, nogil=True)
def _first_return_kernel(n, keff, r_ptr, r_idx, r_pow, d_ptr, d_idx, d_val, dep_ptr,
                         dep_idx, max_events, rng):
    """Number of jumps of the embedded chain until ``n`` first recurs (-1: cap hit)."""
    start = n.copy()
    R = keff.shape[0]
    a = np.empty(R)
    for r in range(R):
        a[r] = _prop(r, n, keff, r_ptr, r_idx, r_pow)
    events = 0
    while events < max_events:
        total = 0.0
        for r in range(R):
            total += a[r]
        if total <= 0.0:
            return -1
        r = _choose(a, total, rng.random() * total)
        for p in range(d_ptr[r], d_ptr[r + 1]):
            n[d_idx[p]] += d_val[p]
        events += 1
        for p in range(dep_ptr[r], dep_ptr[r + 1]):
            q = dep_idx[p]
            a[q] = _prop(q, n, keff, r_ptr, r_idx, r_pow)
        same = True
        for i in range(n.shape[0]):
            if n[i] != start[i]:
                same = False
                break
        if same:
            return events
    return -1


# --------------------------------------------------------------------------
# public API


def _check_state(net: ReactionNetwork, n0) -> np.ndarray:
    n = np.array(n0, dtype=np.int64)
    if n.shape != (net.n_species,):
        raise ValueError(f"initial state has shape {n.shape}, expected ({net.n_species},)")
    if np.any(n < 0):
        raise ValueError("counts must be nonnegative")
    return n


def step(net: ReactionNetwork, state: CountState, rng: np.random.Generator,
         convention=IntensityConvention.KURTZ) -> StepResult:
    """One jump of the chain.  Returns ``ABSORBED`` and ``inf`` dwell if no reaction can fire."""
    a = propensities(net, state.counts, state.scale, convention)
    total = float(a.sum())
    if total <= 0.0:
        return StepResult(float("inf"), ABSORBED, state)
    dwell = rng.exponential() / total
    r = int(_choose(a, total, rng.random() * total))
    counts = np.asarray(state.counts) + net.stoichiometry[r]
    return StepResult(dwell, r, CountState(tuple(counts), state.scale, state.time + dwell))


def _simulate_seeded(net, comp, n0, N, cfg: SimConfig, seed: int) -> Trajectory:
    grid = cfg.grid()
    n = _check_state(net, n0).copy()
    out = np.zeros((grid.size, net.n_species), dtype=np.int64)
    rng = make_rng(seed)
    events, status, g, t = _direct_kernel(
        n, comp.keff, comp.r_ptr, comp.r_idx, comp.r_pow, comp.d_ptr, comp.d_idx,
        comp.d_val, comp.dep_ptr, comp.dep_idx, grid, cfg.max_events, rng, out)
    times, counts = grid[:g], out[:g]
    if status == _TRUNCATED and (g == 0 or t > times[-1]):
        times = np.append(times, t)
        counts = np.vstack([counts, n[None, :]])
    return Trajectory(net.species, times, counts, N, int(events), int(seed),
                      truncated=status == _TRUNCATED, absorbed=status == _ABSORBED,
                      final_time=float(t))


def simulate(net: ReactionNetwork, n0: Sequence[int], N: int, cfg: SimConfig) -> Trajectory:
    """Exact trajectory from ``n0`` at scale ``N`` seeded with ``cfg.seed``.

    Stops at the horizon, on absorption (the absorbing state is then held
    to the horizon) or after ``cfg.max_events`` jumps (``truncated`` set,
    last sample at the time of the final jump).
    """
    if N < 1:
        raise ValueError("scale N must be >= 1")
    comp = _compile(net, N, cfg.intensity_convention)
    return _simulate_seeded(net, comp, n0, N, cfg, cfg.seed)


def ensemble(net: ReactionNetwork, n0: Sequence[int], N: int, cfg: SimConfig,
             replicas: int, threads: int | None = None) -> list[Trajectory]:
    """Independent replicas; replica ``r`` is seeded with ``split(cfg.seed, r)``.

    Output is bit-identical for any thread count.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    comp = _compile(net, N, cfg.intensity_convention)
    seeds = [split(cfg.seed, r) for r in range(replicas)]
    workers = min(resolve_threads(threads), replicas)
    if workers == 1:
        return [_simulate_seeded(net, comp, n0, N, cfg, s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: _simulate_seeded(net, comp, n0, N, cfg, s), seeds))


def _first_return_seeded(net, comp, n0, max_events, seed) -> int:
    n = _check_state(net, n0).copy()
    return int(_first_return_kernel(n, comp.keff, comp.r_ptr, comp.r_idx, comp.r_pow,
                                    comp.d_ptr, comp.d_idx, comp.d_val, comp.dep_ptr,
                                    comp.dep_idx, max_events, make_rng(seed)))


def first_return_jumps(net: ReactionNetwork, n0: Sequence[int], N: int, seed: int,
                       max_events: int = 10**8,
                       convention=IntensityConvention.KURTZ) -> int:
    """Jumps until ``n0`` recurs in one run of the embedded chain; -1 if the cap is hit."""
    return _first_return_seeded(net, _compile(net, N, convention), n0, max_events, seed)


def first_return_ensemble(net: ReactionNetwork, n0: Sequence[int], N: int, seed: int,
                          replicas: int, max_events: int = 10**8,
                          convention=IntensityConvention.KURTZ,
                          threads: int | None = None) -> np.ndarray:
    """:func:`first_return_jumps` for replicas seeded ``split(seed, r)``."""
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    comp = _compile(net, N, convention)
    seeds = [split(seed, r) for r in range(replicas)]
    run = lambda s: _first_return_seeded(net, comp, n0, max_events, s)
    workers = min(resolve_threads(threads), replicas)
    if workers == 1:
        return np.array([run(s) for s in seeds], dtype=np.int64)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(run, seeds)), dtype=np.int64)


def terminal_counts(trajectories: Sequence[Trajectory]) -> np.ndarray:
    return np.array([tr.counts[-1] for tr in trajectories], dtype=np.int64)
