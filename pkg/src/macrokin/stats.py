"""Statistical checks: concentration radii, exponential and power-law fits,
total-variation distance and Monte Carlo return times."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .network import ReactionNetwork
from .rng import split
from .ssa import IntensityConvention, first_return_ensemble


def concentration_threshold(N: int, sigma: float) -> float:
    """``(2 sqrt 2 + 4 sqrt(ln 1/sigma)) / sqrt N``."""
    if not 0 < sigma < 1:
        raise ValueError("sigma must lie in (0, 1)")
    if N < 1:
        raise ValueError("N must be >= 1")
    return (2 * np.sqrt(2) + 4 * np.sqrt(np.log(1 / sigma))) / np.sqrt(N)


def urn_radius(N: int) -> float:
    """The two-urn radius ``3 / sqrt N`` (holds with probability >= 0.99)."""
    return 3.0 / np.sqrt(N)


@dataclass(frozen=True)
class ConcentrationReport:
    threshold: float
    violations: int
    replicas: int
    sigma_target: float
    passed: bool
    max_distance: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def l2_concentration(states, N: int, c_star, sigma: float,
                     threshold: float | None = None) -> ConcentrationReport:
    """Fraction of states with ``||n/N - c*||_2 >= threshold`` against ``sigma``.

    ``states`` is an array of count vectors sharing the scale ``N``.  The
    default threshold is :func:`concentration_threshold`.
    """
    states = np.asarray(states, dtype=float)
    if states.size == 0:
        raise ValueError("empty ensemble")
    states = np.atleast_2d(states)
    c_star = np.asarray(c_star, dtype=float)
    if states.shape[1] != c_star.size:
        raise ValueError("states and c_star differ in dimension")
    thr = concentration_threshold(N, sigma) if threshold is None else float(threshold)
    dist = np.linalg.norm(states / N - c_star[None, :], axis=1)
    v = int(np.sum(dist >= thr))
    R = len(states)
    return ConcentrationReport(float(thr), v, R, float(sigma), v / R <= sigma, float(dist.max()))


@dataclass(frozen=True)
class FitReport:
    model: str
    parameter: float
    fit_range: tuple[float, float]
    residual: float
    intercept: float
    points: int

    def to_dict(self) -> dict:
        return asdict(self)


def _is_integral(y: np.ndarray) -> bool:
    return bool(np.all(y == np.round(y)))


def _lsq(x: np.ndarray, y: np.ndarray, w: np.ndarray | None = None):
    A = np.vstack([x, np.ones_like(x)]).T
    sw = np.ones_like(x) if w is None else np.sqrt(w)
    (slope, icept), *_ = np.linalg.lstsq(A * sw[:, None], y * sw, rcond=None)
    resid = y - (slope * x + icept)
    return float(slope), float(icept), float(np.sqrt(np.mean(resid ** 2)))


def fit_exponential(hist, s=None, min_count: float | None = None) -> FitReport:
    """Least squares of ``ln c_s`` against ``s``; ``rate = -slope``.

    Bins below ``min_count`` are ignored.  The default is 5 for integer
    count data and 0 (positive bins only) for real-valued data.
    """
    y = np.asarray(hist, dtype=float)
    x = np.arange(y.size, dtype=float) if s is None else np.asarray(s, dtype=float)
    if min_count is None:
        min_count = 5 if _is_integral(y) else 0
    keep = (y > 0) & (y >= min_count)
    if keep.sum() < 3:
        raise ValueError("need at least 3 positive bins above min_count")
    slope, icept, res = _lsq(x[keep], np.log(y[keep]))
    return FitReport("exponential", -slope, (float(x[keep].min()), float(x[keep].max())),
                     res, icept, int(keep.sum()))


def _log_weights(lx: np.ndarray) -> np.ndarray:
    """Share of the log-range covered by each point (Voronoi cells in log x)."""
    if lx.size < 2:
        return np.ones_like(lx)
    edges = np.empty(lx.size + 1)
    edges[1:-1] = 0.5 * (lx[1:] + lx[:-1])
    edges[0] = lx[0] - 0.5 * (lx[1] - lx[0])
    edges[-1] = lx[-1] + 0.5 * (lx[-1] - lx[-2])
    return np.diff(edges)


def fit_power_law(y, x=None, head: int = 5, min_count: float | None = None,
                  offset: float = 0.0, weighting: str = "uniform") -> FitReport:
    """Log-log least squares of ``y`` against ``x + offset``; exponent = -slope.

    ``x`` defaults to ranks ``1..len(y)``.  The first ``head`` points are
    dropped, as are zeros and values below ``min_count`` (default 10 for
    integer counts, 0 for real data).  ``weighting="log"`` weights each
    point by the share of the log-range it represents, so that the dense
    tail of a rank plot does not dominate.
    """
    y = np.asarray(y, dtype=float)
    if y.size < 10:
        raise ValueError("need at least 10 points")
    x = np.arange(1, y.size + 1, dtype=float) if x is None else np.asarray(x, dtype=float)
    if x.shape != y.shape:
        raise ValueError("x and y differ in length")
    if min_count is None:
        min_count = 10 if _is_integral(y) else 0
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    keep = np.zeros(y.size, bool)
    keep[head:] = True
    keep &= (y > 0) & (y >= min_count) & (x + offset > 0)
    if keep.sum() < 3:
        raise ValueError("fewer than 3 points left after trimming")
    lx = np.log(x[keep] + offset)
    if weighting == "uniform":
        w = None
    elif weighting == "log":
        w = _log_weights(lx)
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    slope, icept, res = _lsq(lx, np.log(y[keep]), w)
    return FitReport("power_law", -slope, (float(x[keep].min()), float(x[keep].max())),
                     res, icept, int(keep.sum()))


def tv_distance(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions differ in support size")
    return 0.5 * float(np.abs(p - q).sum())


def empirical_tv(samples, states, pi) -> float:
    """``1/2 sum |empirical - pi|`` over the enumerated ``states``.

    ``samples`` are count vectors (rows); each must be one of ``states``.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=np.int64))
    states = np.asarray(states, dtype=np.int64)
    lookup = {tuple(s): i for i, s in enumerate(states.tolist())}
    hits = np.zeros(len(states))
    for s in samples.tolist():
        i = lookup.get(tuple(s))
        if i is None:
            raise KeyError(f"sampled state {tuple(s)} is not enumerated")
        hits[i] += 1
    return tv_distance(hits / len(samples), pi)


@dataclass(frozen=True)
class ReturnTimeReport:
    mean: float
    stderr: float
    replicas: int
    truncated: int

    def to_dict(self) -> dict:
        return asdict(self)


def return_time_mc(model: ReactionNetwork | Callable[[int], int], start: Sequence[int] | None,
                   replicas: int, seed: int, N: int | None = None,
                   max_events: int = 10**8,
                   convention=IntensityConvention.KURTZ) -> ReturnTimeReport:
    """Mean jump count until ``start`` first recurs.

    ``model`` is a network (simulated at scale ``N``) or a callable mapping a
    replica seed to a jump count, with -1 marking a run that hit its cap.
    Capped runs are excluded from the mean and counted in ``truncated``.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    if isinstance(model, ReactionNetwork):
        if N is None or start is None:
            raise ValueError("a network needs a start state and a scale N")
        jumps = first_return_ensemble(model, start, N, seed, replicas, max_events, convention)
    else:
        jumps = np.array([model(split(seed, r)) for r in range(replicas)], dtype=np.int64)
    ok = jumps[jumps >= 0].astype(float)
    trunc = int(np.sum(jumps < 0))
    if ok.size == 0:
        return ReturnTimeReport(float("nan"), float("nan"), replicas, trunc)
    se = float(ok.std(ddof=1) / np.sqrt(ok.size)) if ok.size > 1 else 0.0
    return ReturnTimeReport(float(ok.mean()), se, replicas, trunc)
