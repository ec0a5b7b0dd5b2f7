"""Models by name, with parameter tables as accepted from the command line.

Network models build ``(network, n0, N)`` and are simulated by
:mod:`macrokin.ssa`; bespoke models run their own simulator and return
tables plus a summary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from ..network import ConservationBasis, ReactionNetwork
from ..rng import split
from ..stats import fit_exponential, fit_power_law
from .kac import kac_ring_paths
from .kinetic import (ehrenfest, lotka_volterra, pagerank_surfers, wealth_basis,
                      wealth_kinetic)
from .majority import majority_oracle, majority_run
from .monkey import monkey_text, zipf_mandelbrot_params
from .schlogl import schlogl_network
from .wealth import wealth_exchange_days, wealth_histogram
from .yule import yule_exponent, yule_run

DEFAULT_PAGERANK = [
    [-2.0, 1.0, 1.0, 0.0, 0.0],
    [0.0, -1.5, 1.0, 0.5, 0.0],
    [0.0, 0.0, -1.0, 0.5, 0.5],
    [0.5, 0.0, 0.0, -1.5, 1.0],
    [1.0, 0.5, 0.0, 0.0, -1.5],
]


@dataclass
class Built:
    network: ReactionNetwork
    n0: tuple[int, ...]
    N: int
    basis: ConservationBasis | None = None


@dataclass
class BespokeOutput:
    tables: dict[str, tuple[list[str], list[list[Any]]]]
    summary: dict[str, Any]


@dataclass
class ModelEntry:
    name: str
    kind: str  # "network" or "bespoke"
    defaults: dict[str, Any]
    factory: Callable
    doc: str = ""
    extras: dict[str, Any] = field(default_factory=dict)

    def resolve(self, params: dict[str, Any] | None) -> dict[str, Any]:
        params = dict(params or {})
        unknown = sorted(set(params) - set(self.defaults))
        if unknown:
            raise ValueError(f"model {self.name!r} has no parameter(s) {', '.join(unknown)}; "
                             f"known: {', '.join(sorted(self.defaults))}")
        return {**self.defaults, **params}

    def build(self, params=None) -> Built:
        if self.kind != "network":
            raise TypeError(f"model {self.name!r} is not a reaction network")
        return self.factory(self.resolve(params))

    def run(self, params, seed: int, replicas: int) -> BespokeOutput:
        if self.kind != "bespoke":
            raise TypeError(f"model {self.name!r} is simulated as a reaction network")
        return self.factory(self.resolve(params), seed, replicas)


# --------------------------------------------------------------------------
# network builders


def _ehrenfest(p):
    net, n0 = ehrenfest(int(p["N"]), float(p["lam"]))
    return Built(net, n0, int(p["N"]))


def _lv(p):
    net, n0 = lotka_volterra(float(p["mu3"]), float(p["mu6"]), float(p["K"]), int(p["N"]))
    return Built(net, n0, int(p["N"]))


def _pagerank(p):
    net, n0 = pagerank_surfers(np.asarray(p["rates"], dtype=float), int(p["N"]))
    return Built(net, n0, int(p["N"]))


def _wealth_kinetic(p):
    s_max = None if p["s_max"] is None else int(p["s_max"])
    net, n0 = wealth_kinetic(int(p["N"]), int(p["s_bar"]), s_max, float(p["lam"]))
    return Built(net, n0, int(p["N"]), wealth_basis(net.n_species - 1))


def _schlogl(p):
    n = int(p["n"])
    y0 = n if p["y0"] is None else int(p["y0"])
    return Built(schlogl_network(), (y0,), n)


# --------------------------------------------------------------------------
# bespoke runners


def _wealth_days(p, seed, replicas):
    N, s_bar = int(p["N"]), int(p["s_bar"])
    days = int(p["days"]) if p["days"] is not None else int(np.ceil(20 * np.log(N)))
    hist = np.zeros(1, dtype=np.int64)
    for r in range(replicas):
        h = wealth_histogram(wealth_exchange_days(N, s_bar, days, split(seed, r)).coins)
        if h.size > hist.size:
            hist = np.pad(hist, (0, h.size - hist.size))
        hist[:h.size] += h
    fit = fit_exponential(hist)
    rows = [[s, int(c)] for s, c in enumerate(hist)]
    return BespokeOutput({"histogram": (["s", "count"], rows)},
                         {"days": days, "fit": fit.to_dict(), "target_rate": 1.0 / s_bar})


def _majority(p, seed, replicas):
    N, k0 = int(p["N"]), int(p["k0"])
    runs = [majority_run(N, k0, split(seed, r)) for r in range(replicas)]
    finals = np.array([f for f, _ in runs])
    steps = np.array([s for _, s in runs])
    oracle = majority_oracle(N)
    rows = [[r, int(f), int(s)] for r, (f, s) in enumerate(runs)]
    return BespokeOutput({"runs": (["replica", "final", "steps"], rows)}, {
        "consensus_fraction": float(np.mean((finals == 0) | (finals == N))),
        "p_plus": float(np.mean(finals == N)),
        "p_plus_exact": float(oracle.p_plus[k0]),
        "mean_steps": float(steps.mean()),
        "mean_steps_exact": float(oracle.mean_steps[k0]),
    })


def _kac(p, seed, replicas):
    n, T = int(p["n"]), int(p["T"])
    mu = float(p["mu"])
    paths = kac_ring_paths(n, mu, T, replicas, seed, float(p["p"]), p["q_mode"])
    mean = paths.mean(axis=0)
    var = paths.var(axis=0, ddof=1) if replicas > 1 else np.zeros(T + 1)
    t = np.arange(T + 1)
    rows = [[int(k), float(m), float(v), float((1 - 2 * mu) ** k)]
            for k, m, v in zip(t, mean, var)]
    return BespokeOutput({"kac": (["t", "mean", "variance", "mean_factor"], rows)},
                         {"replicas": replicas})


def _yule(p, seed, replicas):
    alpha, days = float(p["alpha"]), int(p["days"])
    hist = np.zeros(1, dtype=np.int64)
    for r in range(replicas):
        h = yule_run(alpha, days, split(seed, r))
        if h.size > hist.size:
            hist = np.pad(hist, (0, h.size - hist.size))
        hist[:h.size] += h
    s = np.arange(hist.size)
    fit = fit_power_law(hist[1:], x=s[1:])
    rows = [[int(k), int(c)] for k, c in zip(s, hist) if c > 0]
    return BespokeOutput({"histogram": (["s", "count"], rows)},
                         {"fit": fit.to_dict(), "target_exponent": yule_exponent(alpha)})


def _monkey(p, seed, replicas):
    n = int(p["n_symbols"])
    table = monkey_text(n, int(p["length"]), seed)
    alpha, B, C = zipf_mandelbrot_params(n)
    fit = fit_power_law(table.counts, offset=B, weighting="log")
    return BespokeOutput({"rank_frequency": (["rank", "word", "count"], [list(r) for r in table.rows()])},
                         {"fit": fit.to_dict(), "alpha": alpha, "B": B, "C": C})


MODELS: dict[str, ModelEntry] = {e.name: e for e in [
    ModelEntry("ehrenfest", "network", {"N": 100, "lam": 1.0}, _ehrenfest,
               "two urns, balls hop at rate lam"),
    ModelEntry("schlogl", "network", {"n": 10_000, "y0": None}, _schlogl,
               "critical birth-death process at size n (network form)"),
    ModelEntry("lotka_volterra", "network", {"mu3": 0.5, "mu6": 0.4, "K": 1.0, "N": 100}, _lv,
               "predator-prey"),
    ModelEntry("wealth_days", "bespoke", {"N": 1000, "s_bar": 5, "days": None}, _wealth_days,
               "synchronous pairwise coin exchange"),
    ModelEntry("wealth_kinetic", "network", {"N": 1000, "s_bar": 5, "s_max": None, "lam": 1.0},
               _wealth_kinetic, "coin exchange as binary reactions between wealth classes"),
    ModelEntry("majority", "bespoke", {"N": 9, "k0": 6}, _majority, "majority rule on triples"),
    ModelEntry("pagerank", "network", {"rates": DEFAULT_PAGERANK, "N": 10_000}, _pagerank,
               "independent random surfers on a graph"),
    ModelEntry("kac_ring", "bespoke", {"n": 1000, "mu": 0.1, "p": 0.0, "T": 20,
                                       "q_mode": "fixed_count"}, _kac, "Kac ring"),
    ModelEntry("yule", "bespoke", {"alpha": 0.0, "days": 100_000}, _yule,
               "preferential attachment of coins"),
    ModelEntry("monkey", "bespoke", {"n_symbols": 4, "length": 1_000_000}, _monkey,
               "random typing, rank-frequency table"),
]}


def get_model(name: str) -> ModelEntry:
    try:
        return MODELS[name]
    except KeyError:
        raise KeyError(f"unknown model {name!r}; available: {', '.join(MODELS)}") from None
