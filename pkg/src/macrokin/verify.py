"""Desk-scale verification suites behind ``macrokin verify``.

Each suite is a short list of checks with a measured value, a target and a
pass flag.  Sizes are chosen to finish in seconds; the full-scale runs live
in the acceptance tests.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from math import comb

import numpy as np

from .equilibrium import (entropy_project, exact_chain, mean_return_time, solve_unitarity,
                          product_form_stationary, tv_mixing)
from .meanfield import OdeConfig, integrate, lv_first_integral
from .models import (ehrenfest, kac_noise_paths, kac_ring_new, kac_ring_paths, kac_ring_step,
                     lotka_volterra, lv_center, lv_period, majority_kernel, majority_oracle,
                     majority_run, majority_step, monkey_text, pagerank_surfers, pagerank_vector,
                     schlogl_ensemble, wealth_basis, wealth_exchange_days, wealth_histogram,
                     wealth_kinetic, yule_exponent, yule_run, zipf_mandelbrot_params)
from .models.registry import DEFAULT_PAGERANK
from .rng import make_rng, split
from .ssa import SimConfig, ensemble, terminal_counts
from .stats import (fit_exponential, fit_power_law, l2_concentration,
                    return_time_mc, urn_radius)


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    target: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["value"] = float(d["value"])
        return d


def _check(name, ok, value, target) -> Check:
    return Check(name, bool(ok), float(value), str(target))


def table(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  result  value          target"]
    for c in checks:
        lines.append(f"{c.name:<{width}}  {'PASS' if c.passed else 'FAIL':<6}  "
                     f"{c.value:<13.6g}  {c.target}")
    return "\n".join(lines)


def suite_ehrenfest(seed: int) -> list[Check]:
    out = []
    net, n0 = ehrenfest(100)
    trajs = ensemble(net, n0, 100, SimConfig(seed=seed, horizon=1000.0), 100)
    fin = terminal_counts(trajs)
    frac = np.mean(np.abs(fin[:, 0] - fin[:, 1]) / 100 <= urn_radius(100))
    out.append(_check("concentration N=100 t=1000 (100 replicas)", frac >= 0.99, frac, ">= 0.99"))
    net10, _ = ehrenfest(10)
    ch = exact_chain(net10, (10, 0), 10)
    _, jumps = mean_return_time(ch, ch.index((10, 0)))
    out.append(_check("exact return jumps N=10", abs(jumps / 1024 - 1) <= 1e-8, jumps, "1024"))
    net8, _ = ehrenfest(8)
    rep = return_time_mc(net8, (8, 0), 2000, seed, N=8)
    z = abs(rep.mean - 256) / rep.stderr
    out.append(_check("MC return jumps N=8 (z-score)", z <= 3, z, "<= 3"))
    net12, _ = ehrenfest(12)
    ch12 = exact_chain(net12, (12, 0), 12)
    binom = np.array([comb(12, int(s[0])) for s in ch12.states]) / 2 ** 12
    err = np.abs(ch12.stationary - binom).max()
    out.append(_check("stationary law N=12 vs binomial", err <= 1e-10, err, "<= 1e-10"))
    p0 = np.zeros(ch.n_states)
    p0[ch.index((10, 0))] = 1
    t = tv_mixing(ch, p0, 0.01, dt=0.01)
    out.append(_check("TV mixing time N=10 eps=0.01", np.isfinite(t), t, "finite"))
    return out


def suite_schlogl(seed: int) -> list[Check]:
    n = 10_000
    trajs = schlogl_ensemble(n, n, SimConfig(seed=seed, horizon=np.sqrt(n) * 0.1), 400)
    x = n ** 0.25 * (terminal_counts(trajs)[:, 0] / n - 1)
    var = x.var(ddof=1)
    out = [_check("Var X_n(0.1) vs 8t (400 replicas)", abs(var / 0.8 - 1) <= 0.25, var, "0.8 +- 25%")]
    n = 400
    y0 = int(1.2 * n)
    trajs = schlogl_ensemble(n, y0, SimConfig(seed=seed + 1, horizon=2.0, sample_dt=0.5), 400)
    means = np.mean([tr.counts[:, 0] for tr in trajs], axis=0) / n
    dec = bool(np.all(np.diff(means) < 0))
    out.append(_check("mean drifts down from 1.2", dec, means[-1], "decreasing"))
    return out


def suite_wealth(seed: int) -> list[Check]:
    out = []
    s_bar = 5
    net, n0 = wealth_kinetic(1000, s_bar)
    res = solve_unitarity(net)
    proj = entropy_project(res.xi, wealth_basis(10 * s_bar), [1.0, float(s_bar)])
    c = proj.c_star
    s = np.arange(c.size)
    slope, icept = np.polyfit(s, np.log(c), 1)
    resid = np.abs(np.log(c) - (slope * s + icept)).max()
    out.append(_check("projection is log-linear", resid <= 1e-6, resid, "<= 1e-6"))
    N = 1000
    days = int(np.ceil(20 * np.log(N)))
    hist = sum(wealth_histogram(wealth_exchange_days(N, s_bar, days, split(seed, r)).coins, 60)
               for r in range(20))
    rate_days = fit_exponential(hist).parameter
    out.append(_check("day model rate vs 1/s_bar", abs(rate_days * s_bar - 1) <= 0.1,
                      rate_days, "0.2 +- 10%"))
    horizon = 10 * N * np.log(N) / (0.4 * N)
    trajs = ensemble(net, n0, N, SimConfig(seed=seed, horizon=horizon), 5)
    hk = terminal_counts(trajs).sum(axis=0)
    rate_kin = fit_exponential(hk).parameter
    out.append(_check("kinetic vs day model rate", abs(rate_kin / rate_days - 1) <= 0.1,
                      rate_kin, f"{rate_days:.4f} +- 10%"))
    return out


def suite_lv(seed: int) -> list[Check]:
    mu3, mu6, K = 0.5, 0.4, 1.0
    net, _ = lotka_volterra(mu3, mu6, K)
    center = lv_center(mu3, mu6, K)
    tr = integrate(net, center * np.array([1.3, 0.8]), 20.0, OdeConfig(step_dt=1e-3))
    h = np.array([lv_first_integral(c, mu3, mu6, K) for c in tr.values])
    drift = np.abs(h - h[0]).max() / abs(h[0])
    out = [_check("first integral drift T=20", drift <= 1e-5, drift, "<= 1e-5")]
    period = measured_period(net, center, 0.01, 3 * lv_period(mu3, mu6))
    rel = abs(period / lv_period(mu3, mu6) - 1)
    out.append(_check("small-oscillation period", rel <= 0.02, period,
                      f"{lv_period(mu3, mu6):.4f} +- 2%"))
    res = solve_unitarity(net)
    out.append(_check("unitarity infeasible", not res.feasible, res.residual, "feasible = false"))
    return out


def measured_period(net, center, amplitude: float, T: float, step: float = 1e-3) -> float:
    """Mean spacing of upward crossings of the prey center line."""
    tr = integrate(net, center * np.array([1 + amplitude, 1.0]), T, OdeConfig(step_dt=step))
    x = tr.values[:, 0] - center[0]
    idx = np.flatnonzero((x[:-1] < 0) & (x[1:] >= 0))
    t = tr.times
    cross = t[idx] - x[idx] * (t[idx + 1] - t[idx]) / (x[idx + 1] - x[idx])
    if cross.size < 2:
        raise ValueError("fewer than two crossings; lengthen T")
    return float(np.diff(cross).mean())


def suite_kac(seed: int) -> list[Check]:
    out = []
    st = kac_ring_new(1000, 0.1, seed=seed)
    cur = st
    for _ in range(2000):
        cur = kac_ring_step(cur)
    out.append(_check("2n-periodicity n=1000", np.array_equal(cur.colors, st.colors),
                      float(np.abs(cur.colors - st.colors).sum()), "0"))
    n, T, R = 10_000, 20, 300
    for mu in (0.1, 0.3):
        paths = kac_ring_paths(n, mu, T, R, seed)
        mean = paths.mean(axis=0)
        se = np.maximum(paths.std(axis=0, ddof=1) / np.sqrt(R), 1e-12)
        z = np.abs(mean - (1 - 2 * mu) ** np.arange(T + 1)) / se
        out.append(_check(f"mean factor mu={mu} (max z over t<=20)", z.max() <= 4, z.max(), "<= 4"))
    p, mu = 0.1, 0.1
    paths = kac_ring_paths(n, mu, 5, R, seed, p=p)
    t = np.arange(1, 6)
    ratio = paths[:, 1:].var(axis=0, ddof=1) / ((1 - 2 * mu) ** (2 * t) * (1 - 2 * p) ** (2 * t) / n)
    worst = np.abs(np.log(ratio)).max()
    out.append(_check("noisy variance within factor 2", worst <= np.log(2), np.exp(worst),
                      "ratio in [1/2, 2]"))
    base = kac_ring_new(200, 0.1, p=p, seed=seed)
    noisy = kac_noise_paths(base, 8, 5000, seed)
    det = _deterministic_path(base, 8)
    fac = np.abs(noisy.mean(axis=0)[1:] / det[1:])
    slope = np.polyfit(np.arange(1, 9), np.log(fac), 1)[0]
    rel = abs(slope / np.log(1 - 2 * p) - 1)
    out.append(_check("fixed Q noise factor slope", rel <= 0.05, slope,
                      f"{np.log(1 - 2 * p):.4f} +- 5%"))
    return out


def _deterministic_path(state, T: int) -> np.ndarray:
    cur = replace(state, flip_prob=0.0)
    vals = [cur.colors.mean()]
    for _ in range(T):
        cur = kac_ring_step(cur)
        vals.append(cur.colors.mean())
    return np.array(vals)


def suite_power_laws(seed: int) -> list[Check]:
    out = []
    for alpha in (0.0, 0.5):
        h = yule_run(alpha, 10**6, seed)
        s = np.arange(h.size)
        e = fit_power_law(h[1:], x=s[1:]).parameter
        target = yule_exponent(alpha)
        out.append(_check(f"Yule exponent alpha={alpha}", abs(e - target) <= 0.2, e,
                          f"{target:.3f} +- 0.2"))
    a, B, _ = zipf_mandelbrot_params(4)
    tb = monkey_text(4, 10**7, seed)
    e = fit_power_law(tb.counts, offset=B, weighting="log").parameter
    out.append(_check("monkey rank exponent n=4", abs(e - a) <= 0.05, e, f"{a:.4f} +- 0.05"))
    return out


def suite_pagerank(seed: int) -> list[Check]:
    L = np.array(DEFAULT_PAGERANK)
    p = pagerank_vector(L)
    N = 10_000
    net, n0 = pagerank_surfers(L, N)
    res = solve_unitarity(net)
    err = np.abs(res.xi - p).max()
    out = [_check("xi equals stationary p", err <= 1e-8, err, "<= 1e-8")]
    trajs = ensemble(net, n0, N, SimConfig(seed=seed, horizon=20.0), 100)
    rep = l2_concentration(terminal_counts(trajs), N, p, 0.01)
    out.append(_check("concentration sigma=0.01 (100 replicas)", rep.violations == 0,
                      rep.max_distance, f"< {rep.threshold:.4f}"))
    small, s0 = pagerank_surfers(L, 6)
    ch = exact_chain(small, s0, 6)
    err = np.abs(product_form_stationary(ch, res.xi) - ch.stationary).max()
    out.append(_check("multinomial stationary law N=6", err <= 1e-10, err, "<= 1e-10"))
    return out


def suite_majority(seed: int) -> list[Check]:
    N, k0, R = 9, 6, 2000
    runs = [majority_run(N, k0, split(seed, r)) for r in range(R)]
    finals = np.array([f for f, _ in runs])
    p_hat = np.mean(finals == N)
    p = majority_oracle(N).p_plus[k0]
    z = abs(p_hat - p) / np.sqrt(p * (1 - p) / R)
    out = [_check("consensus probability vs oracle (z)", z <= 3, z, "<= 3"),
           _check("all runs reach consensus", np.all((finals == 0) | (finals == N)),
                  np.mean((finals == 0) | (finals == N)), "1")]
    up, down = majority_kernel(N)
    rng = make_rng(seed)
    k = 4
    steps = 20_000
    moves = np.array([majority_step(k, N, rng) - k for _ in range(steps)])
    obs = np.array([np.sum(moves == -1), np.sum(moves == 0), np.sum(moves == 1)])
    exp = steps * np.array([down[k], 1 - up[k] - down[k], up[k]])
    chi2 = float(((obs - exp) ** 2 / exp).sum())
    out.append(_check("step kernel chi-square (2 dof)", chi2 <= 13.8, chi2, "<= 13.8 (p=0.001)"))
    return out


SUITES = {
    "ehrenfest": suite_ehrenfest,
    "schlogl": suite_schlogl,
    "wealth": suite_wealth,
    "lv": suite_lv,
    "kac": suite_kac,
    "power_laws": suite_power_laws,
    "pagerank": suite_pagerank,
    "majority": suite_majority,
}


def run_suite(name: str, seed: int = 0) -> list[Check]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; valid suites: {', '.join(SUITES)}")
    return SUITES[name](seed)
