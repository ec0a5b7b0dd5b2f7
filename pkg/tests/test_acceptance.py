"""Acceptance criteria at their stated scale, one pass/fail line each."""

from math import comb

import numpy as np
import pytest

from macrokin.cli import main
from macrokin.equilibrium import (entropy_project, exact_chain, mean_return_time,
                                  product_form_stationary, solve_unitarity, unitarity_family)
from macrokin.meanfield import OdeConfig, gw_rhs, integrate, lv_first_integral, lyapunov_kl
from macrokin.models import (MODELS, ehrenfest, kac_noise_paths, kac_ring_new,
                             kac_ring_paths, kac_ring_step, lotka_volterra, lv_center, lv_period,
                             majority_oracle, majority_run, monkey_text, pagerank_surfers,
                             pagerank_vector, schlogl_ensemble, wealth_exchange_days,
                             wealth_histogram, wealth_kinetic, yule_exponent, yule_run,
                             zipf_mandelbrot_params)
from macrokin.models.registry import DEFAULT_PAGERANK
from macrokin.network import ConservationBasis, conservation_laws, invariant_values
from macrokin.rng import split
from macrokin.ssa import SimConfig, ensemble, terminal_counts
from macrokin.stats import (fit_exponential, fit_power_law, l2_concentration, return_time_mc,
                            urn_radius)
from macrokin.verify import _deterministic_path, measured_period

pytestmark = pytest.mark.acceptance


def test_c01_ehrenfest_concentration(criterion):
    N = 100
    net, n0 = ehrenfest(N)
    trajs = ensemble(net, n0, N, SimConfig(seed=1, horizon=1000.0), 500)
    fin = terminal_counts(trajs)
    frac = np.mean(np.abs(fin[:, 0] - fin[:, 1]) / N <= urn_radius(N))
    ok = criterion("C1 Ehrenfest concentration", frac >= 0.99, f"fraction={frac:.3f} (>= 0.99)")
    assert ok


def test_c02_ehrenfest_return_time(criterion):
    net, n0 = ehrenfest(10)
    ch = exact_chain(net, n0, 10)
    s = ch.index(n0)
    _, jumps = mean_return_time(ch, s)
    _, jumps_fp = mean_return_time(ch, s, method="first_passage")
    exact_ok = abs(jumps / 1024 - 1) <= 1e-8 and abs(jumps_fp / 1024 - 1) <= 1e-8
    net8, n08 = ehrenfest(8)
    rep = return_time_mc(net8, n08, 4000, seed=2, N=8)
    z = abs(rep.mean - 256) / rep.stderr
    ok = criterion("C2 Ehrenfest return time", exact_ok and z <= 3 and rep.truncated == 0,
                   f"exact={jumps:.10g}, oracle={jumps_fp:.10g}, MC={rep.mean:.1f}+-{rep.stderr:.1f} "
                   f"(z={z:.2f})")
    assert ok


SMALL_PARAMS = {
    "ehrenfest": {"N": 12},
    "schlogl": {"n": 12},
    "lotka_volterra": {"N": 12},
    "wealth_kinetic": {"N": 8, "s_bar": 2, "s_max": 8},
    "pagerank": {"N": 8},
}


def test_c03_stationary_law(criterion):
    net, n0 = ehrenfest(12)
    ch = exact_chain(net, n0, 12)
    binom = np.array([comb(12, int(s[0])) for s in ch.states]) / 2**12
    err_binom = np.abs(ch.stationary - binom).max()
    errs = {}
    infeasible = []
    for name, entry in MODELS.items():
        if entry.kind != "network":
            continue
        built = entry.build(SMALL_PARAMS[name])
        res = solve_unitarity(built.network)
        if not res.feasible:
            infeasible.append(name)
            continue
        chain = exact_chain(built.network, built.n0, built.N)
        errs[name] = np.abs(chain.stationary - product_form_stationary(chain, res.xi)).max()
    worst = max(errs.values())
    ok = criterion("C3 stationary law", err_binom <= 1e-10 and worst <= 1e-10,
                   f"binomial err={err_binom:.1e}; product form max err={worst:.1e} over "
                   f"{sorted(errs)}; infeasible: {sorted(infeasible)}")
    assert ok


def test_c04_kurtz_convergence(criterion):
    grid = SimConfig(seed=0, horizon=5.0, sample_dt=0.05).grid()
    exact = 0.5 + 0.5 * np.exp(-2 * grid)
    err = {}
    for N in (400, 6400):
        net, n0 = ehrenfest(N)
        trajs = ensemble(net, n0, N, SimConfig(seed=N, horizon=5.0, sample_dt=0.05), 100)
        sup = [np.abs(tr.counts[:, 0] / N - exact).max() for tr in trajs]
        err[N] = float(np.mean(sup))
    ratio = err[400] / err[6400]
    ok = criterion("C4 Kurtz convergence", err[6400] < err[400] and 2 <= ratio <= 8,
                   f"err(400)={err[400]:.4f}, err(6400)={err[6400]:.4f}, ratio={ratio:.2f}")
    assert ok


def test_c05_lyapunov_monotone(criterion):
    nets = {
        "ehrenfest": ehrenfest(1)[0],
        "wealth_kinetic": wealth_kinetic(10, 2, s_max=10)[0],
        "pagerank": pagerank_surfers(np.array(DEFAULT_PAGERANK), 10)[0],
    }
    rng = np.random.default_rng(5)
    worst = -np.inf
    for net in nets.values():
        xi = solve_unitarity(net).xi
        for _ in range(20):
            c0 = rng.dirichlet(np.ones(net.n_species))
            tr = integrate(net, c0, 10.0, OdeConfig(step_dt=1e-2))
            kl = np.array([lyapunov_kl(c, xi) for c in tr.values])
            worst = max(worst, np.diff(kl).max())
    ok = criterion("C5 Lyapunov monotonicity", worst <= 1e-9,
                   f"largest per-step KL increase={worst:.2e} (<= 1e-9) over 60 paths")
    assert ok


def _grid_min(f, pts):
    vals = np.array([f(p) for p in pts])
    return pts[np.argmin(vals)]


def test_c06_entropy_projection(criterion):
    net, n0 = wealth_kinetic(20, 2, s_max=6)
    basis = conservation_laws(net)
    b = np.array(invariant_values(basis, n0)) / 20
    res = solve_unitarity(net)
    ref = entropy_project(res.xi, basis, b)
    rng = np.random.default_rng(6)
    other = unitarity_family(res.xi, basis, rng.normal(size=len(basis)))
    alt = entropy_project(other, basis, b)
    indep = np.abs(alt.c_star - ref.c_star).max()
    rest = np.abs(gw_rhs(net, ref.c_star)).max()

    h = 1e-3
    g = np.arange(0, 1 + h / 2, h)
    # three wealth classes, sum 1 and mean 1: c = (t, 1 - 2t, t)
    grid1 = np.array([[t, 1 - 2 * t, t] for t in g if 1 - 2 * t >= 0])
    xi1 = np.full(3, 1 / 3)
    p1 = entropy_project(xi1, ConservationBasis(((1, 1, 1), (0, 1, 2)), 3), [1.0, 1.0])
    kl = lambda c: float(np.sum(np.where(c > 0, c * np.log(np.where(c > 0, c, 1) / xi1), 0)))
    err1 = np.abs(_grid_min(kl, grid1) - p1.c_star).max()
    # no all-ones law: c1 + 2 c2 + 3 c3 = 2, generalized divergence
    xi2 = np.array([0.7, 0.4, 0.2])
    p2 = entropy_project(xi2, ConservationBasis(((1, 2, 3),), 3), [2.0])
    c2, c3 = np.meshgrid(g, g)
    c1 = 2 - 2 * c2 - 3 * c3
    keep = c1 >= 0
    grid2 = np.stack([c1[keep], c2[keep], c3[keep]], axis=1)
    gkl = lambda c: float(np.sum(np.where(c > 0, c * np.log(np.where(c > 0, c, 1) / xi2), 0) - c))
    err2 = np.abs(_grid_min(gkl, grid2) - p2.c_star).max()
    ok = criterion("C6 entropy projection",
                   indep <= 1e-8 and rest <= 1e-8 and err1 <= 2 * h and err2 <= 6 * h,
                   f"independence={indep:.1e}, |rhs(c*)|={rest:.1e}, grid errs={err1:.1e}, "
                   f"{err2:.1e} (resolution {h})")
    assert ok


def test_c07_wealth(criterion):
    N, s_bar = 1000, 5
    events = 10 * N * np.log(N)
    days = int(np.ceil(events / (N / 2)))
    hist_days = sum(wealth_histogram(wealth_exchange_days(N, s_bar, days, split(7, r)).coins, 80)
                    for r in range(20))
    rate_days = fit_exponential(hist_days).parameter
    net, n0 = wealth_kinetic(N, s_bar)
    horizon = events / (0.35 * N)
    trajs = ensemble(net, n0, N, SimConfig(seed=7, horizon=horizon), 10)
    min_jumps = min(tr.jump_count for tr in trajs)
    rate_kin = fit_exponential(terminal_counts(trajs).sum(axis=0)).parameter
    ok_days = abs(rate_days * s_bar - 1) <= 0.1
    ok_kin = abs(rate_kin * s_bar - 1) <= 0.1
    agree = abs(rate_kin / rate_days - 1) <= 0.1
    ok = criterion("C7 wealth equilibrium", ok_days and ok_kin and agree and min_jumps >= events,
                   f"day rate={rate_days:.4f}, kinetic rate={rate_kin:.4f} (target 0.2 +- 10%), "
                   f"min jumps={min_jumps} (>= {events:.0f})")
    assert ok


def test_c08_lotka_volterra(criterion):
    mu3, mu6, K = 0.5, 0.4, 1.0
    net, _ = lotka_volterra(mu3, mu6, K)
    center = lv_center(mu3, mu6, K)
    tr = integrate(net, center * np.array([1.3, 0.8]), 20.0, OdeConfig(step_dt=1e-3))
    h = np.array([lv_first_integral(c, mu3, mu6, K) for c in tr.values])
    drift = np.abs(h - h[0]).max() / abs(h[0])
    T0 = lv_period(mu3, mu6)
    period = measured_period(net, center, 0.01, 3 * T0)
    rel = abs(period / T0 - 1)
    res = solve_unitarity(net)
    ok = criterion("C8 Lotka-Volterra", drift <= 1e-5 and rel <= 0.02 and not res.feasible,
                   f"drift={drift:.1e}, period={period:.4f} vs {T0:.4f}, "
                   f"feasible={res.feasible}")
    assert ok


def test_c09_schlogl(criterion):
    n, t = 10_000, 0.1
    trajs = schlogl_ensemble(n, n, SimConfig(seed=9, horizon=np.sqrt(n) * t), 2000)
    x = n ** 0.25 * (terminal_counts(trajs)[:, 0] / n - 1)
    var = x.var(ddof=1)
    up = schlogl_ensemble(400, 480, SimConfig(seed=10, horizon=2.0, sample_dt=0.5), 400)
    m_up = np.mean([tr.counts[:, 0] for tr in up], axis=0)
    down = schlogl_ensemble(400, 320, SimConfig(seed=11, horizon=2.0, sample_dt=0.5), 400)
    m_down = np.mean([tr.counts[:, 0] for tr in down], axis=0)
    signs = bool(np.all(np.diff(m_up) < 0) and np.all(np.diff(m_down) > 0))
    ok = criterion("C9 Schlogl scaling", abs(var / (8 * t) - 1) <= 0.25 and signs,
                   f"Var X(0.1)={var:.3f} (0.8 +- 25%), drift toward 1 from both sides={signs}")
    assert ok


def test_c10a_kac_periodicity(criterion):
    st = kac_ring_new(1000, 0.1, seed=10)
    cur = st
    for _ in range(2000):
        cur = kac_ring_step(cur)
    ok = criterion("C10a Kac 2n-periodicity", np.array_equal(cur.colors, st.colors),
                   "n=1000, fixed Q")
    assert ok


def test_c10b_kac_mean_factor(criterion):
    n, T, R = 10_000, 20, 2000
    zs = {}
    for mu in (0.1, 0.3):
        paths = kac_ring_paths(n, mu, T, R, seed=11)
        # with m fixed, S(1) = 1 - 2 mu in every replica; the floor absorbs rounding
        se = np.maximum(paths.std(axis=0, ddof=1) / np.sqrt(R), 1e-12)
        zs[mu] = float((np.abs(paths.mean(axis=0) - (1 - 2 * mu) ** np.arange(T + 1)) / se).max())
    ok = criterion("C10b Kac mean factor", max(zs.values()) <= 4,
                   f"max z over t<=20: mu=0.1 {zs[0.1]:.2f}, mu=0.3 {zs[0.3]:.2f} (<= 4)")
    assert ok


def test_c10c_kac_noisy_variance(criterion):
    n, T, R, mu, p = 10_000, 20, 2000, 0.1, 0.1
    paths = kac_ring_paths(n, mu, T, R, seed=12, p=p)
    t = np.arange(1, T + 1)
    claim = (1 - 2 * mu) ** (2 * t) * (1 - 2 * p) ** (2 * t) / n
    ratio = paths[:, 1:].var(axis=0, ddof=1) / claim
    worst = float(np.exp(np.abs(np.log(ratio)).max()))
    ok = criterion("C10c Kac noisy variance", worst <= 2,
                   f"worst ratio to (1/n)(1-2mu)^2t(1-2p)^2t = {worst:.3g} (needs <= 2)")
    assert ok


def test_c10d_kac_fixed_q_noise(criterion):
    p = 0.1
    base = kac_ring_new(200, 0.1, p=p, seed=13)
    noisy = kac_noise_paths(base, 8, 20_000, seed=13)
    det = _deterministic_path(base, 8)
    fac = np.abs(noisy.mean(axis=0)[1:] / det[1:])
    slope = np.polyfit(np.arange(1, 9), np.log(fac), 1)[0]
    rel = abs(slope / np.log(1 - 2 * p) - 1)
    ok = criterion("C10d Kac fixed-Q noise decay", rel <= 0.05,
                   f"log slope={slope:.4f} vs ln(1-2p)={np.log(1 - 2 * p):.4f} (5%)")
    assert ok


def test_c11_power_laws(criterion):
    parts = []
    ok = True
    for alpha in (0.0, 0.5):
        hist = yule_run(alpha, 10**6, seed=14)
        s = np.arange(hist.size)
        e = fit_power_law(hist[1:], x=s[1:]).parameter
        ok &= abs(e - yule_exponent(alpha)) <= 0.2
        parts.append(f"Yule alpha={alpha}: {e:.3f} vs {yule_exponent(alpha):.3f}")
    a, B, _ = zipf_mandelbrot_params(4)
    table = monkey_text(4, 10**7, seed=15)
    e = fit_power_law(table.counts, offset=B, weighting="log").parameter
    ok &= abs(e - a) <= 0.05
    parts.append(f"monkey n=4: {e:.4f} vs {a:.4f}")
    assert criterion("C11 power laws", ok, "; ".join(parts))


def test_c12_pagerank(criterion):
    L = np.array(DEFAULT_PAGERANK)
    p = pagerank_vector(L)
    N = 10_000
    net, n0 = pagerank_surfers(L, N)
    res = solve_unitarity(net)
    err = np.abs(res.xi - p).max()
    trajs = ensemble(net, n0, N, SimConfig(seed=16, horizon=30.0), 300)
    rep = l2_concentration(terminal_counts(trajs), N, p, 0.01)
    frac = 1 - rep.violations / rep.replicas
    ok = criterion("C12 PageRank surfers", frac >= 0.99 and err <= 1e-8,
                   f"within threshold {rep.threshold:.4f}: {frac:.3f}; |xi - p|={err:.1e}")
    assert ok


def test_c13_majority(criterion):
    N, k0, R = 9, 6, 10_000
    runs = np.array([majority_run(N, k0, split(17, r)) for r in range(R)])
    finals, steps = runs[:, 0], runs[:, 1]
    o = majority_oracle(N)
    p = o.p_plus[k0]
    z_p = abs(np.mean(finals == N) - p) / np.sqrt(p * (1 - p) / R)
    z_t = abs(steps.mean() - o.mean_steps[k0]) / np.sqrt(o.var_steps[k0] / R)
    all_done = bool(np.all((finals == 0) | (finals == N)))
    ok = criterion("C13 majority rule", z_p <= 3 and z_t <= 3 and all_done,
                   f"P(+ consensus) z={z_p:.2f}, mean steps z={z_t:.2f}, all consensus={all_done}")
    assert ok


def _snapshot(out, capsys):
    files = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
    return files, capsys.readouterr().out


def test_c14_determinism(tmp_path, monkeypatch, capsys, criterion):
    rxn = tmp_path / "cycle.rxn"
    rxn.write_text("A -> B @ 1\nB -> C @ 2\nC -> A @ 0.5\n2 A -> A + B @ 0.1\n")
    commands = [
        ["simulate", "--model", "pagerank", "--N", "500", "--horizon", "5", "--replicas", "16",
         "--seed", "3", "--threads", "8"],
        ["simulate", "--network", str(rxn), "--n0", "40,0,0", "--horizon", "20",
         "--sample-dt", "0.5", "--seed", "4"],
        ["simulate", "--model", "kac_ring", "--params", "n=500", "T=10", "p=0.1",
         "--replicas", "20", "--seed", "5"],
        ["simulate", "--model", "wealth_days", "--params", "N=100", "--replicas", "4",
         "--format", "json"],
        ["meanfield", "--model", "lotka_volterra", "--T", "5", "--record-every", "50"],
        ["equilibrium", "--model", "ehrenfest", "--N", "10"],
    ]
    mismatched = []
    for i, cmd in enumerate(commands):
        snaps = []
        for j, threads in enumerate(("1", "8", "8")):
            monkeypatch.setenv("MACROKIN_THREADS", threads)
            out = tmp_path / f"run{i}_{j}"
            assert main([*cmd, "--output", str(out)]) == 0
            snaps.append(_snapshot(out, capsys))
        if not snaps[0] == snaps[1] == snaps[2]:
            mismatched.append(cmd[0] + " " + cmd[2])
    ok = criterion("C14 determinism", not mismatched,
                   f"{len(commands)} invocations x (1, 8, 8) threads; mismatched: {mismatched}")
    assert ok
