import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from macrokin.meanfield import (MeanFieldBlowup, OdeConfig, gw_rhs, integrate, lv_first_integral,
                                lyapunov_kl)
from macrokin.models import ehrenfest, lotka_volterra, lv_center, lv_period, schlogl_network
from macrokin.network import Reaction, ReactionNetwork, conservation_laws, parse_network
from macrokin.ssa import propensities


def test_rhs_examples():
    net, _ = ehrenfest(1)
    np.testing.assert_allclose(gw_rhs(net, [0.8, 0.2]), [-0.6, 0.6])
    lv, _ = lotka_volterra(0.5, 0.4, 1.3)
    np.testing.assert_allclose(gw_rhs(lv, lv_center(0.5, 0.4, 1.3)), [0, 0], atol=1e-15)
    np.testing.assert_allclose(gw_rhs(schlogl_network(), [1.0]), [0.0], atol=1e-15)


def test_rhs_matches_printed_lv_system():
    mu3, mu6, K = 0.7, 0.3, 1.9
    net, _ = lotka_volterra(mu3, mu6, K)
    rng = np.random.default_rng(0)
    for c in rng.random((20, 2)) * 3:
        x, y = c
        np.testing.assert_allclose(gw_rhs(net, c), [mu3 * x - K * x * y, K * x * y - mu6 * y])


def test_zero_power_convention():
    net = parse_network("0 -> A @ 2\nA -> 0 @ 1")
    np.testing.assert_allclose(gw_rhs(net, [0.0]), [2.0])


def test_rhs_dimension_error():
    net, _ = ehrenfest(1)
    with pytest.raises(ValueError):
        gw_rhs(net, [1.0])


def test_integrate_matches_analytic_solution():
    net, _ = ehrenfest(1)
    tr = integrate(net, [1.0, 0.0], 5.0, OdeConfig(step_dt=1e-3))
    exact = 0.5 + 0.5 * np.exp(-2 * tr.times)
    assert np.abs(tr.values[:, 0] - exact).max() <= 1e-8
    assert tr.times[-1] == 5.0


def test_rk4_order():
    net, _ = ehrenfest(1)
    errs = []
    for h in (0.1, 0.05):
        tr = integrate(net, [1.0, 0.0], 2.0, OdeConfig(step_dt=h))
        errs.append(abs(tr.final[0] - (0.5 + 0.5 * np.exp(-4.0))))
    assert errs[0] / errs[1] >= 8


def test_fixed_point_is_constant():
    lv, _ = lotka_volterra(0.5, 0.4, 1.0)
    c = lv_center(0.5, 0.4, 1.0)
    tr = integrate(lv, c, 2.0, OdeConfig(step_dt=1e-2))
    assert np.abs(tr.values - c).max() <= 1e-12 * 2.0 / 1e-2


def test_lv_orbit_returns_after_period():
    mu3, mu6, K = 0.5, 0.4, 1.0
    net, _ = lotka_volterra(mu3, mu6, K)
    c0 = lv_center(mu3, mu6, K) * np.array([1.01, 1.0])
    T = lv_period(mu3, mu6)
    tr = integrate(net, c0, T, OdeConfig(step_dt=1e-3))
    assert np.abs(tr.final - c0).max() <= 1e-3


def test_last_step_shortened_and_recording():
    net, _ = ehrenfest(1)
    tr = integrate(net, [1.0, 0.0], 1.05, OdeConfig(step_dt=0.1, record_every=5))
    np.testing.assert_allclose(tr.times, [0, 0.5, 1.0, 1.05])


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_blowup_reports_last_time():
    net = parse_network("2 A -> 3 A @ 1")
    with pytest.raises(MeanFieldBlowup) as exc:
        integrate(net, [10.0], 10.0, OdeConfig(step_dt=1e-2))
    assert 0 < exc.value.last_time < 0.2


def test_bad_inputs():
    net, _ = ehrenfest(1)
    with pytest.raises(ValueError):
        OdeConfig(step_dt=0)
    with pytest.raises(ValueError):
        integrate(net, [-1.0, 1.0], 1.0)
    with pytest.raises(ValueError):
        integrate(net, [1.0, 0.0], 0.0)


def test_kl_examples():
    assert lyapunov_kl([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert lyapunov_kl([1.0, 0.0], [0.5, 0.5]) == pytest.approx(np.log(2))
    assert lyapunov_kl([0.8, 0.2], [0.5, 0.5]) == pytest.approx(0.19274, abs=1e-5)
    with pytest.raises(ValueError):
        lyapunov_kl([0.5, 0.5], [1.0, 0.0])


def test_lv_first_integral():
    assert lv_first_integral([1.0, 1.0], 1, 1, 1) == pytest.approx(-2.0)
    mu3, mu6, K = 0.5, 0.4, 1.0
    c = lv_center(mu3, mu6, K)
    h0 = lv_first_integral(c, mu3, mu6, K)
    for x in np.linspace(0.1, 1.5, 15):
        for y in np.linspace(0.1, 1.5, 15):
            if abs(x - c[0]) + abs(y - c[1]) > 1e-9:
                assert lv_first_integral([x, y], mu3, mu6, K) < h0
    with pytest.raises(ValueError):
        lv_first_integral([0.0, 1.0], 1, 1, 1)


def test_lv_first_integral_conserved():
    mu3, mu6, K = 0.5, 0.4, 1.0
    net, _ = lotka_volterra(mu3, mu6, K)
    tr = integrate(net, [0.6, 0.3], 20.0, OdeConfig(step_dt=1e-3))
    h = np.array([lv_first_integral(c, mu3, mu6, K) for c in tr.values])
    assert np.abs(h - h[0]).max() / abs(h[0]) <= 1e-5


@st.composite
def networks(draw):
    S = draw(st.integers(1, 4))
    vec = st.lists(st.integers(0, 2), min_size=S, max_size=S).map(tuple)
    reactions = []
    for _ in range(draw(st.integers(1, 5))):
        a = draw(vec)
        b = draw(vec.filter(lambda v, a=a: v != a))
        reactions.append(Reaction(a, b, draw(st.floats(0.1, 5))))
    return ReactionNetwork(tuple("ABCD"[:S]), tuple(reactions))


@given(networks(), st.integers(0, 10**6))
@settings(max_examples=100, deadline=None)
def test_rhs_tangent_to_invariant_slice(net, seed):
    c = np.random.default_rng(seed).random(net.n_species) * 2
    rhs = gw_rhs(net, c)
    for mu in conservation_laws(net):
        assert abs(np.dot(mu, rhs)) <= 1e-12 * max(1.0, np.abs(rhs).max())


@given(networks(), st.integers(0, 10**6))
@settings(max_examples=100, deadline=None)
def test_rhs_is_large_N_limit_of_propensities(net, seed):
    N = 10**6
    n = np.random.default_rng(seed).integers(N // 10, N, size=net.n_species)
    a = propensities(net, n, N)
    approx = net.stoichiometry.T @ a / N
    exact = gw_rhs(net, n / N)
    scale = np.abs(net.stoichiometry.T).astype(float) @ (a / N)
    assert np.all(np.abs(approx - exact) <= 1e-4 * np.maximum(scale, 1e-300))
