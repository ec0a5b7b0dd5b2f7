"""Guldberg-Waage (mass-action) mean-field dynamics and its Lyapunov functions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import ReactionNetwork


class MeanFieldBlowup(ArithmeticError):
    """Non-finite state during integration; ``last_time`` is the last valid time."""

    def __init__(self, last_time: float):
        super().__init__(f"non-finite state after t = {last_time}")
        self.last_time = last_time


@dataclass(frozen=True)
class OdeConfig:
    step_dt: float = 1e-3
    method: str = "rk4_fixed"
    positivity_floor: float = 0.0
    record_every: int = 1

    def __post_init__(self):
        if not self.step_dt > 0:
            raise ValueError("step_dt must be positive")
        if self.method != "rk4_fixed":
            raise ValueError(f"unknown method {self.method!r}")
        if self.positivity_floor < 0:
            raise ValueError("positivity_floor must be nonnegative")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass
class MeanFieldTrajectory:
    species: tuple[str, ...]
    times: np.ndarray
    values: np.ndarray
    clamp_count: int = 0

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]


def _mass_action_tables(net: ReactionNetwork):
    cached = net.__dict__.get("_mass_action_tables")
    if cached is not None:
        return cached
    # reactant slots padded with power 0 so that 0**0 = 1 handles the padding
    alpha = net.alpha
    width = max(1, int((alpha > 0).sum(axis=1).max()))
    idx = np.zeros((net.n_reactions, width), dtype=np.int64)
    pw = np.zeros((net.n_reactions, width), dtype=float)
    for r, a in enumerate(alpha):
        nz = np.flatnonzero(a)
        idx[r, :nz.size] = nz
        pw[r, :nz.size] = a[nz]
    tables = (idx, pw, np.ascontiguousarray(net.stoichiometry.T, dtype=float))
    net.__dict__["_mass_action_tables"] = tables
    return tables


def reaction_fluxes(net: ReactionNetwork, c) -> np.ndarray:
    """``K_r * prod_j c_j**alpha_rj`` for every reaction (``0**0 = 1``)."""
    idx, pw, _ = _mass_action_tables(net)
    c = np.asarray(c, dtype=float)
    return net.rates * np.prod(c[idx] ** pw, axis=1)


def gw_rhs(net: ReactionNetwork, c) -> np.ndarray:
    """Mass-action right-hand side ``sum_r (beta_r - alpha_r) K_r c**alpha_r``."""
    c = np.asarray(c, dtype=float)
    if c.shape != (net.n_species,):
        raise ValueError(f"concentration has shape {c.shape}, expected ({net.n_species},)")
    _, _, delta_t = _mass_action_tables(net)
    return delta_t @ reaction_fluxes(net, c)


def integrate(net: ReactionNetwork, c0, T: float, cfg: OdeConfig = OdeConfig()) -> MeanFieldTrajectory:
    """Classical fixed-step RK4 from ``c0`` over ``[0, T]``.

    Components that go negative by less than ``positivity_floor`` are reset
    to zero and counted in ``clamp_count``.  The last step is shortened to
    land on ``T`` exactly.
    """
    c = np.array(c0, dtype=float)
    if c.shape != (net.n_species,):
        raise ValueError(f"c0 has shape {c.shape}, expected ({net.n_species},)")
    if np.any(c < 0):
        raise ValueError("c0 must be nonnegative")
    if not T > 0:
        raise ValueError("T must be positive")
    h = cfg.step_dt
    n_steps = int(np.ceil(T / h - 1e-9))
    times = [0.0]
    values = [c.copy()]
    clamps = 0
    t = 0.0
    f = lambda x: gw_rhs(net, x)
    for k in range(1, n_steps + 1):
        dt = min(h, T - t) if k == n_steps else h
        k1 = f(c)
        k2 = f(c + 0.5 * dt * k1)
        k3 = f(c + 0.5 * dt * k2)
        k4 = f(c + dt * k3)
        nxt = c + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(nxt)):
            raise MeanFieldBlowup(t)
        neg = nxt < 0
        if np.any(neg):
            small = neg & (nxt >= -cfg.positivity_floor)
            clamps += int(small.sum())
            nxt[small] = 0.0
        c = nxt
        t = T if k == n_steps else k * h
        if k % cfg.record_every == 0 or k == n_steps:
            times.append(t)
            values.append(c.copy())
    return MeanFieldTrajectory(net.species, np.array(times), np.array(values), clamps)


def lyapunov_kl(c, xi) -> float:
    """``sum_i c_i ln(c_i / xi_i)`` with ``0 ln 0 = 0``."""
    c = np.asarray(c, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if c.shape != xi.shape:
        raise ValueError("c and xi differ in shape")
    if np.any(xi <= 0):
        raise ValueError("xi must be strictly positive")
    if np.any(c < 0):
        raise ValueError("c must be nonnegative")
    pos = c > 0
    return float(np.sum(c[pos] * np.log(c[pos] / xi[pos])))


def lv_first_integral(c, mu3: float, mu6: float, K: float) -> float:
    """Conserved quantity of the Lotka-Volterra system (prey index 0, predator index 1)."""
    prey, pred = (float(x) for x in c)
    if prey <= 0 or pred <= 0:
        raise ValueError("first integral needs strictly positive concentrations")
    return mu6 * np.log(prey) + mu3 * np.log(pred) - K * (prey + pred)
