"""Equilibria of reaction networks.

Three layers:

* the unitarity (complex balance) condition and detailed balance at a
  candidate point ``xi``;
* the maximum-entropy equilibrium ``c* = argmin KL(c, xi)`` on the affine
  slice fixed by the conservation laws, computed through its convex dual;
* exact analysis of the finite Markov chain for small ``N``: stationary law,
  mean return times and total-variation mixing.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import least_squares, linprog
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve
from scipy.special import gammaln
from scipy.stats import poisson

from .meanfield import reaction_fluxes
from .network import ConservationBasis, ReactionNetwork, conservation_laws
from .ssa import IntensityConvention, _scale_factors

UNIFORMIZATION_TAIL = 1e-12


# --------------------------------------------------------------------------
# unitarity / detailed balance


@dataclass(frozen=True)
class UnitarityResult:
    """Outcome of :func:`solve_unitarity`.

    ``residual`` is the relative defect ``max_y |in_y - out_y| / max(in_y, out_y)``
    over all complexes ``y``; ``feasible`` is ``residual <= tol``.
    """

    xi: np.ndarray
    residual: float
    feasible: bool
    reason: str = ""
    iterations: int = 0


def _complexes(net: ReactionNetwork):
    """Distinct complexes and, per reaction, the indices of its source and target."""
    both = np.vstack([net.alpha, net.beta])
    cplx, inv = np.unique(both, axis=0, return_inverse=True)
    inv = np.asarray(inv).ravel()
    return cplx, inv[:net.n_reactions], inv[net.n_reactions:]


def _balance(net: ReactionNetwork, xi: np.ndarray):
    cplx, src, dst = _complexes(net)
    flux = reaction_fluxes(net, xi)
    inflow = np.bincount(dst, weights=flux, minlength=len(cplx))
    outflow = np.bincount(src, weights=flux, minlength=len(cplx))
    return inflow, outflow


def _relative_defect(inflow: np.ndarray, outflow: np.ndarray) -> float:
    scale = np.maximum(inflow, outflow)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(scale > 0, np.abs(inflow - outflow) / scale, 0.0)
    return float(rel.max(initial=0.0))


def unitarity_defect(net: ReactionNetwork, xi) -> float:
    """Relative complex-balance defect of ``net`` at ``xi``."""
    xi = np.asarray(xi, dtype=float)
    return _relative_defect(*_balance(net, xi))


def normalize_xi(net: ReactionNetwork, xi, basis: ConservationBasis | None = None) -> np.ndarray:
    """Scale ``xi`` to unit sum when total molecule number is conserved.

    Scaling by a constant preserves complex balance exactly when the all-ones
    vector is a conservation law; otherwise ``xi`` is returned unchanged.
    """
    xi = np.asarray(xi, dtype=float)
    basis = conservation_laws(net) if basis is None else basis
    if basis.contains_ones():
        return xi / xi.sum()
    return xi.copy()


def solve_unitarity(net: ReactionNetwork, init=None, tol: float = 1e-10,
                    max_iter: int = 200) -> UnitarityResult:
    """Find ``xi > 0`` with inflow = outflow at every complex.

    Works in ``u = ln xi`` on the residual ``ln(inflow_y) - ln(outflow_y)``
    with a damped Gauss-Newton (trust-region) solver.  A complex that can be
    entered but never left, or the reverse, has no positive solution and is
    reported infeasible with residual 1 before any iteration.
    """
    cplx, src, dst = _complexes(net)
    nc = len(cplx)
    has_in = np.zeros(nc, bool)
    has_out = np.zeros(nc, bool)
    has_in[dst] = True
    has_out[src] = True
    if np.any(has_in != has_out):
        bad = np.flatnonzero(has_in != has_out)[0]
        side = "entered but never left" if has_in[bad] else "left but never entered"
        xi0 = np.ones(net.n_species) if init is None else np.asarray(init, dtype=float)
        return UnitarityResult(xi0, 1.0, False, f"complex {tuple(int(x) for x in cplx[bad])} is {side}")

    if init is None:
        u0 = np.zeros(net.n_species)
    else:
        init = np.asarray(init, dtype=float)
        if init.shape != (net.n_species,) or np.any(init <= 0):
            raise ValueError("init must be a strictly positive vector over the species")
        u0 = np.log(init)

    alpha = net.alpha.astype(float)
    logk = np.log(net.rates)
    in_onehot = sparse.csr_matrix((np.ones(net.n_reactions), (dst, np.arange(net.n_reactions))),
                                  shape=(nc, net.n_reactions))
    out_onehot = sparse.csr_matrix((np.ones(net.n_reactions), (src, np.arange(net.n_reactions))),
                                   shape=(nc, net.n_reactions))

    def parts(u):
        logf = logk + alpha @ u
        f = np.exp(logf - logf.max())
        return f, in_onehot @ f, out_onehot @ f

    def fun(u):
        _, fin, fout = parts(u)
        return np.log(fin) - np.log(fout)

    def jac(u):
        f, fin, fout = parts(u)
        jin = (in_onehot.multiply(f[None, :]) @ alpha) / fin[:, None]
        jout = (out_onehot.multiply(f[None, :]) @ alpha) / fout[:, None]
        return np.asarray(jin - jout)

    sol = least_squares(fun, u0, jac=jac, method="trf", xtol=1e-15, ftol=1e-15,
                        gtol=1e-15, max_nfev=max_iter)
    xi = normalize_xi(net, np.exp(sol.x))
    residual = unitarity_defect(net, xi)
    return UnitarityResult(xi, residual, residual <= tol,
                           "" if residual <= tol else "no positive balanced point found",
                           int(sol.nfev))


def unitarity_family(xi, basis: ConservationBasis, theta) -> np.ndarray:
    """Another solution ``xi * exp(M^T theta)`` of the same balance equations."""
    M = basis.matrix.astype(float)
    return np.asarray(xi, dtype=float) * np.exp(M.T @ np.asarray(theta, dtype=float))


class DetailedBalance(NamedTuple):
    balanced: bool
    defects: np.ndarray  # per reaction, relative |forward - reverse| / max


def check_detailed_balance(net: ReactionNetwork, xi, tol: float = 1e-9) -> DetailedBalance:
    """Per-reaction comparison of the flux ``alpha -> beta`` with ``beta -> alpha`` at ``xi``.

    Parallel reactions with the same source and target are pooled.  A
    reaction with no reverse partner has defect 1.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (net.n_species,) or np.any(xi <= 0):
        raise ValueError("xi must be a strictly positive vector over the species")
    _, src, dst = _complexes(net)
    flux = reaction_fluxes(net, xi)
    pooled: dict[tuple[int, int], float] = {}
    for s, d, f in zip(src, dst, flux):
        pooled[(s, d)] = pooled.get((s, d), 0.0) + f
    defects = np.empty(net.n_reactions)
    for r, (s, d) in enumerate(zip(src, dst)):
        fwd = pooled[(s, d)]
        rev = pooled.get((d, s), 0.0)
        scale = max(fwd, rev)
        defects[r] = abs(fwd - rev) / scale if scale > 0 else 0.0
    return DetailedBalance(bool(np.all(defects <= tol)), defects)


# --------------------------------------------------------------------------
# entropy projection


@dataclass(frozen=True)
class ProjectionResult:
    """``c_star`` minimizes ``KL(c, xi)`` subject to ``M c = b``.

    ``status`` is one of ``converged``, ``max_iter``, ``infeasible`` or
    ``no_interior``; ``multipliers`` are the dual variables ``lambda``.
    """

    c_star: np.ndarray
    multipliers: np.ndarray
    kl_value: float
    status: str
    iterations: int = 0
    constraint_defect: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == "converged"


def _slice_interior(M: np.ndarray, b: np.ndarray):
    """LP: maximize t subject to M c = b, c >= t, t <= 1.  Returns (status, t)."""
    S = M.shape[1]
    cost = np.zeros(S + 1)
    cost[-1] = -1.0
    A_eq = np.hstack([M, np.zeros((M.shape[0], 1))])
    A_ub = np.hstack([-np.eye(S), np.ones((S, 1))])
    res = linprog(cost, A_ub=A_ub, b_ub=np.zeros(S), A_eq=A_eq, b_eq=b,
                  bounds=[(0, None)] * S + [(None, 1.0)], method="highs")
    if res.status == 2:
        return "infeasible", 0.0
    if res.status != 0:
        return "infeasible", 0.0
    return "ok", float(res.x[-1])


def _kl(c: np.ndarray, xi: np.ndarray) -> float:
    pos = c > 0
    return float(np.sum(c[pos] * np.log(c[pos] / xi[pos])))


def entropy_project(xi, basis: ConservationBasis, b, tol: float = 1e-10,
                    max_iter: int = 500) -> ProjectionResult:
    """Maximum-entropy point of the slice ``{c >= 0 : <mu_k, c> = b_k}``.

    Newton's method on the dual ``phi(lam) = sum_i c_i(lam) + <lam, b>`` with
    ``c_i(lam) = xi_i exp(-1 - (M^T lam)_i)`` and Armijo backtracking.  When
    the all-ones vector is not a conservation law the constant ``-1`` is
    dropped (the minimized functional is then the generalized divergence
    ``KL(c, xi) - sum c + sum xi``), so that ``c*`` stays a rest point of the
    mass-action flow.
    """
    xi = np.asarray(xi, dtype=float)
    b = np.atleast_1d(np.asarray(b, dtype=float))
    M = basis.matrix.astype(float)
    if xi.shape != (basis.n_species,) or np.any(xi <= 0):
        raise ValueError("xi must be strictly positive with one entry per species")
    if b.shape != (M.shape[0],):
        raise ValueError(f"need {M.shape[0]} constraint values, got {b.shape[0]}")
    shift = -1.0 if basis.contains_ones() else 0.0
    if M.shape[0] == 0:
        c = xi * np.exp(shift)
        return ProjectionResult(c, np.zeros(0), _kl(c, xi), "converged")

    status, t = _slice_interior(M, b)
    if status == "infeasible":
        return ProjectionResult(np.full(xi.size, np.nan), np.full(len(b), np.nan),
                                float("nan"), "infeasible")
    if t <= 1e-12 * max(1.0, np.abs(b).max()):
        return ProjectionResult(np.full(xi.size, np.nan), np.full(len(b), np.nan),
                                float("nan"), "no_interior")

    logxi = np.log(xi)

    def primal(lam):
        return np.exp(logxi + shift - M.T @ lam)

    def phi(lam, c):
        return c.sum() + lam @ b

    lam = np.zeros(len(b))
    c = primal(lam)
    it = 0
    status = "max_iter"
    for it in range(1, max_iter + 1):
        grad = b - M @ c
        if np.abs(grad).max() <= tol:
            status = "converged"
            break
        H = (M * c) @ M.T
        try:
            step = np.linalg.solve(H, -grad)
        except np.linalg.LinAlgError:
            step = -np.linalg.lstsq(H, grad, rcond=None)[0]
        f0 = phi(lam, c)
        slope = grad @ step
        gnorm = np.abs(grad).max()
        s = 1.0
        while True:
            trial = lam + s * step
            with np.errstate(over="ignore"):
                ct = primal(trial)
            # near the optimum the decrease in phi drops below rounding, so a
            # smaller gradient is accepted as progress too
            if np.all(np.isfinite(ct)) and (phi(trial, ct) <= f0 + 1e-4 * s * slope
                                           or np.abs(b - M @ ct).max() < 0.5 * gnorm):
                break
            s *= 0.5
            if s < 1e-16:
                break
        lam, c = trial, ct
    else:
        if np.abs(b - M @ c).max() <= tol:
            status = "converged"
    defect = float(np.abs(M @ c - b).max())
    return ProjectionResult(c, lam, _kl(c, xi), status, it, defect)


# --------------------------------------------------------------------------
# exact chains


class StateSpaceOverflow(RuntimeError):
    pass


@dataclass
class ExactChain:
    """Finite continuous-time chain on the states reachable from ``n0``.

    ``generator`` is a CSR matrix with zero row sums.  For a reducible chain
    ``stationary`` is the long-run law started from ``n0`` (mass split over
    the closed classes by absorption probability) and ``irreducible`` is
    False.
    """

    species: tuple[str, ...]
    states: np.ndarray
    generator: sparse.csr_matrix
    stationary: np.ndarray
    scale: int
    start: int = 0
    irreducible: bool = True
    closed_classes: list[np.ndarray] = field(default_factory=list)

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def exit_rates(self) -> np.ndarray:
        return -self.generator.diagonal()

    def index(self, state: Sequence[int]) -> int:
        hits = np.flatnonzero((self.states == np.asarray(state)).all(axis=1))
        if hits.size == 0:
            raise KeyError(f"state {tuple(state)} not in the chain")
        return int(hits[0])

    def class_of(self, s: int) -> np.ndarray | None:
        for cls in self.closed_classes:
            if s in set(cls.tolist()):
                return cls
        return None


def _propensity_rows(net: ReactionNetwork, states: np.ndarray, N: int, convention) -> np.ndarray:
    """Propensities for a batch of states, shape (states, reactions)."""
    alpha = net.alpha
    keff = _scale_factors(net, N, convention) * net.rates
    out = np.empty((len(states), net.n_reactions))
    chunk = max(1, 2_000_000 // max(1, net.n_reactions * net.n_species))
    for lo in range(0, len(states), chunk):
        st = states[lo:lo + chunk]
        ff = np.ones((len(st), net.n_reactions))
        for j in range(int(alpha.max(initial=0))):
            fac = np.where(alpha[None, :, :] > j, st[:, None, :] - j, 1)
            ff *= np.clip(fac, 0, None).astype(float).prod(axis=2)
        out[lo:lo + chunk] = keff * ff
    return out


def _stationary_on(Q: sparse.csr_matrix, idx: np.ndarray) -> np.ndarray:
    """Stationary law of the sub-generator on a closed communicating class."""
    if idx.size == 1:
        return np.ones(1)
    sub = Q[idx][:, idx].T.tolil()
    sub[-1, :] = 1.0
    rhs = np.zeros(idx.size)
    rhs[-1] = 1.0
    pi = spsolve(sub.tocsc(), rhs)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def exact_chain(net: ReactionNetwork, n0: Sequence[int], N: int, max_states: int = 200_000,
                convention=IntensityConvention.KURTZ) -> ExactChain:
    """Enumerate the states reachable from ``n0`` and assemble the generator."""
    convention = IntensityConvention.parse(convention)
    n0 = np.asarray(n0, dtype=np.int64)
    if n0.shape != (net.n_species,) or np.any(n0 < 0):
        raise ValueError("n0 must be a nonnegative count vector over the species")
    delta = net.stoichiometry
    index = {tuple(n0.tolist()): 0}
    states = [n0]
    rows, cols, vals = [], [], []
    frontier = deque([0])
    while frontier:
        batch = [frontier.popleft() for _ in range(len(frontier))]
        block = np.array([states[i] for i in batch])
        props = _propensity_rows(net, block, N, convention)
        for i, src, a in zip(batch, block, props):
            for r in np.flatnonzero(a > 0):
                tgt = tuple((src + delta[r]).tolist())
                j = index.get(tgt)
                if j is None:
                    j = len(states)
                    if j >= max_states:
                        raise StateSpaceOverflow(f"more than {max_states} reachable states")
                    index[tgt] = j
                    states.append(np.array(tgt, dtype=np.int64))
                    frontier.append(j)
                rows.append(i)
                cols.append(j)
                vals.append(a[r])
    n = len(states)
    Q = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    Q.setdiag(0.0)
    Q.eliminate_zeros()
    Q = (Q - sparse.diags(np.asarray(Q.sum(axis=1)).ravel())).tocsr()
    Q.sort_indices()

    ncomp, labels = connected_components(Q, directed=True, connection="strong")
    cond = sparse.csr_matrix((np.ones(Q.nnz), (labels[Q.nonzero()[0]], labels[Q.nonzero()[1]])),
                             shape=(ncomp, ncomp))
    cond.setdiag(0)
    cond.eliminate_zeros()
    closed = [np.flatnonzero(labels == k) for k in range(ncomp) if cond[k].nnz == 0]
    irreducible = ncomp == 1

    pi = np.zeros(n)
    if irreducible:
        pi = _stationary_on(Q, np.arange(n))
    else:
        transient = np.setdiff1d(np.arange(n), np.concatenate(closed))
        for cls in closed:
            if 0 in set(cls.tolist()):
                weight = 1.0
            elif transient.size == 0 or 0 not in set(transient.tolist()):
                weight = 0.0
            else:
                # absorption probability into cls from each transient state
                Qtt = Q[transient][:, transient].tocsc()
                rhs = -np.asarray(Q[transient][:, cls].sum(axis=1)).ravel()
                h = np.atleast_1d(spsolve(Qtt, rhs))
                weight = float(h[np.searchsorted(transient, 0)])
            if weight > 0:
                pi[cls] += weight * _stationary_on(Q, cls)
        pi /= pi.sum()
    return ExactChain(net.species, np.array(states), Q, pi, int(N), 0, irreducible, closed)


def product_form_stationary(chain: ExactChain, xi) -> np.ndarray:
    """Normalized ``prod_i (N xi_i)**n_i / n_i!`` over the chain's states."""
    xi = np.asarray(xi, dtype=float)
    st = chain.states
    logw = (st * np.log(chain.scale * xi)[None, :]).sum(axis=1) - gammaln(st + 1).sum(axis=1)
    w = np.exp(logw - logw.max())
    return w / w.sum()


def _recurrent_class(chain: ExactChain, s: int) -> np.ndarray:
    if chain.irreducible:
        return np.arange(chain.n_states)
    cls = chain.class_of(s)
    if cls is None:
        raise ValueError(f"state {s} is transient")
    return cls


def mean_return_time(chain: ExactChain, state_index: int,
                     method: str = "stationary") -> tuple[float, float]:
    """Mean return time to a state: ``(continuous_time, jump_steps)``.

    ``stationary`` uses ``1 / (pi_s q_s)`` and ``1 / pihat_s`` with the
    embedded-chain law ``pihat ~ pi q``; ``first_passage`` solves the
    hitting-time linear systems directly.
    """
    s = int(state_index)
    if not 0 <= s < chain.n_states:
        raise IndexError("state index out of range")
    cls = _recurrent_class(chain, s)
    Q = chain.generator
    q = chain.exit_rates
    if q[s] <= 0:
        raise ValueError(f"state {s} is absorbing; it is never left")
    if method == "stationary":
        pi = _stationary_on(Q, cls)
        k = int(np.searchsorted(cls, s))
        flow = pi * q[cls]
        return float(1.0 / (pi[k] * q[s])), float(flow.sum() / flow[k])
    if method != "first_passage":
        raise ValueError(f"unknown method {method!r}")
    others = cls[cls != s]
    Qs = Q[s][:, others].toarray().ravel()
    if others.size == 0:
        return float(1.0 / q[s]), 1.0
    Qoo = Q[others][:, others].tocsc()
    # continuous: Q_oo m = -1
    m = np.atleast_1d(spsolve(Qoo, -np.ones(others.size)))
    cont = 1.0 / q[s] + (Qs / q[s]) @ m
    # embedded chain: (I - P_oo) h = 1 with P = I + diag(1/q) Q off the diagonal
    P_oo = sparse.diags(1.0 / q[others]) @ Qoo + sparse.identity(others.size)
    h = np.atleast_1d(spsolve((sparse.identity(others.size) - P_oo).tocsc(), np.ones(others.size)))
    jumps = 1.0 + (Qs / q[s]) @ h
    return float(cont), float(jumps)


def transient_law(chain: ExactChain, p0, dt: float, steps: int):
    """Yield ``p(k dt)`` for ``k = 0..steps`` by uniformization.

    Each increment truncates the Poisson series once its tail mass is below
    ``UNIFORMIZATION_TAIL``.
    """
    Q = chain.generator
    rate = float(chain.exit_rates.max(initial=0.0))
    p = np.asarray(p0, dtype=float).copy()
    yield p
    if rate == 0.0:
        for _ in range(steps):
            yield p
        return
    P = (sparse.identity(chain.n_states) + Q / rate).T.tocsr()
    mu = rate * dt
    kmax = int(poisson.isf(UNIFORMIZATION_TAIL, mu)) + 1
    weights = poisson.pmf(np.arange(kmax + 1), mu)
    for _ in range(steps):
        term = p
        acc = weights[0] * term
        for k in range(1, kmax + 1):
            term = P @ term
            acc = acc + weights[k] * term
        p = acc
        yield p


def tv_mixing(chain: ExactChain, p0, eps: float, dt: float | None = None,
              max_steps: int = 1_000_000) -> float:
    """Smallest grid time ``k dt`` with ``TV(p(k dt), pi) <= eps``.

    The default spacing is ``1 / max exit rate``.
    """
    if not chain.irreducible:
        raise ValueError("tv_mixing needs an irreducible chain")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (chain.n_states,) or np.any(p0 < 0) or abs(p0.sum() - 1) > 1e-9:
        raise ValueError("p0 must be a probability vector over the chain's states")
    if dt is None:
        rate = float(chain.exit_rates.max(initial=0.0))
        dt = 1.0 / rate if rate > 0 else 1.0
    pi = chain.stationary
    for k, p in enumerate(transient_law(chain, p0, dt, max_steps)):
        if 0.5 * np.abs(p - pi).sum() <= eps:
            return k * dt
    raise RuntimeError(f"TV above {eps} after {max_steps} steps of {dt}")
