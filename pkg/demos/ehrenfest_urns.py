"""Two urns, N balls, each ball hops at rate 1.

Walks through the exact chain, the mean-field limit and a simulated
ensemble, and compares the three.
"""

import numpy as np

from macrokin import OdeConfig, SimConfig, ensemble, exact_chain, integrate, mean_return_time
from macrokin.equilibrium import tv_mixing
from macrokin.models import ehrenfest
from macrokin.ssa import terminal_counts
from macrokin.stats import urn_radius

# exact chain at small N: stationary law and return time to "all in urn A"
N = 10
net, n0 = ehrenfest(N)
chain = exact_chain(net, n0, N)
print("states:", chain.n_states, " irreducible:", chain.irreducible)
print("pi(all in A) =", chain.stationary[chain.index(n0)], " 2^-N =", 2.0**-N)
cont, jumps = mean_return_time(chain, chain.index(n0))
print(f"mean return: {jumps:.1f} jumps, {cont:.2f} time units")

# how long until the law is close to binomial
p0 = np.eye(chain.n_states)[chain.index(n0)]
for eps in (0.25, 0.1, 0.01):
    print(f"TV <= {eps}: t = {tv_mixing(chain, p0, eps, dt=0.01):.2f}")

# large N: the fraction in urn A follows the ODE, fluctuations ~ 1/sqrt(N)
N = 2000
net, n0 = ehrenfest(N)
ode = integrate(net, [1.0, 0.0], 3.0, OdeConfig(step_dt=1e-3, record_every=500))
trajs = ensemble(net, n0, N, SimConfig(seed=1, horizon=3.0, sample_dt=0.5), replicas=50)
mean = np.mean([tr.counts[:, 0] for tr in trajs], axis=0) / N
print("\n   t   ODE      ensemble mean")
for t, c, m in zip(ode.times, ode.values[:, 0], mean):
    print(f"{t:4.1f}  {c:.5f}  {m:.5f}")

fin = terminal_counts(trajs)
dev = np.abs(fin[:, 0] - fin[:, 1]) / N
print(f"\nmax |n1 - n2|/N = {dev.max():.4f}, radius 3/sqrt(N) = {urn_radius(N):.4f}")
