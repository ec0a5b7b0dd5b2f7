"""Kac ring: the deterministic recurrence, the averaged decay, and what
the global sign noise does to the spread of the statistic."""

import numpy as np

from macrokin.models import kac_ring_new, kac_ring_paths, kac_ring_stat, kac_ring_step

n, mu = 400, 0.1
st = kac_ring_new(n, mu, seed=3)
vals = [kac_ring_stat(st)]
for _ in range(2 * n):
    st = kac_ring_step(st)
    vals.append(kac_ring_stat(st))
vals = np.array(vals)
print("S(0), S(n), S(2n):", vals[0], vals[n], vals[2 * n])
print("min over one period:", vals.min())

n, T, R = 5000, 15, 400
paths = kac_ring_paths(n, mu, T, R, seed=4)
t = np.arange(T + 1)
print("\n t   mean S(t)   (1-2mu)^t   sd")
for k in (0, 1, 2, 5, 10, 15):
    print(f"{k:2d}  {paths[:, k].mean():.5f}    {(1 - 2 * mu) ** k:.5f}    "
          f"{paths[:, k].std():.5f}")

p = 0.1
noisy = kac_ring_paths(n, mu, T, R, seed=4, p=p)
claim = (1 - 2 * mu) ** (2 * t) * (1 - 2 * p) ** (2 * t) / n
print("\nwith global sign noise p = 0.1")
print(" t   |mean|      (1-2mu)^t(1-2p)^t   var         (1/n)(...)^2t")
for k in (1, 2, 5, 10):
    print(f"{k:2d}  {abs(noisy[:, k].mean()):.5f}     {((1 - 2 * mu) * (1 - 2 * p)) ** k:.5f}"
          f"             {noisy[:, k].var():.3e}   {claim[k]:.3e}")
