"""Balanced points and maximum-entropy equilibria for a few networks.

For each network: does a positive point balancing every complex exist,
is it detailed balanced, and where does the entropy projection put the
equilibrium on the slice fixed by the initial state.
"""

import numpy as np

from macrokin import (check_detailed_balance, conservation_laws, entropy_project, gw_rhs,
                      parse_network, solve_unitarity)
from macrokin.models import lotka_volterra, pagerank_surfers, wealth_basis, wealth_kinetic
from macrokin.models.registry import DEFAULT_PAGERANK
from macrokin.network import invariant_values

cases = {
    "reversible dimerization": (parse_network("2 A -> B @ 2\nB -> 2 A @ 1"), (40, 0), 20),
    "three-cycle": (parse_network("A -> B @ 1\nB -> C @ 2\nC -> A @ 3"), (30, 0, 0), 30),
    "surfers": (*pagerank_surfers(np.array(DEFAULT_PAGERANK), 100), 100),
    "wealth classes": (*wealth_kinetic(100, 3, s_max=15), 100),
    "predator-prey": (*lotka_volterra(0.5, 0.4, 1.0), 100),
}

for name, (net, n0, N) in cases.items():
    res = solve_unitarity(net)
    print(f"\n{name}: feasible={res.feasible} residual={res.residual:.1e}")
    if not res.feasible:
        print("  ", res.reason)
        continue
    db = check_detailed_balance(net, res.xi)
    basis = conservation_laws(net)
    b = np.array(invariant_values(basis, n0), dtype=float) / N
    proj = entropy_project(res.xi, basis, b)
    print(f"  detailed balance: {db.balanced}")
    print(f"  c* = {np.array2string(proj.c_star[:6], precision=4)}"
          f"{' ...' if proj.c_star.size > 6 else ''}")
    print(f"  |rhs(c*)| = {np.abs(gw_rhs(net, proj.c_star)).max():.1e}")

# the wealth equilibrium is geometric in the class index
net, n0 = wealth_kinetic(100, 3, s_max=15)
proj = entropy_project(solve_unitarity(net).xi, wealth_basis(15), [1.0, 3.0])
ratios = proj.c_star[1:] / proj.c_star[:-1]
print(f"\nwealth c*_(s+1)/c*_s: min {ratios.min():.6f} max {ratios.max():.6f}")
