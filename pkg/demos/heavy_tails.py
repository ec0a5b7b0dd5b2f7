"""Where the exponential and power-law histograms come from: coin
exchange between agents, Yule-style preferential attachment, and random
typing."""

import numpy as np

from macrokin.models import (monkey_text, wealth_exchange_days, wealth_histogram, yule_exponent,
                             yule_run, zipf_mandelbrot_params)
from macrokin.rng import split
from macrokin.stats import fit_exponential, fit_power_law

N, s_bar = 1000, 5
hist = sum(wealth_histogram(wealth_exchange_days(N, s_bar, 150, split(0, r)).coins, 60)
           for r in range(10))
fit = fit_exponential(hist)
print(f"coin exchange: rate {fit.parameter:.4f} (1/s_bar = {1 / s_bar}) over s in {fit.fit_range}")

for alpha in (0.0, 0.5):
    h = yule_run(alpha, 10**6, seed=1)
    s = np.arange(h.size)
    fit = fit_power_law(h[1:], x=s[1:])
    print(f"yule alpha={alpha}: exponent {fit.parameter:.3f} "
          f"(mean-field {yule_exponent(alpha):.3f})")

a, B, C = zipf_mandelbrot_params(4)
table = monkey_text(4, 2 * 10**6, seed=2)
fit = fit_power_law(table.counts, offset=B, weighting="log")
print(f"random typing, 4 letters: exponent {fit.parameter:.4f} (alpha = {a:.4f}, B = {B:.3f})")
for r, w, c in list(table.rows())[:8]:
    print(f"  {r:3d} {w:>4s} {c}")
