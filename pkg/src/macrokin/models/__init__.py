"""The model gallery."""

from .kac import (KacRingState, QMode, kac_noise_paths, kac_ring_new, kac_ring_paths,
                  kac_ring_stat, kac_ring_step)
from .kinetic import (ehrenfest, lotka_volterra, lv_center, lv_period, pagerank_surfers,
                      pagerank_vector, wealth_basis, wealth_kinetic)
from .majority import majority_kernel, majority_oracle, majority_run, majority_step
from .monkey import (RankFrequency, monkey_corpus, monkey_text, rank_frequency,
                     zipf_mandelbrot_params)
from .registry import MODELS, BespokeOutput, Built, ModelEntry, get_model
from .schlogl import (schlogl_ensemble, schlogl_network, schlogl_process, schlogl_rates,
                      schlogl_scaled)
from .wealth import WealthState, wealth_day, wealth_exchange_days, wealth_histogram, wealth_new
from .yule import YuleState, yule_coins, yule_exponent, yule_new, yule_run, yule_step

__all__ = [
    "KacRingState", "QMode", "kac_noise_paths", "kac_ring_new", "kac_ring_paths",
    "kac_ring_stat", "kac_ring_step",
    "ehrenfest", "lotka_volterra", "lv_center", "lv_period", "pagerank_surfers",
    "pagerank_vector", "wealth_basis", "wealth_kinetic",
    "majority_kernel", "majority_oracle", "majority_run", "majority_step",
    "RankFrequency", "monkey_corpus", "monkey_text", "rank_frequency", "zipf_mandelbrot_params",
    "MODELS", "BespokeOutput", "Built", "ModelEntry", "get_model",
    "schlogl_ensemble", "schlogl_network", "schlogl_process", "schlogl_rates", "schlogl_scaled",
    "WealthState", "wealth_day", "wealth_exchange_days", "wealth_histogram", "wealth_new",
    "YuleState", "yule_coins", "yule_exponent", "yule_new", "yule_run", "yule_step",
]
