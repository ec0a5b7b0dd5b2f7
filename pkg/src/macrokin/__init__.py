"""Stochastic chemical kinetics for macrosystems.

Exact jump simulation of reaction networks, their mass-action mean-field
limits, entropy-based equilibria and a gallery of classical models.
"""

__version__ = "0.1.0"

from .equilibrium import (ExactChain, ProjectionResult, UnitarityResult, check_detailed_balance,
                          entropy_project, exact_chain, mean_return_time, product_form_stationary,
                          solve_unitarity, tv_mixing)
from .meanfield import OdeConfig, gw_rhs, integrate, lyapunov_kl
from .network import (ConservationBasis, Reaction, ReactionNetwork, conservation_laws,
                      format_network, load_network, parse_network)
from .ssa import SimConfig, Trajectory, ensemble, propensities, simulate

__all__ = [
    "__version__",
    "ExactChain", "ProjectionResult", "UnitarityResult", "check_detailed_balance",
    "entropy_project", "exact_chain", "mean_return_time", "product_form_stationary",
    "solve_unitarity", "tv_mixing",
    "OdeConfig", "gw_rhs", "integrate", "lyapunov_kl",
    "ConservationBasis", "Reaction", "ReactionNetwork", "conservation_laws",
    "format_network", "load_network", "parse_network",
    "SimConfig", "Trajectory", "ensemble", "propensities", "simulate",
]
