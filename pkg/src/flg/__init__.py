"""Two-sided facility location games with waiting-time minimizing clients."""
from .client import (EquilibriumReport, best_response, client_cost, equilibrium_residual,
                     solve_exact, solve_iterative)
from .facility import (LoadOracle, SolverConfig, StabilityReport, check_stability,
                       compute_approx_spe, evaluate_deviation, find_spe, remove_facility)
from .instance import (Instance, WeightDistribution, attraction_range, load_instance,
                       reachable_facilities, shopping_range)
from .uniform import potential, run_dynamics, uniform_best_deviation, uniform_distribution

__all__ = [
    "EquilibriumReport", "Instance", "LoadOracle", "SolverConfig", "StabilityReport",
    "WeightDistribution", "attraction_range", "best_response", "check_stability", "client_cost",
    "compute_approx_spe", "equilibrium_residual", "evaluate_deviation", "find_spe",
    "load_instance", "potential", "reachable_facilities", "remove_facility", "run_dynamics",
    "shopping_range", "solve_exact", "solve_iterative", "uniform_best_deviation",
    "uniform_distribution",
]
