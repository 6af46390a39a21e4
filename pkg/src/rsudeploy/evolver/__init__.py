from .config import AM_NSGA3, AM_NSGA3_C, NSGA3, EvolverConfig
from .engine import TELEMETRY_FIELDS, ParetoResult, pareto_sets, run
from .epsilon import EpsilonState, epsilon_update, initial_epsilon
from .islands import (Individual, SubPopulation, adapt_rates, improvement_test, initialize,
                      migrate, snapshot)
from .nsga3 import nsga3_select, reference_points
from .operators import calibrate, variation
from .ranking import Ordering, better_matrix, epsilon_compare, nondominated_sort

__all__ = [
    "AM_NSGA3", "AM_NSGA3_C", "NSGA3", "EvolverConfig", "TELEMETRY_FIELDS", "ParetoResult",
    "pareto_sets", "run", "EpsilonState", "epsilon_update", "initial_epsilon", "Individual",
    "SubPopulation", "adapt_rates", "improvement_test", "initialize", "migrate", "snapshot",
    "nsga3_select", "reference_points", "calibrate", "variation", "Ordering", "better_matrix",
    "epsilon_compare", "nondominated_sort",
]
