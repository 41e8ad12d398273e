"""Exact local search for stable discrete clustering, plus reduction-chain tooling."""

from .metric import (MetricInstance, Objective, Solution, build_instance, cost, from_json,
                     table_instance, to_json)
from .local_search import (GenericLSConfig, SwapAdapter, best_swap, iteration_bound,
                           kmedian_swap_config, neighborhood, run_generic, run_local_search,
                           run_truncated, run_truncated_trace)
from .oracle import brute_force_optimum, certify_stability, replay_witness, sample_perturbation_check
from .generators import GenSpec, Kind, generate

__version__ = "0.1.0"

__all__ = [
    "GenSpec", "GenericLSConfig", "Kind", "MetricInstance", "Objective", "Solution", "SwapAdapter",
    "best_swap", "brute_force_optimum", "build_instance", "certify_stability", "cost", "from_json",
    "generate", "iteration_bound", "kmedian_swap_config", "neighborhood", "replay_witness",
    "run_generic", "run_local_search", "run_truncated", "run_truncated_trace",
    "sample_perturbation_check", "table_instance", "to_json",
]
