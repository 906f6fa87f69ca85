"""Coalition structure generation in induced subgraph games via QUBO encodings."""

from .algorithms import AlgorithmSpec, RunResult, run, run_iterative, run_one_shot
from .exact import enumerate_partitions, optimal_partition
from .graph import CoalitionStructure, DatasetConfig, WeightedGraph, cut_weight, generate_dataset, value
from .qubo import Encoding, Qubo, decode, energy, logical_variables, penalty_bound
from .solvers import SampleSet, Solver, SolverConfig, solve_exhaustive, solve_sa, solve_tabu

__all__ = [
    "AlgorithmSpec", "RunResult", "run", "run_iterative", "run_one_shot",
    "enumerate_partitions", "optimal_partition",
    "CoalitionStructure", "DatasetConfig", "WeightedGraph", "cut_weight", "generate_dataset", "value",
    "Encoding", "Qubo", "decode", "energy", "logical_variables", "penalty_bound",
    "SampleSet", "Solver", "SolverConfig", "solve_exhaustive", "solve_sa", "solve_tabu",
]
