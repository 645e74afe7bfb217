"""Exact matroid interdiction and minimum-cost blocker solvers."""
from .instances import FormatError, parse, parse_text, serialize, serialize_text
from .matroid import (Basis, DirectSum, Graphic, Instance, Partition, Uniform, Unsupported,
                      dual, graphic, is_independent, lex_min_basis, min_cost_cocircuit,
                      normalize, partition, rank, replacement_chain, replacement_element)
from .search import (DynInterdict, SearchStats, Solution, SolverConfig, compute_mbar,
                     greedy_lower_bound, solve_blocker, solve_blocker_by_bisection,
                     solve_inclusion_interdiction, solve_interdiction)

__version__ = "0.1.0"

__all__ = [
    "Basis", "DirectSum", "DynInterdict", "FormatError", "Graphic", "Instance", "Partition", "SearchStats",
    "Solution", "SolverConfig", "Uniform", "Unsupported", "compute_mbar", "dual", "graphic",
    "greedy_lower_bound", "is_independent", "lex_min_basis", "min_cost_cocircuit", "normalize",
    "parse", "parse_text", "partition", "rank", "replacement_chain", "replacement_element", "serialize", "serialize_text", "solve_blocker",
    "solve_blocker_by_bisection", "solve_inclusion_interdiction", "solve_interdiction",
]
