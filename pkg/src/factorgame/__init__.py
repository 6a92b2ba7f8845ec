"""Robust mixed strategies for zero-sum games on factor graphs.

A maximizing player assigns the variable nodes, an adversary picks one
parameter per factor from a finite set, and the payoff is the sum of factor
potentials.  The package generates benchmark instances, solves the minimax
problem over locally consistent marginals with consensus ADMM, and
cross-checks against exact LP oracles and classical max-product.
"""

from .admm import AdmmConfig, AdmmState, MarginalSet, SolveReport, SolverError, solve
from .game import (
    EngineerStrategy,
    NatureStrategy,
    assignment_payoff,
    exact_minimax_joint,
    expected_payoff,
    local_polytope_lp,
    mix_with_uniform,
    nature_best_response,
    sample_tree_mrf,
    uniform_nature,
)
from .graph import (
    Alphabet,
    Factor,
    FactorGraphInstance,
    PureStrategyPair,
    is_tree,
    objective_eval,
    validate,
)
from .ising import IsingSpec, build_ising, nominal_instance, random_tree
from .maxproduct import brute_force_map, max_product_map
from .numerics import LpProblem, QpProblem, project_simplex, solve_lp, solve_qp

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig",
    "AdmmState",
    "Alphabet",
    "EngineerStrategy",
    "Factor",
    "FactorGraphInstance",
    "IsingSpec",
    "LpProblem",
    "MarginalSet",
    "NatureStrategy",
    "PureStrategyPair",
    "QpProblem",
    "SolveReport",
    "SolverError",
    "assignment_payoff",
    "brute_force_map",
    "build_ising",
    "exact_minimax_joint",
    "expected_payoff",
    "is_tree",
    "local_polytope_lp",
    "max_product_map",
    "mix_with_uniform",
    "nature_best_response",
    "nominal_instance",
    "objective_eval",
    "project_simplex",
    "random_tree",
    "sample_tree_mrf",
    "solve",
    "solve_lp",
    "solve_qp",
    "uniform_nature",
    "validate",
    "__version__",
]
