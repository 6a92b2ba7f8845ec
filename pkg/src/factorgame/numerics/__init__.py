"""Self-contained dense numerical kernels: simplex projection, QP, LP."""

from .lp import LpProblem, LpResult, solve_lp
from .projection import project_simplex
from .qp import QpProblem, QpResult, solve_qp

__all__ = [
    "LpProblem",
    "LpResult",
    "QpProblem",
    "QpResult",
    "project_simplex",
    "solve_lp",
    "solve_qp",
]
