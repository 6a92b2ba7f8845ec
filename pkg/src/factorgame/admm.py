"""Consensus ADMM on the epigraph form of the minimax marginal problem.

The worst-case payoff maximization over locally consistent marginals is
solved as  minimize sum_a lambda_a  subject to
lambda_a + psi_theta . p_a >= 0 for every parameter value, p >= 0, the
node marginals on the simplex, and per-edge marginalization consistency.
Factor blocks and variable blocks are minimized alternately against the
augmented Lagrangian with penalty (rho/2) sum (marg(p_a) - p_i)^2; the
scaled duals u_ai accumulate the inconsistency residuals
r_ai = p_i - marg(p_a) (one fixed sign convention throughout).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .graph import FactorGraphInstance, marginalize_factor, validate
from .numerics import QpProblem, project_simplex, solve_qp

__all__ = [
    "AdmmConfig",
    "AdmmState",
    "MarginalSet",
    "SolveReport",
    "SolverError",
    "dual_update",
    "engineer_objective",
    "factor_update",
    "init",
    "residuals",
    "solve",
    "variable_update",
]

DEFAULT_RHO = 1.0
DEFAULT_MAX_ITER = 100
DEFAULT_PRIMAL_TOL = 1e-6
DEFAULT_OBJECTIVE_TOL = 1e-9


class SolverError(RuntimeError):
    """A factor subproblem failed to solve to optimality."""


@dataclass
class AdmmConfig:
    rho: float = DEFAULT_RHO
    max_iter: int = DEFAULT_MAX_ITER
    primal_tol: float = DEFAULT_PRIMAL_TOL
    objective_tol: float = DEFAULT_OBJECTIVE_TOL

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.primal_tol <= 0 or self.objective_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class MarginalSet:
    """Factor marginals (flat tables) and node marginals (n x |X|)."""

    factor_marginals: list[np.ndarray]
    node_marginals: np.ndarray

    def copy(self) -> "MarginalSet":
        return MarginalSet(
            [p.copy() for p in self.factor_marginals], self.node_marginals.copy()
        )


@dataclass
class AdmmState:
    marginals: MarginalSet
    duals: list[np.ndarray]  # per factor, shape (degree, |X|), rows follow neighbors
    epigraph: np.ndarray     # lambda_a per factor
    iteration: int = 0


@dataclass
class SolveReport:
    marginals: MarginalSet
    engineer_objective: float
    internal_cost_trace: np.ndarray
    objective_trace: np.ndarray
    residual_trace: np.ndarray
    iterations_used: int
    converged: bool
    wall_time: float


class _FactorWorkspace:
    """Frozen QP data for one factor plus warm-start memory."""

    __slots__ = ("marg_op", "problem", "rho", "active", "cache", "n_cells", "neighbors")

    def __init__(self, factor, q: int, rho: float):
        deg = factor.degree
        n_cells = q**deg
        marg_op = np.zeros((deg * q, n_cells))
        for cell in range(n_cells):
            rest = cell
            for pos in range(deg - 1, -1, -1):
                rest, digit = divmod(rest, q)
                marg_op[pos * q + digit, cell] = 1.0
        quad = np.zeros((n_cells + 1, n_cells + 1))
        quad[:n_cells, :n_cells] = rho * (marg_op.T @ marg_op)
        n_theta = len(factor.thetas)
        G = np.zeros((n_theta + n_cells, n_cells + 1))
        G[:n_theta, :n_cells] = factor.table.T
        G[:n_theta, n_cells] = 1.0
        G[n_theta:, :n_cells] = np.eye(n_cells)
        self.marg_op = marg_op
        self.problem = QpProblem(quad, np.zeros(n_cells + 1), G, np.zeros(n_theta + n_cells))
        self.rho = rho
        self.active = None
        self.cache: dict = {}
        self.n_cells = n_cells
        self.neighbors = np.asarray(factor.neighbors, dtype=int)


def init(instance: FactorGraphInstance) -> AdmmState:
    """Uniform marginals, zero duals, tight epigraph values."""
    q = instance.alphabet.size
    node = np.full((instance.n_variables, q), 1.0 / q)
    factor_marginals = []
    epigraph = np.empty(instance.n_factors)
    duals = []
    for a, f in enumerate(instance.factors):
        p = np.full(q**f.degree, q ** (-float(f.degree)))
        factor_marginals.append(p)
        epigraph[a] = -np.min(p @ f.table)
        duals.append(np.zeros((f.degree, q)))
    return AdmmState(MarginalSet(factor_marginals, node), duals, epigraph)


def factor_update(
    instance: FactorGraphInstance,
    a: int,
    state: AdmmState,
    cfg: AdmmConfig,
    _workspace: _FactorWorkspace | None = None,
) -> tuple[np.ndarray, float]:
    """Exact minimizer of the factor block.

    minimize  lambda + (rho/2) sum_i,x (marg_i(p)(x) - p_i(x) - u_ai(x))^2
    s.t.      lambda + psi_theta . p >= 0  for every theta,  p >= 0.
    """
    f = instance.factors[a]
    q = instance.alphabet.size
    ws = _workspace or _FactorWorkspace(f, q, cfg.rho)
    if ws.rho != cfg.rho:
        raise ValueError("workspace built for a different rho")
    k = ws.n_cells
    targets = state.marginals.node_marginals[ws.neighbors] + state.duals[a]
    c = ws.problem.c
    c[:k] = -cfg.rho * (ws.marg_op.T @ targets.ravel())
    c[k] = 1.0
    p_start = np.maximum(state.marginals.factor_marginals[a], 0.0)
    # start with the epigraph value exactly tight so its row is active
    x0 = np.append(p_start, -float(np.min(p_start @ f.table)))
    result = solve_qp(
        ws.problem, x0=x0, active0=ws.active, max_iter=500, cache=ws.cache
    )
    if result.status != "optimal":
        raise SolverError(f"factor {a}: QP solver returned {result.status}")
    ws.active = result.active
    return result.z[:k].copy(), float(result.z[k])


def variable_update(instance: FactorGraphInstance, i: int, state: AdmmState) -> np.ndarray:
    """Project the dual-corrected mean of the neighboring factor marginals."""
    q = instance.alphabet.size
    memberships = instance.variable_memberships[i]
    acc = np.zeros(q)
    for a, pos in memberships:
        f = instance.factors[a]
        marg = marginalize_factor(state.marginals.factor_marginals[a], f.degree, q, pos)
        acc += marg - state.duals[a][pos]
    return project_simplex(acc / len(memberships))


def _factor_margs(instance, a, p_a):
    f = instance.factors[a]
    q = instance.alphabet.size
    deg = f.degree
    if deg == 1:
        return p_a.reshape(1, q)
    cube = p_a.reshape((q,) * deg)
    out = np.empty((deg, q))
    for pos in range(deg):
        out[pos] = cube.sum(axis=tuple(k for k in range(deg) if k != pos))
    return out


def dual_update(instance: FactorGraphInstance, state: AdmmState) -> list[np.ndarray]:
    """u_ai += r_ai with r_ai = p_i - marg_i(p_a); returns the new duals."""
    new = []
    for a, f in enumerate(instance.factors):
        margs = _factor_margs(instance, a, state.marginals.factor_marginals[a])
        r = state.marginals.node_marginals[list(f.neighbors)] - margs
        new.append(state.duals[a] + r)
    return new


def residuals(instance: FactorGraphInstance, state: AdmmState) -> tuple[np.ndarray, float]:
    """Marginal inconsistency residuals r_ai(x) = p_i(x) - marg_i(p_a)(x)
    stacked over edges, plus their mean absolute value."""
    q = instance.alphabet.size
    pieces = []
    for a, f in enumerate(instance.factors):
        margs = _factor_margs(instance, a, state.marginals.factor_marginals[a])
        pieces.append((state.marginals.node_marginals[list(f.neighbors)] - margs).ravel())
    flat = np.concatenate(pieces)
    return flat, float(np.abs(flat).sum() / flat.size)


def engineer_objective(instance: FactorGraphInstance, marginals: MarginalSet) -> float:
    """Worst-case expected payoff sum_a min_theta psi_theta . p_a."""
    return float(
        sum(np.min(marginals.factor_marginals[a] @ f.table) for a, f in enumerate(instance.factors))
    )


def solve(instance: FactorGraphInstance, cfg: AdmmConfig | None = None) -> SolveReport:
    """Run the alternating updates until the marginals are consistent and the
    epigraph cost has stabilized, or the iteration cap is hit.

    Convergence requires the primal residual (marginal inconsistency), the
    dual residual (node-marginal movement) and the one-step cost change to
    fall below tolerance together; the primal test alone can hold at
    degenerate intermediate iterates that are far from optimal.

    Per iteration: every factor block (ascending index), then every variable
    block, then the dual step.  The order is fixed so runs are bit-for-bit
    reproducible; blocks within a phase are mutually independent.
    """
    errors = validate(instance)
    if errors:
        raise ValueError("invalid instance: " + "; ".join(errors))
    cfg = cfg or AdmmConfig()
    q = instance.alphabet.size
    n, m = instance.n_variables, instance.n_factors
    state = init(instance)
    workspaces = [_FactorWorkspace(f, q, cfg.rho) for f in instance.factors]
    neighbors_of = [list(f.neighbors) for f in instance.factors]
    memberships = instance.variable_memberships
    n_edge_values = sum(f.degree for f in instance.factors) * q

    cost_trace: list[float] = []
    objective_trace: list[float] = []
    residual_trace: list[float] = []
    converged = False
    prev_cost = None
    edge_weight = np.zeros(n)  # how many edges touch each variable
    for i in range(n):
        edge_weight[i] = len(memberships[i])
    prev_node = state.marginals.node_marginals.copy()
    t_start = time.perf_counter()

    for iteration in range(1, cfg.max_iter + 1):
        for a in range(m):
            p_a, lam = factor_update(instance, a, state, cfg, workspaces[a])
            state.marginals.factor_marginals[a] = p_a
            state.epigraph[a] = lam
        margs = [_factor_margs(instance, a, state.marginals.factor_marginals[a]) for a in range(m)]
        node = state.marginals.node_marginals
        for i in range(n):
            acc = np.zeros(q)
            for a, pos in memberships[i]:
                acc += margs[a][pos] - state.duals[a][pos]
            node[i] = project_simplex(acc / len(memberships[i]))
        residual_abs = 0.0
        for a in range(m):
            r = node[neighbors_of[a]] - margs[a]
            state.duals[a] += r
            residual_abs += np.abs(r).sum()
        state.iteration = iteration

        mean_l1 = residual_abs / n_edge_values
        # dual residual: node-marginal movement, edge-weighted like the primal
        dual_l1 = cfg.rho * float(
            (np.abs(node - prev_node).sum(axis=1) * edge_weight).sum() / n_edge_values
        )
        prev_node[:] = node
        cost = float(state.epigraph.sum())
        objective = engineer_objective(instance, state.marginals)
        cost_trace.append(cost)
        objective_trace.append(objective)
        residual_trace.append(mean_l1)
        if (
            mean_l1 <= cfg.primal_tol
            and dual_l1 <= cfg.primal_tol
            and prev_cost is not None
            and abs(cost - prev_cost) <= cfg.objective_tol
        ):
            converged = True
            break
        prev_cost = cost

    wall = time.perf_counter() - t_start
    return SolveReport(
        marginals=state.marginals,
        engineer_objective=objective_trace[-1],
        internal_cost_trace=np.array(cost_trace),
        objective_trace=np.array(objective_trace),
        residual_trace=np.array(residual_trace),
        iterations_used=len(cost_trace),
        converged=converged,
        wall_time=wall,
    )
