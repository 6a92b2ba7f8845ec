"""Game-theoretic evaluation: payoffs, best responses, sampling, oracles.

Only the per-factor marginals of either player's mixed strategy enter the
expected payoff, so the maximizer is represented by a
:class:`~factorgame.admm.MarginalSet` and the minimizer by one distribution
per factor over that factor's parameter domain.  Two independent LP oracles
compute the exact game value: one over the full joint simplex (exponential,
small instances only) and one over the locally consistent marginals, which
coincide on trees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .admm import MarginalSet
from .graph import (
    FactorGraphInstance,
    assignment_index,
    factor_assignment_indices,
    is_tree,
    marginalize_factor,
)
from .numerics import LpProblem, solve_lp

__all__ = [
    "EngineerStrategy",
    "NatureStrategy",
    "SamplingError",
    "assignment_payoff",
    "exact_minimax_joint",
    "expected_payoff",
    "local_polytope_lp",
    "marginals_from_joint",
    "max_inconsistency",
    "mix_with_uniform",
    "nature_best_response",
    "random_joint_strategy",
    "random_nature_strategy",
    "sample_tree_mrf",
    "uniform_nature",
]

JOINT_ORACLE_CAP = 2**14
CONSISTENCY_TOL = 1e-6
_SLICE_FLOOR = 1e-12


class SamplingError(RuntimeError):
    """Conditioning slice has no probability mass (structural zero)."""


@dataclass
class NatureStrategy:
    """One distribution per factor over that factor's parameter domain."""

    weights: list[np.ndarray]

    def __post_init__(self):
        self.weights = [np.asarray(w, dtype=float) for w in self.weights]
        for a, w in enumerate(self.weights):
            if w.ndim != 1 or w.size == 0:
                raise ValueError(f"factor {a}: weights must be a nonempty vector")
            if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-12:
                raise ValueError(f"factor {a}: weights must be a distribution")


@dataclass
class EngineerStrategy:
    """Marginal form of a mixed strategy, optionally backed by a pure one."""

    marginals: MarginalSet
    assignment: np.ndarray | None = None

    @classmethod
    def from_assignment(cls, instance: FactorGraphInstance, x) -> "EngineerStrategy":
        x = np.asarray(x, dtype=int)
        q = instance.alphabet.size
        node = np.zeros((instance.n_variables, q))
        node[np.arange(instance.n_variables), x] = 1.0
        factor_marginals = []
        for f in instance.factors:
            p = np.zeros(q**f.degree)
            p[assignment_index(x[list(f.neighbors)], q)] = 1.0
            factor_marginals.append(p)
        return cls(MarginalSet(factor_marginals, node), x)


def max_inconsistency(instance: FactorGraphInstance, marginals: MarginalSet) -> float:
    """Largest gap between a node marginal and a factor marginalization."""
    q = instance.alphabet.size
    worst = 0.0
    for a, f in enumerate(instance.factors):
        for pos, i in enumerate(f.neighbors):
            marg = marginalize_factor(marginals.factor_marginals[a], f.degree, q, pos)
            worst = max(worst, float(np.abs(marg - marginals.node_marginals[i]).max()))
    return worst


def expected_payoff(
    instance: FactorGraphInstance,
    engineer: EngineerStrategy,
    nature: NatureStrategy,
) -> float:
    """sum_a sum_theta q_a(theta) sum_cells p_a(cells) psi_a(cells, theta)."""
    total = 0.0
    for a, f in enumerate(instance.factors):
        p_a = engineer.marginals.factor_marginals[a]
        w = nature.weights[a]
        if p_a.shape[0] != f.table.shape[0] or w.shape[0] != f.table.shape[1]:
            raise ValueError(f"factor {a}: strategy shapes do not match the instance")
        total += (p_a @ f.table) @ w
    return float(total)


def assignment_payoff(instance: FactorGraphInstance, x, nature: NatureStrategy) -> float:
    """Expected payoff of a pure maximizer assignment against a mixed opponent."""
    x = np.asarray(x, dtype=int)
    q = instance.alphabet.size
    total = 0.0
    for a, f in enumerate(instance.factors):
        row = assignment_index(x[list(f.neighbors)], q)
        total += f.table[row] @ nature.weights[a]
    return float(total)


def nature_best_response(
    instance: FactorGraphInstance, engineer: EngineerStrategy
) -> NatureStrategy:
    """Pointwise minimizer; decomposes per factor because the payoff is a sum
    of per-factor terms.  Ties break toward the lowest stored index."""
    weights = []
    for a, f in enumerate(instance.factors):
        scores = engineer.marginals.factor_marginals[a] @ f.table
        w = np.zeros(len(f.thetas))
        w[int(np.argmin(scores))] = 1.0
        weights.append(w)
    return NatureStrategy(weights)


def uniform_nature(instance: FactorGraphInstance) -> NatureStrategy:
    return NatureStrategy(
        [np.full(len(f.thetas), 1.0 / len(f.thetas)) for f in instance.factors]
    )


def mix_with_uniform(nature: NatureStrategy, alpha: float) -> NatureStrategy:
    """(1 - alpha) q + alpha * uniform, factor by factor."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    return NatureStrategy(
        [(1.0 - alpha) * w + alpha / w.size for w in nature.weights]
    )


def sample_tree_mrf(
    instance: FactorGraphInstance, engineer: EngineerStrategy, seed
) -> np.ndarray:
    """Draw a pure assignment from the tree MRF the marginals describe.

    Roots the tree at variable 0, draws the root from its node marginal and
    descends, drawing the remaining neighbors of each factor from the factor
    marginal conditioned on the already-assigned variable.  Exact on trees,
    where local consistency implies global realizability.
    """
    if not is_tree(instance):
        raise ValueError("sampling requires a tree factor graph")
    if max_inconsistency(instance, engineer.marginals) > CONSISTENCY_TOL:
        raise ValueError("marginals are not locally consistent enough to sample")
    q = instance.alphabet.size
    rng = np.random.default_rng(seed)
    x = np.full(instance.n_variables, -1, dtype=int)

    root_weights = np.maximum(engineer.marginals.node_marginals[0], 0.0)
    root_weights = root_weights / root_weights.sum()
    x[0] = int(rng.choice(q, p=root_weights))
    queue = [0]
    seen_factors = set()
    while queue:
        i = queue.pop(0)
        for a, pos in instance.variable_memberships[i]:
            if a in seen_factors:
                continue
            seen_factors.add(a)
            f = instance.factors[a]
            if f.degree == 1:
                continue
            cube = engineer.marginals.factor_marginals[a].reshape((q,) * f.degree)
            conditional = np.maximum(np.take(cube, x[i], axis=pos).ravel(), 0.0)
            mass = conditional.sum()
            if mass <= _SLICE_FLOOR:
                raise SamplingError(
                    f"factor {a}: no mass on the slice for value index {x[i]}"
                )
            draw = int(rng.choice(conditional.size, p=conditional / mass))
            others = [j for j in f.neighbors if j != i]
            for j in reversed(others):
                draw, digit = divmod(draw, q)
                x[j] = digit
                queue.append(j)
    return x


def marginals_from_joint(instance: FactorGraphInstance, joint: np.ndarray) -> MarginalSet:
    """Factor and node marginals of a joint distribution over all assignments."""
    n, q = instance.n_variables, instance.alphabet.size
    joint = np.asarray(joint, dtype=float)
    total = q**n
    if joint.shape != (total,):
        raise ValueError("joint distribution has wrong length")
    idx = np.arange(total)
    factor_marginals = []
    for f in instance.factors:
        rows = factor_assignment_indices(f, _all_assignments(n, q), q)
        factor_marginals.append(np.bincount(rows, weights=joint, minlength=q**f.degree))
    node = np.zeros((n, q))
    for i in range(n):
        digits = (idx // q ** (n - 1 - i)) % q
        node[i] = np.bincount(digits, weights=joint, minlength=q)
    return MarginalSet(factor_marginals, node)


def _all_assignments(n: int, q: int) -> np.ndarray:
    idx = np.arange(q**n)
    return np.stack([(idx // q ** (n - 1 - j)) % q for j in range(n)], axis=1)


def random_joint_strategy(instance: FactorGraphInstance, rng) -> EngineerStrategy:
    """Marginals of a Dirichlet-random joint distribution (always realizable)."""
    n, q = instance.n_variables, instance.alphabet.size
    joint = rng.dirichlet(np.ones(q**n))
    return EngineerStrategy(marginals_from_joint(instance, joint))


def random_nature_strategy(instance: FactorGraphInstance, rng) -> NatureStrategy:
    return NatureStrategy(
        [rng.dirichlet(np.ones(len(f.thetas))) for f in instance.factors]
    )


def exact_minimax_joint(instance: FactorGraphInstance) -> tuple[float, np.ndarray]:
    """Game value and an optimal joint distribution, by LP over the full
    |X|**n simplex:  maximize sum_a lambda_a  s.t.
    lambda_a <= sum_x p(x) psi_a(x, theta) for every a, theta."""
    n, q, m = instance.n_variables, instance.alphabet.size, instance.n_factors
    total = q**n
    if total > JOINT_ORACLE_CAP:
        raise ValueError(f"{total} joint assignments exceed the oracle cap")
    assignments = _all_assignments(n, q)
    rows = []
    for a, f in enumerate(instance.factors):
        cell = factor_assignment_indices(f, assignments, q)
        for t in range(len(f.thetas)):
            row = np.zeros(total + m)
            row[:total] = f.table[cell, t]
            row[total + a] = -1.0
            rows.append(row)
    a_ineq = np.array(rows)
    b_ineq = np.zeros(len(rows))
    a_eq = np.zeros((1, total + m))
    a_eq[0, :total] = 1.0
    c = np.concatenate([np.zeros(total), -np.ones(m)])
    lower = np.concatenate([np.zeros(total), np.full(m, -np.inf)])
    res = solve_lp(LpProblem(c, a_eq, np.ones(1), a_ineq, b_ineq, lower))
    if res.status != "optimal":
        raise RuntimeError(f"joint oracle LP failed: {res.status}")
    return -res.value, res.z[:total]


def local_polytope_lp(instance: FactorGraphInstance) -> tuple[float, MarginalSet]:
    """Game value over locally consistent marginals (exact on trees), plus an
    optimal marginal set.  Variables are the factor marginals, the node
    marginals and one epigraph value per factor."""
    n, q, m = instance.n_variables, instance.alphabet.size, instance.n_factors
    offsets = []
    width = 0
    for f in instance.factors:
        offsets.append(width)
        width += q**f.degree
    node_base = width
    lam_base = node_base + n * q
    dim = lam_base + m

    eq_rows = []
    eq_rhs = []
    for a, f in enumerate(instance.factors):
        cells = q**f.degree
        for pos, i in enumerate(f.neighbors):
            for s in range(q):
                row = np.zeros(dim)
                for cell in range(cells):
                    digit = (cell // q ** (f.degree - 1 - pos)) % q
                    if digit == s:
                        row[offsets[a] + cell] = 1.0
                row[node_base + i * q + s] = -1.0
                eq_rows.append(row)
                eq_rhs.append(0.0)
    for i in range(n):
        row = np.zeros(dim)
        row[node_base + i * q : node_base + (i + 1) * q] = 1.0
        eq_rows.append(row)
        eq_rhs.append(1.0)

    ineq_rows = []
    for a, f in enumerate(instance.factors):
        for t in range(len(f.thetas)):
            row = np.zeros(dim)
            row[offsets[a] : offsets[a] + q**f.degree] = f.table[:, t]
            row[lam_base + a] = -1.0
            ineq_rows.append(row)

    c = np.zeros(dim)
    c[lam_base:] = -1.0
    lower = np.zeros(dim)
    lower[lam_base:] = -np.inf
    res = solve_lp(
        LpProblem(
            c,
            np.array(eq_rows),
            np.array(eq_rhs),
            np.array(ineq_rows),
            np.zeros(len(ineq_rows)),
            lower,
        )
    )
    if res.status != "optimal":
        raise RuntimeError(f"local-polytope LP failed: {res.status}")
    factor_marginals = [
        res.z[offsets[a] : offsets[a] + q**f.degree].copy()
        for a, f in enumerate(instance.factors)
    ]
    node = res.z[node_base:lam_base].reshape(n, q).copy()
    return -res.value, MarginalSet(factor_marginals, node)
