"""Factor-graph game instances: variables, factors, potentials, pure strategies.

An instance is a bipartite graph between variable nodes (owned by the
maximizing player) and factor nodes (owned by the minimizing player).  Each
factor couples its neighbor variables through a dense potential table with one
row per joint neighbor assignment and one column per parameter value.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "Alphabet",
    "Factor",
    "FactorGraphInstance",
    "PureStrategyPair",
    "assignment_index",
    "assignment_digits",
    "factor_assignment_indices",
    "is_tree",
    "marginalize_factor",
    "objective_eval",
    "validate",
]


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct symbols a variable may take."""

    symbols: tuple

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if len(self.symbols) < 2:
            raise ValueError("alphabet must contain at least two symbols")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet symbols must be distinct")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol) -> int:
        return self.symbols.index(symbol)


@dataclass(frozen=True, eq=False)
class Factor:
    """One payoff term: neighbor variables, parameter domain, potential table.

    ``table`` has shape ``(|X| ** degree, len(thetas))``.  Rows enumerate
    joint assignments of the neighbors in row-major order with neighbors
    sorted ascending by variable index and the first neighbor most
    significant.  This row order is part of the on-disk format contract.
    """

    neighbors: tuple[int, ...]
    thetas: tuple[float, ...]
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "neighbors", tuple(int(i) for i in self.neighbors))
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        table = np.array(self.table, dtype=float)
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def degree(self) -> int:
        return len(self.neighbors)


@dataclass(frozen=True, eq=False)
class FactorGraphInstance:
    """Immutable bipartite game graph; safe to share across workers."""

    alphabet: Alphabet
    n_variables: int
    factors: tuple[Factor, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def n_factors(self) -> int:
        return len(self.factors)

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """(factor, variable) pairs, grouped by factor in storage order."""
        return tuple((a, i) for a, f in enumerate(self.factors) for i in f.neighbors)

    @cached_property
    def variable_memberships(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per variable: (factor index, position within that factor) pairs."""
        out: list[list[tuple[int, int]]] = [[] for _ in range(self.n_variables)]
        for a, f in enumerate(self.factors):
            for pos, i in enumerate(f.neighbors):
                if 0 <= i < self.n_variables:
                    out[i].append((a, pos))
        return tuple(tuple(memb) for memb in out)


def validate(instance: FactorGraphInstance) -> list[str]:
    """Return every violated structural invariant; empty list means ok."""
    errors: list[str] = []
    n = instance.n_variables
    q = instance.alphabet.size
    if n < 1:
        errors.append("instance needs at least one variable")
    for a, f in enumerate(instance.factors):
        if f.degree < 1:
            errors.append(f"factor {a} has degree 0")
            continue
        if any(i < 0 or i >= n for i in f.neighbors):
            errors.append(f"factor {a}: neighbor index out of range")
            continue
        if len(set(f.neighbors)) != f.degree:
            errors.append(f"factor {a}: duplicate edge (repeated neighbor)")
        if list(f.neighbors) != sorted(f.neighbors):
            errors.append(f"factor {a}: neighbors must be ascending")
        if not f.thetas:
            errors.append(f"factor {a}: empty parameter domain")
        elif len(set(f.thetas)) != len(f.thetas):
            errors.append(f"factor {a}: parameter domain values must be distinct")
        expected = (q**f.degree, len(f.thetas))
        if f.table.ndim != 2 or f.table.shape != expected:
            errors.append(
                f"factor {a}: table shape {tuple(f.table.shape)} != expected {expected}"
            )
        elif not np.all(np.isfinite(f.table)):
            errors.append(f"factor {a}: non-finite potential entry")
    for i, memb in enumerate(instance.variable_memberships):
        if not memb:
            errors.append(f"variable {i} has degree 0")
    return errors


@dataclass(frozen=True)
class PureStrategyPair:
    """Pure strategies as index vectors.

    ``x[i]`` indexes the alphabet; ``theta[a]`` indexes factor ``a``'s
    parameter domain.
    """

    x: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=int))
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=int))

    @classmethod
    def from_labels(cls, instance: FactorGraphInstance, x_labels, theta_labels):
        """Build from alphabet symbols and parameter values instead of indices."""
        x = [instance.alphabet.index(s) for s in x_labels]
        theta = [
            f.thetas.index(float(t))
            for f, t in zip(instance.factors, theta_labels, strict=True)
        ]
        return cls(np.array(x), np.array(theta))


def assignment_index(digits, q: int) -> int:
    """Row index of a joint assignment, first digit most significant."""
    idx = 0
    for d in digits:
        idx = idx * q + int(d)
    return idx


def assignment_digits(index: int, degree: int, q: int) -> tuple[int, ...]:
    """Inverse of :func:`assignment_index`."""
    out = []
    for _ in range(degree):
        index, d = divmod(index, q)
        out.append(d)
    return tuple(reversed(out))


def factor_assignment_indices(factor: Factor, assignments: np.ndarray, q: int) -> np.ndarray:
    """Vectorized table-row lookup for a batch of full assignments (N, n)."""
    strides = q ** np.arange(factor.degree - 1, -1, -1)
    return assignments[:, list(factor.neighbors)] @ strides


def objective_eval(instance: FactorGraphInstance, pair: PureStrategyPair) -> float:
    """Total payoff of a pure strategy pair: the sum of factor potentials."""
    x = pair.x
    theta = pair.theta
    n, q = instance.n_variables, instance.alphabet.size
    if x.shape != (n,) or np.any(x < 0) or np.any(x >= q):
        raise ValueError("malformed variable assignment")
    if theta.shape != (instance.n_factors,):
        raise ValueError("malformed parameter assignment")
    total = 0.0
    for a, f in enumerate(instance.factors):
        t = int(theta[a])
        if t < 0 or t >= len(f.thetas):
            raise ValueError(f"malformed parameter assignment for factor {a}")
        total += f.table[assignment_index(x[list(f.neighbors)], q), t]
    return float(total)


def is_tree(instance: FactorGraphInstance) -> bool:
    """True iff the bipartite graph is connected and acyclic."""
    n, m = instance.n_variables, instance.n_factors
    n_edges = sum(f.degree for f in instance.factors)
    if n_edges != n + m - 1:
        return False
    # connectivity by BFS over the bipartite adjacency
    seen_v = [False] * n
    seen_f = [False] * m
    stack = [("v", 0)]
    seen_v[0] = True
    while stack:
        kind, idx = stack.pop()
        if kind == "v":
            for a, _ in instance.variable_memberships[idx]:
                if not seen_f[a]:
                    seen_f[a] = True
                    stack.append(("f", a))
        else:
            for i in instance.factors[idx].neighbors:
                if not seen_v[i]:
                    seen_v[i] = True
                    stack.append(("v", i))
    return all(seen_v) and all(seen_f)


def marginalize_factor(p_a: np.ndarray, degree: int, q: int, pos: int) -> np.ndarray:
    """Sum a flat factor table over all neighbor axes except ``pos``."""
    if degree == 1:
        return np.asarray(p_a, dtype=float)
    cube = np.asarray(p_a, dtype=float).reshape((q,) * degree)
    axes = tuple(k for k in range(degree) if k != pos)
    return cube.sum(axis=axes)
