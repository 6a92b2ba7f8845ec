"""Shared builders for small spin instances used across the test modules."""

import numpy as np

from factorgame.graph import Alphabet, Factor, FactorGraphInstance

SPINS = Alphabet((-1, 1))
PAIR_PRODUCTS = np.array([1.0, -1.0, -1.0, 1.0])
SPIN_VALUES = np.array([-1.0, 1.0])


def edge_factor(i, j, thetas):
    """Degree-2 factor with psi(x_i, x_j; theta) = theta * x_i * x_j."""
    return Factor((i, j), tuple(thetas), np.outer(PAIR_PRODUCTS, np.asarray(thetas, float)))


def field_factor(i, theta):
    """Degree-1 factor with psi(x_i; theta) = theta * x_i."""
    return Factor((i,), (theta,), np.outer(SPIN_VALUES, [theta]))


def single_edge_instance(edge_thetas, fields=(0.0, 0.0)):
    factors = (
        edge_factor(0, 1, edge_thetas),
        field_factor(0, fields[0]),
        field_factor(1, fields[1]),
    )
    return FactorGraphInstance(SPINS, 2, factors)


def chain_instance(n, edge_theta=1.0, field_thetas=None):
    factors = [edge_factor(i, i + 1, [edge_theta]) for i in range(n - 1)]
    if field_thetas is not None:
        factors += [field_factor(i, t) for i, t in enumerate(field_thetas)]
    return FactorGraphInstance(SPINS, n, tuple(factors))
