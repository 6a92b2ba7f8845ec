"""Ising benchmark family: seeded random trees with uncertain edge couplings.

Edges come in two classes (positive, centered at +1; negative, centered at
-1) and carry a three-point uncertainty set {center - delta, center,
center + delta}.  Node fields are drawn once, uniformly from [-h, h], and
frozen as singleton parameter domains.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .graph import Alphabet, Factor, FactorGraphInstance

__all__ = ["IsingSpec", "build_ising", "generation_record", "nominal_instance", "random_tree"]

SPIN_ALPHABET = Alphabet((-1, 1))
# Pair products for assignment rows (-,-), (-,+), (+,-), (+,+).
_PAIR_PRODUCTS = np.array([1.0, -1.0, -1.0, 1.0])
_SPIN_VALUES = np.array([-1.0, 1.0])


@dataclass(frozen=True)
class IsingSpec:
    """Generator parameters for one benchmark instance."""

    n: int
    delta: float
    h: float
    seed: int
    edge_sign_prob: float = 0.5

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.h < 0:
            raise ValueError("h must be nonnegative")
        if not 0.0 <= self.edge_sign_prob <= 1.0:
            raise ValueError("edge_sign_prob must lie in [0, 1]")


def _prufer_decode(sequence, n: int) -> list[tuple[int, int]]:
    """Decode a Prufer sequence into the n-1 edges of its labeled tree."""
    degree = [1] * n
    for s in sequence:
        degree[s] += 1
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    edges = []
    for s in sequence:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, int(s)), max(leaf, int(s))))
        degree[s] -= 1
        if degree[s] == 1:
            heapq.heappush(leaves, int(s))
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((min(u, v), max(u, v)))
    return edges


def random_tree(n: int, seed: int) -> list[tuple[int, int]]:
    """Uniformly random labeled tree on n nodes (Prufer decoding); seeded."""
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = np.random.default_rng(seed)
    sequence = rng.integers(0, n, size=n - 2)
    return _prufer_decode(sequence, n)


def _draw(spec: IsingSpec):
    """All random draws for a spec, in a fixed order so that delta and h
    changes never shift the stream."""
    rng = np.random.default_rng(spec.seed)
    sequence = rng.integers(0, spec.n, size=spec.n - 2)
    edges = _prufer_decode(sequence, spec.n)
    edges.sort()
    signs = np.where(rng.random(len(edges)) < spec.edge_sign_prob, 1.0, -1.0)
    fields = rng.uniform(-spec.h, spec.h, size=spec.n) + 0.0
    return edges, signs, fields


def build_ising(spec: IsingSpec) -> FactorGraphInstance:
    """Instance with one degree-2 factor per tree edge and one degree-1
    factor per node; factor order is edges (sorted) then fields."""
    edges, signs, fields = _draw(spec)
    factors = []
    for (i, j), s in zip(edges, signs):
        if spec.delta == 0:
            thetas = (s,)
        else:
            thetas = (s - spec.delta, s, s + spec.delta)
        table = np.outer(_PAIR_PRODUCTS, np.asarray(thetas))
        factors.append(Factor((i, j), thetas, table))
    for i in range(spec.n):
        factors.append(Factor((i,), (float(fields[i]),), np.outer(_SPIN_VALUES, [fields[i]])))
    return FactorGraphInstance(SPIN_ALPHABET, spec.n, tuple(factors))


def generation_record(spec: IsingSpec) -> dict:
    """Reproducibility sidecar: seeds, parameters and the realized draws."""
    edges, signs, fields = _draw(spec)
    return {
        "n": spec.n,
        "delta": spec.delta,
        "h": spec.h,
        "seed": spec.seed,
        "edge_sign_prob": spec.edge_sign_prob,
        "edges": [list(e) for e in edges],
        "edge_classes": [int(s) for s in signs],
        "fields": [float(t) for t in fields],
    }


def nominal_instance(instance: FactorGraphInstance) -> FactorGraphInstance:
    """Collapse every parameter domain to its center value.

    Domains must have odd size (a unique center); singleton domains are
    left as is.
    """
    factors = []
    for a, f in enumerate(instance.factors):
        t = len(f.thetas)
        if t % 2 == 0:
            raise ValueError(f"factor {a}: even-size parameter domain has no center")
        mid = t // 2
        factors.append(Factor(f.neighbors, (f.thetas[mid],), f.table[:, [mid]]))
    return FactorGraphInstance(instance.alphabet, instance.n_variables, tuple(factors))
