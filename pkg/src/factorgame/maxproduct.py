"""Exact MAP on tree factor graphs: two-pass max-product plus a brute-force
oracle.

Potentials are additive payoffs, so messages are max-sum values directly (no
exponentiation, no overflow).  Both solvers require singleton parameter
domains, i.e. a fully nominal instance.
"""

from __future__ import annotations

import numpy as np

from .graph import FactorGraphInstance, PureStrategyPair, is_tree, objective_eval

__all__ = ["brute_force_map", "max_product_map"]

BRUTE_FORCE_CAP = 2**20


def _require_nominal(instance: FactorGraphInstance) -> None:
    bad = [a for a, f in enumerate(instance.factors) if len(f.thetas) != 1]
    if bad:
        raise ValueError(f"parameter domains must be singletons (factors {bad})")


def _bfs_order(instance: FactorGraphInstance, root: int):
    """BFS over the bipartite tree; returns visit order and parent links.

    Nodes are ('v', i) or ('f', a); parents are indices of the other kind.
    """
    order = [("v", root)]
    parent: dict[tuple[str, int], int | None] = {("v", root): None}
    head = 0
    while head < len(order):
        kind, idx = order[head]
        head += 1
        if kind == "v":
            for a, _ in instance.variable_memberships[idx]:
                if ("f", a) not in parent:
                    parent[("f", a)] = idx
                    order.append(("f", a))
        else:
            for i in instance.factors[idx].neighbors:
                if ("v", i) not in parent:
                    parent[("v", i)] = idx
                    order.append(("v", i))
    return order, parent


def max_product_map(
    instance: FactorGraphInstance,
    root: int = 0,
    normalize: bool = True,
) -> tuple[np.ndarray, float]:
    """Exact MAP assignment by leaf-to-root and root-to-leaf max-product.

    Ties prefer the lower alphabet index.  ``normalize`` shifts each
    factor-to-variable message by its maximum; the returned assignment is
    unaffected (asserted in the tests) and the value is computed from the
    assignment, not from the messages.
    """
    if not is_tree(instance):
        raise ValueError("max-product MAP requires a tree factor graph")
    _require_nominal(instance)
    q = instance.alphabet.size
    order, parent = _bfs_order(instance, root)

    msg_v2f: dict[tuple[int, int], np.ndarray] = {}
    msg_f2v: dict[tuple[int, int], np.ndarray] = {}
    backptr: dict[int, tuple[tuple[int, ...], np.ndarray]] = {}

    for kind, idx in reversed(order):
        if kind == "v":
            if parent[("v", idx)] is None:
                continue
            up = parent[("v", idx)]
            total = np.zeros(q)
            for a, _ in instance.variable_memberships[idx]:
                if a != up:
                    total += msg_f2v[(a, idx)]
            msg_v2f[(idx, up)] = total
        else:
            f = instance.factors[idx]
            up = parent[("f", idx)]
            parent_pos = f.neighbors.index(up)
            cube = f.table[:, 0].reshape((q,) * f.degree)
            for pos, j in enumerate(f.neighbors):
                if j == up:
                    continue
                shape = [1] * f.degree
                shape[pos] = q
                cube = cube + msg_v2f[(j, idx)].reshape(shape)
            moved = np.moveaxis(cube, parent_pos, 0).reshape(q, -1)
            best = moved.max(axis=1)
            children = tuple(j for j in f.neighbors if j != up)
            backptr[idx] = (children, moved.argmax(axis=1))
            if normalize:
                best = best - best.max()
            msg_f2v[(idx, up)] = best

    belief = np.zeros(q)
    for a, _ in instance.variable_memberships[root]:
        belief += msg_f2v[(a, root)]
    x = np.full(instance.n_variables, -1, dtype=int)
    x[root] = int(np.argmax(belief))

    for kind, idx in order:
        if kind != "f":
            continue
        up = parent[("f", idx)]
        children, args = backptr[idx]
        flat = int(args[x[up]])
        for j in reversed(children):
            flat, digit = divmod(flat, q)
            x[j] = digit
    value = objective_eval(
        instance, PureStrategyPair(x, np.zeros(instance.n_factors, dtype=int))
    )
    return x, value


def brute_force_map(instance: FactorGraphInstance) -> tuple[np.ndarray, float]:
    """Exhaustive MAP over all |X|**n assignments; ties break toward the
    lexicographically smallest assignment (variable 0 most significant)."""
    _require_nominal(instance)
    n, q = instance.n_variables, instance.alphabet.size
    total = q**n
    if total > BRUTE_FORCE_CAP:
        raise ValueError(f"{total} assignments exceed the exhaustive-search cap")
    idx = np.arange(total)
    values = np.zeros(total)
    for f in instance.factors:
        flat = np.zeros(total, dtype=np.int64)
        for j in f.neighbors:
            flat = flat * q + (idx // q ** (n - 1 - j)) % q
        values += f.table[flat, 0]
    best = int(np.argmax(values))
    x = np.array([(best // q ** (n - 1 - j)) % q for j in range(n)], dtype=int)
    return x, float(values[best])
