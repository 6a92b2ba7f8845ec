"""JSON serialization for instances, marginal sets and run metadata.

The instance format stores, per factor, the neighbor list, the parameter
domain and the potential table flattened in (assignment-major, theta-minor)
order.  Files are written canonically (sorted keys, fixed indentation) so
reruns with identical inputs are byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .graph import Alphabet, Factor, FactorGraphInstance, validate

__all__ = [
    "dump_json",
    "instance_from_dict",
    "instance_to_dict",
    "load_instance",
    "load_marginals",
    "save_instance",
    "save_marginals",
]


def dump_json(obj, path) -> None:
    """Write canonical JSON (deterministic bytes for identical content)."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def instance_to_dict(instance: FactorGraphInstance) -> dict:
    return {
        "alphabet": list(instance.alphabet.symbols),
        "variables": instance.n_variables,
        "factors": [
            {
                "neighbors": list(f.neighbors),
                "thetas": list(f.thetas),
                "table": f.table.ravel(order="C").tolist(),
            }
            for f in instance.factors
        ],
    }


def instance_from_dict(data: dict) -> FactorGraphInstance:
    try:
        alphabet = Alphabet(tuple(data["alphabet"]))
        n = int(data["variables"])
        factors = []
        for fd in data["factors"]:
            thetas = tuple(float(t) for t in fd["thetas"])
            flat = np.asarray(fd["table"], dtype=float)
            if not thetas or flat.size % len(thetas) != 0:
                raise ValueError("table length incompatible with parameter domain")
            table = flat.reshape(-1, len(thetas))
            factors.append(Factor(tuple(fd["neighbors"]), thetas, table))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed instance data: {exc}") from exc
    instance = FactorGraphInstance(alphabet, n, tuple(factors))
    errors = validate(instance)
    if errors:
        raise ValueError("invalid instance: " + "; ".join(errors))
    return instance


def save_instance(instance: FactorGraphInstance, path) -> None:
    dump_json(instance_to_dict(instance), path)


def load_instance(path) -> FactorGraphInstance:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"not valid JSON: {exc}") from exc
    return instance_from_dict(data)


def save_marginals(factor_marginals, node_marginals, path) -> None:
    dump_json(
        {
            "factor_marginals": [np.asarray(p).tolist() for p in factor_marginals],
            "node_marginals": np.asarray(node_marginals).tolist(),
        },
        path,
    )


def load_marginals(path) -> tuple[list[np.ndarray], np.ndarray]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    factor_marginals = [np.asarray(p, dtype=float) for p in data["factor_marginals"]]
    node_marginals = np.asarray(data["node_marginals"], dtype=float)
    return factor_marginals, node_marginals
