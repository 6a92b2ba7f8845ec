"""Euclidean projection onto the probability simplex."""

from __future__ import annotations

import numpy as np

__all__ = ["project_simplex"]


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Project ``v`` onto {p : p >= 0, sum(p) = 1} in Euclidean norm.

    Sort-and-threshold algorithm, O(d log d): find the largest prefix of the
    descending sort whose shifted values stay positive, then clip.  The
    projection is unique, idempotent and 1-Lipschitz.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a nonempty 1-D vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite input")
    if v.size == 2:
        # projection onto the segment (1,0)-(0,1), solved in closed form
        t = min(max((v[0] - v[1] + 1.0) * 0.5, 0.0), 1.0)
        return np.array([t, 1.0 - t])
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u)
    j = np.arange(1, v.size + 1)
    candidates = np.nonzero(u + (1.0 - cumulative) / j > 0)[0]
    rho = candidates[-1]
    tau = (1.0 - cumulative[rho]) / (rho + 1.0)
    return np.maximum(v + tau, 0.0)
