"""Dense convex QP solver: primal active set with a null-space step.

Solves  minimize 0.5 z'Qz + c'z  subject to  G z >= h  for small dense
problems.  Q may be positive semidefinite; directions of zero curvature are
followed as descent rays until a constraint blocks, which is exactly the
situation produced by epigraph variables that enter the objective linearly.

Callers that solve the same constraint geometry repeatedly (only ``c``
changing) can pass a ``cache`` dict: step and multiplier operators are
stored per working set, so a warm-started solve near the previous optimum
costs a handful of small mat-vecs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "QpProblem",
    "QpResult",
    "solve_qp",
    "STATIONARITY_TOL",
    "COMPLEMENTARITY_TOL",
    "FEASIBILITY_TOL",
]

# Guarantees on returned optima (checked by the test suite).
STATIONARITY_TOL = 1e-8
COMPLEMENTARITY_TOL = 1e-8
FEASIBILITY_TOL = 1e-10

_ACTIVE_TOL = 1e-9      # slack at or below this counts as active
_SYMMETRY_TOL = 1e-12
_MULT_TOL = 1e-9        # multiplier negativity that forces a drop
_STEP_TOL = 1e-12
_CURVATURE_TOL = 1e-12  # reduced-Hessian eigenvalues below this are flat
_CACHE_LIMIT = 128


@dataclass
class QpProblem:
    """minimize 0.5 z'Qz + c'z  s.t.  G z >= h."""

    Q: np.ndarray
    c: np.ndarray
    G: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        self.Q = np.asarray(self.Q, dtype=float)
        self.c = np.asarray(self.c, dtype=float)
        self.G = np.asarray(self.G, dtype=float)
        self.h = np.asarray(self.h, dtype=float)
        d = self.c.shape[0]
        if self.Q.shape != (d, d):
            raise ValueError("Q and c dimensions disagree")
        if np.max(np.abs(self.Q - self.Q.T), initial=0.0) > _SYMMETRY_TOL:
            raise ValueError("Q must be symmetric")
        if self.G.ndim != 2 or self.G.shape[1] != d or self.h.shape != (self.G.shape[0],):
            raise ValueError("constraint dimensions disagree")


@dataclass
class QpResult:
    z: np.ndarray | None
    multipliers: np.ndarray | None
    status: str
    iterations: int
    active: tuple[int, ...] = ()


class _WorkingSetData:
    """Precomputed operators for one working set of one problem geometry.

    ``step_mat`` maps the gradient to minus the Newton step on the working
    subspace (pseudo-inverse over flat directions), ``mult_mat`` maps the
    gradient to the working-set multipliers, and ``ray_basis`` spans the
    zero-curvature directions, if any.
    """

    __slots__ = ("kind", "step_mat", "mult_mat", "ray_basis")

    def __init__(self, Q: np.ndarray, G: np.ndarray, working: list[int]):
        d = Q.shape[0]
        nw = len(working)
        if nw:
            qf, r = np.linalg.qr(G[working].T, mode="complete")
            z_basis = qf[:, nw:]
            self.mult_mat = np.linalg.solve(r[:nw, :], qf[:, :nw].T)
        else:
            z_basis = np.eye(d)
            self.mult_mat = np.zeros((0, d))
        self.ray_basis = None
        self.step_mat = None
        if z_basis.shape[1] == 0:
            self.kind = "full"
            return
        hred = z_basis.T @ Q @ z_basis
        try:
            np.linalg.cholesky(hred)
            self.kind = "pd"
            self.step_mat = z_basis @ np.linalg.inv(hred) @ z_basis.T
        except np.linalg.LinAlgError:
            w, u = np.linalg.eigh(hred)
            flat = w <= _CURVATURE_TOL * max(1.0, w[-1])
            inv_w = np.where(flat, 0.0, 1.0 / np.where(flat, 1.0, w))
            self.step_mat = z_basis @ ((u * inv_w) @ u.T) @ z_basis.T
            if bool(flat.any()):
                self.kind = "flat"
                self.ray_basis = z_basis @ u[:, flat]
            else:
                self.kind = "pd"


def _phase1(G: np.ndarray, h: np.ndarray) -> np.ndarray | None:
    """Feasible point of G z >= h via an auxiliary LP, or None."""
    from .lp import LpProblem, solve_lp

    k, d = G.shape
    if k == 0:
        return np.zeros(d)
    c = np.concatenate([np.zeros(d), np.ones(k)])
    a_ineq = np.hstack([G, np.eye(k)])
    lower = np.concatenate([np.full(d, -np.inf), np.zeros(k)])
    res = solve_lp(LpProblem(c, A_ineq=a_ineq, b_ineq=h, lower_bounds=lower))
    if res.status != "optimal" or res.value > 1e-9:
        return None
    return res.z[:d]


def _prune_dependent(G: np.ndarray, working: list[int]) -> list[int]:
    """Drop working-set rows that are linear combinations of earlier ones."""
    kept: list[int] = []
    basis: list[np.ndarray] = []
    for j in working:
        row = G[j].astype(float)
        for b in basis:
            row = row - (row @ b) * b
        norm = np.linalg.norm(row)
        if norm > 1e-10 * (1.0 + np.linalg.norm(G[j])):
            kept.append(j)
            basis.append(row / norm)
    return kept


def _blocking_step(G, h, z, direction, working, cap):
    """Largest feasible step along ``direction`` up to ``cap`` and the
    index of the first blocking constraint (or None)."""
    rate = G @ direction
    slack = G @ z - h
    alpha = cap
    blocker = None
    for j in range(G.shape[0]):
        if j in working or rate[j] >= -1e-12:
            continue
        step = max(slack[j], 0.0) / (-rate[j])
        if step < alpha - 1e-15:
            alpha = step
            blocker = j
    return max(alpha, 0.0), blocker


def solve_qp(
    problem: QpProblem,
    x0: np.ndarray | None = None,
    active0=None,
    max_iter: int = 200,
    cache: dict | None = None,
) -> QpResult:
    """Primal active-set solve.

    ``x0`` is an optional feasible starting point and ``active0`` an optional
    warm-start working set (stale entries are filtered); both come from the
    previous solve when the same constraint geometry is hit repeatedly.
    Returns multipliers for every inequality row (zero when inactive) so
    callers can verify the KKT conditions directly.
    """
    Q, c, G, h = problem.Q, problem.c, problem.G, problem.h
    d = c.shape[0]
    k = G.shape[0]

    z = None
    if x0 is not None:
        z = np.asarray(x0, dtype=float).copy()
        if z.shape != (d,):
            raise ValueError("x0 has wrong dimension")
        if k and np.min(G @ z - h) < -_ACTIVE_TOL:
            z = None
    if z is None:
        z = _phase1(G, h)
        if z is None:
            return QpResult(None, None, "infeasible", 0)

    slack = G @ z - h if k else np.zeros(0)
    if active0 is not None:
        working = [j for j in active0 if 0 <= j < k and slack[j] <= _ACTIVE_TOL]
    else:
        working = [j for j in range(k) if slack[j] <= _ACTIVE_TOL]
    if cache is None or tuple(working) not in cache:
        working = _prune_dependent(G, working)

    for it in range(1, max_iter + 1):
        g = Q @ z + c
        key = tuple(working)
        data = cache.get(key) if cache is not None else None
        if data is None:
            data = _WorkingSetData(Q, G, working)
            if cache is not None:
                if len(cache) >= _CACHE_LIMIT:
                    cache.clear()
                cache[key] = data

        if data.kind == "flat":
            proj = data.ray_basis.T @ g
            jbest = int(np.argmax(np.abs(proj)))
            if abs(proj[jbest]) > 1e-10 * (1.0 + float(np.sqrt(g @ g))):
                # zero-curvature descent ray: walk to the first blocker
                ray = -np.sign(proj[jbest]) * data.ray_basis[:, jbest]
                alpha, blocker = _blocking_step(G, h, z, ray, working, np.inf)
                if blocker is None:
                    return QpResult(z, None, "unbounded", it)
                z = z + alpha * ray
                working.append(blocker)
                working.sort()
                continue
        direction = np.zeros(d) if data.kind == "full" else -(data.step_mat @ g)

        if float(direction @ direction) <= _STEP_TOL**2 * (1.0 + float(z @ z)):
            # subspace minimizer: check multipliers of the working set
            if not working:
                return QpResult(z, np.zeros(k), "optimal", it, key)
            mu = data.mult_mat @ g
            worst = int(np.argmin(mu))
            if mu[worst] >= -_MULT_TOL:
                full = np.zeros(k)
                full[working] = np.maximum(mu, 0.0)
                return QpResult(z, full, "optimal", it, key)
            working.pop(worst)
        else:
            alpha, blocker = _blocking_step(G, h, z, direction, working, 1.0)
            z = z + alpha * direction
            if blocker is not None and alpha < 1.0:
                working.append(blocker)
                working.sort()

    return QpResult(z, None, "iteration_limit", max_iter, tuple(working))
