"""Dense linear programming by two-phase revised simplex.

Minimizes c'z subject to equality rows, inequality rows (A z >= b) and
optional per-variable lower bounds (absent bounds mean free variables).
Pricing is most-negative-reduced-cost; Bland's smallest-index rule engages
automatically after a run of degenerate pivots, which guarantees
termination without paying Bland's slow pivoting on every step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LpProblem", "LpResult", "solve_lp", "FEASIBILITY_TOL", "OPTIMALITY_TOL"]

FEASIBILITY_TOL = 1e-9
OPTIMALITY_TOL = 1e-9

_PIVOT_TOL = 1e-10
_DEGENERATE_STALL = 25   # degenerate pivots in a row before Bland's rule
_REFACTOR_EVERY = 150    # rebuild the basis inverse this often


@dataclass
class LpProblem:
    """minimize c'z  s.t.  A_eq z = b_eq,  A_ineq z >= b_ineq,  z >= lower_bounds."""

    c: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    A_ineq: np.ndarray | None = None
    b_ineq: np.ndarray | None = None
    lower_bounds: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        if not np.all(np.isfinite(self.c)):
            raise ValueError("objective entries must be finite")
        n = self.c.shape[0]
        self.A_eq, self.b_eq = _check_block(self.A_eq, self.b_eq, n, "equality")
        self.A_ineq, self.b_ineq = _check_block(self.A_ineq, self.b_ineq, n, "inequality")
        if self.lower_bounds is not None:
            lb = np.asarray(self.lower_bounds, dtype=float)
            if lb.shape != (n,):
                raise ValueError("lower_bounds has wrong length")
            if np.any(np.isnan(lb)) or np.any(np.isposinf(lb)):
                raise ValueError("lower_bounds must be finite or -inf")
            self.lower_bounds = lb

    @property
    def n(self) -> int:
        return self.c.shape[0]


def _check_block(A, b, n, name):
    if A is None and b is None:
        return None, None
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[1] != n or b.shape != (A.shape[0],):
        raise ValueError(f"{name} block dimensions disagree")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError(f"{name} block entries must be finite")
    return A, b


@dataclass
class LpResult:
    z: np.ndarray | None
    value: float
    status: str
    dual_eq: np.ndarray | None = None
    dual_ineq: np.ndarray | None = None
    iterations: int = 0


def _pivot_loop(A, b, c, basis, binv, cap, n_real=None):
    """Revised simplex iterations from a feasible basis; returns
    (status, basis, binv, xb, iterations).

    When ``n_real`` is given, columns at or beyond it are phase-1 artificials:
    they are barred from entering, and a basic artificial stuck at zero is
    expelled by a degenerate pivot as soon as the entering column crosses its
    row, so it can never turn positive again.
    """
    xb = np.maximum(binv @ b, 0.0)
    bland = False
    stall = 0
    it = 0
    since_refactor = 0
    while it < cap:
        it += 1
        y = c[basis] @ binv
        reduced = c - y @ A
        reduced[basis] = 0.0
        if n_real is not None:
            reduced[n_real:] = 0.0
        if bland:
            eligible = np.nonzero(reduced < -OPTIMALITY_TOL)[0]
            if eligible.size == 0:
                return "optimal", basis, binv, xb, it
            enter = int(eligible[0])
        else:
            enter = int(np.argmin(reduced))
            if reduced[enter] >= -OPTIMALITY_TOL:
                return "optimal", basis, binv, xb, it
        dcol = binv @ A[:, enter]
        row = None
        if n_real is not None:
            stuck = np.nonzero(
                (basis >= n_real) & (xb <= 1e-11) & (np.abs(dcol) > _PIVOT_TOL)
            )[0]
            if stuck.size:
                row = int(stuck[0])
                alpha = 0.0
        if row is None:
            rows = np.nonzero(dcol > _PIVOT_TOL)[0]
            if rows.size == 0:
                return "unbounded", basis, binv, xb, it
            ratios = xb[rows] / dcol[rows]
            best = float(np.min(ratios))
            ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
            if bland:
                row = int(ties[np.argmin(basis[ties])])
            else:
                row = int(ties[0])
            alpha = xb[row] / dcol[row]
        if alpha <= 1e-12:
            stall += 1
            if stall >= _DEGENERATE_STALL:
                bland = True
        else:
            stall = 0
        basis[row] = enter
        pivot_row = binv[row] / dcol[row]
        binv = binv - np.outer(dcol, pivot_row)
        binv[row] = pivot_row
        xb = xb - alpha * dcol
        xb[row] = alpha
        np.maximum(xb, 0.0, out=xb)
        since_refactor += 1
        if since_refactor >= _REFACTOR_EVERY:
            binv = np.linalg.inv(A[:, basis])
            xb = np.maximum(binv @ b, 0.0)
            since_refactor = 0
    return "iteration_limit", basis, binv, xb, it


def solve_lp(problem: LpProblem, max_iter: int | None = None) -> LpResult:
    """Two-phase revised simplex solve; status is one of ``optimal``,
    ``infeasible``, ``unbounded`` or ``iteration_limit``."""
    n = problem.n
    me = 0 if problem.A_eq is None else problem.A_eq.shape[0]
    mi = 0 if problem.A_ineq is None else problem.A_ineq.shape[0]
    m = me + mi

    if problem.lower_bounds is None:
        lower = np.full(n, -np.inf)
    else:
        lower = problem.lower_bounds
    bounded = np.isfinite(lower)
    shift = np.where(bounded, lower, 0.0)
    free_idx = np.nonzero(~bounded)[0]

    blocks = []
    rhs = []
    if me:
        blocks.append(problem.A_eq)
        rhs.append(problem.b_eq)
    if mi:
        blocks.append(problem.A_ineq)
        rhs.append(problem.b_ineq)

    if m == 0:
        # only bound constraints remain after shifting
        c_eff = problem.c.copy()
        if np.any(np.abs(c_eff[free_idx]) > OPTIMALITY_TOL) or np.any(
            c_eff[bounded] < -OPTIMALITY_TOL
        ):
            return LpResult(None, -np.inf, "unbounded")
        z = shift.copy()
        return LpResult(z, float(problem.c @ z), "optimal", np.zeros(0), np.zeros(0), 0)

    a_all = np.vstack(blocks)
    b_all = np.concatenate(rhs) - a_all @ shift

    surplus = np.zeros((m, mi))
    if mi:
        surplus[me:, :] = -np.eye(mi)
    a_std = np.hstack([a_all, -a_all[:, free_idx], surplus])
    c_std = np.concatenate([problem.c, -problem.c[free_idx], np.zeros(mi)])
    sigma = np.where(b_all < 0, -1.0, 1.0)
    a_std = a_std * sigma[:, None]
    b_std = b_all * sigma

    n_std = a_std.shape[1]
    cap = max_iter if max_iter is not None else max(2000, 50 * (m + n_std))

    # phase 1: artificial identity basis
    a_aux = np.hstack([a_std, np.eye(m)])
    c_aux = np.concatenate([np.zeros(n_std), np.ones(m)])
    basis = np.arange(n_std, n_std + m)
    binv = np.eye(m)
    status, basis, binv, xb, it1 = _pivot_loop(a_aux, b_std, c_aux, basis, binv, cap)
    if status != "optimal":
        return LpResult(None, np.nan, "iteration_limit", iterations=it1)
    if float(c_aux[basis] @ xb) > FEASIBILITY_TOL:
        return LpResult(None, np.nan, "infeasible", iterations=it1)

    # phase 2 on the extended matrix: artificial columns stay (some may sit
    # in the basis at zero for redundant rows) but can never enter again
    c_full = np.concatenate([c_std, np.zeros(m)])
    status, basis, binv, xb, it2 = _pivot_loop(
        a_aux, b_std, c_full, basis, binv, cap, n_real=n_std
    )
    if status == "unbounded":
        return LpResult(None, -np.inf, "unbounded", iterations=it1 + it2)
    if status != "optimal":
        return LpResult(None, np.nan, "iteration_limit", iterations=it1 + it2)

    x_std = np.zeros(n_std + m)
    x_std[basis] = xb
    z = x_std[:n].copy()
    if free_idx.size:
        z[free_idx] -= x_std[n : n + free_idx.size]
    z += shift

    y = c_full[basis] @ binv
    return LpResult(
        z,
        float(problem.c @ z),
        "optimal",
        (y * sigma)[:me],
        (y * sigma)[me:],
        it1 + it2,
    )
