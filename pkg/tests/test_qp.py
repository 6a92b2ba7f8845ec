import numpy as np
import pytest

from factorgame.numerics import QpProblem, solve_qp
from factorgame.numerics.qp import (
    COMPLEMENTARITY_TOL,
    FEASIBILITY_TOL,
    STATIONARITY_TOL,
)


def _kkt_residuals(prob, res):
    """(stationarity, complementarity, feasibility violation) at the result."""
    g = prob.Q @ res.z + prob.c - prob.G.T @ res.multipliers
    slack = prob.G @ res.z - prob.h
    comp = np.abs(res.multipliers * slack).max(initial=0.0)
    return np.abs(g).max(initial=0.0), comp, -min(slack.min(initial=0.0), 0.0)


def test_unconstrained_minimum_feasible():
    res = solve_qp(QpProblem(np.eye(2), np.zeros(2), np.eye(2), np.zeros(2)))
    assert res.status == "optimal"
    np.testing.assert_allclose(res.z, [0.0, 0.0], atol=1e-12)


def test_interior_optimum():
    b = np.array([0.5, 0.5])
    res = solve_qp(QpProblem(np.eye(2), -b, np.eye(2), np.zeros(2)))
    assert res.status == "optimal"
    np.testing.assert_allclose(res.z, b, atol=1e-12)


def _grid_min(prob, lo, hi, step):
    ticks = np.arange(lo, hi + step / 2, step)
    xx, yy = np.meshgrid(ticks, ticks, indexing="ij")
    pts = np.stack([xx.ravel(), yy.ravel()], axis=1)
    feas = np.all(pts @ prob.G.T >= prob.h - 1e-12, axis=1)
    pts = pts[feas]
    vals = 0.5 * np.einsum("ni,ij,nj->n", pts, prob.Q, pts) + pts @ prob.c
    return float(vals.min())


def test_linear_plus_quadratic_example():
    # minimize p1 - p2 + ((p1-0.5)^2 + (p2-0.5)^2)/2  s.t. p >= 0
    prob = QpProblem(np.eye(2), np.array([0.5, -1.5]), np.eye(2), np.zeros(2))
    res = solve_qp(prob)
    assert res.status == "optimal"
    np.testing.assert_allclose(res.z, [0.0, 1.5], atol=1e-10)
    stat, comp, infeas = _kkt_residuals(prob, res)
    assert stat <= STATIONARITY_TOL and comp <= COMPLEMENTARITY_TOL
    assert infeas <= FEASIBILITY_TOL
    # independent check: best grid point cannot beat the solver
    obj = 0.5 * res.z @ prob.Q @ res.z + prob.c @ res.z
    assert obj <= _grid_min(prob, 0.0, 3.0, 1.0 / 64) + 1e-9


def test_detects_infeasible():
    prob = QpProblem(np.eye(1), np.zeros(1), np.array([[1.0], [-1.0]]), np.array([1.0, 0.0]))
    assert solve_qp(prob).status == "infeasible"


def test_detects_unbounded_linear_direction():
    prob = QpProblem(np.zeros((1, 1)), np.array([-1.0]), np.zeros((0, 1)), np.zeros(0))
    assert solve_qp(prob).status == "unbounded"


def test_semidefinite_ray_is_blocked_then_solved():
    # minimize z0^2/2 + z1  s.t.  z0 + z1 >= 0, z0 >= 0; optimum at (1, -1)
    prob = QpProblem(
        np.diag([1.0, 0.0]),
        np.array([0.0, 1.0]),
        np.array([[1.0, 1.0], [1.0, 0.0]]),
        np.zeros(2),
    )
    res = solve_qp(prob, x0=np.array([0.0, 0.0]))
    assert res.status == "optimal"
    np.testing.assert_allclose(res.z, [1.0, -1.0], atol=1e-10)


def _random_problem(rng):
    b = rng.normal(size=(2, 2))
    quad = b.T @ b + 0.1 * np.eye(2)
    c = rng.normal(size=2)
    rows = [rng.normal(size=2) for _ in range(2)]
    G = np.vstack(rows + [np.eye(2), -np.eye(2)])
    interior = rng.uniform(-1, 1, size=2)
    h = G @ interior - rng.uniform(0.1, 1.0, size=G.shape[0])
    h[-4:] = np.maximum(h[-4:], -3.0)  # keep the box bounded by [-3, 3]
    return QpProblem(quad, c, G, h)


def test_random_problems_satisfy_kkt_and_beat_grid():
    rng = np.random.default_rng(7)
    for _ in range(150):
        prob = _random_problem(rng)
        res = solve_qp(prob)
        assert res.status == "optimal"
        stat, comp, infeas = _kkt_residuals(prob, res)
        assert stat <= STATIONARITY_TOL
        assert comp <= COMPLEMENTARITY_TOL
        assert infeas <= FEASIBILITY_TOL
        obj = 0.5 * res.z @ prob.Q @ res.z + prob.c @ res.z
        assert obj <= _grid_min(prob, -3.0, 3.0, 1.0 / 16) + 1e-9


def test_warm_start_with_cache_matches_cold_solve():
    rng = np.random.default_rng(3)
    prob = _random_problem(rng)
    cache: dict = {}
    cold = solve_qp(prob)
    warm = solve_qp(prob, x0=cold.z, active0=cold.active, cache=cache)
    np.testing.assert_allclose(warm.z, cold.z, atol=1e-10)
    # perturb the linear term and re-solve through the same cache
    for _ in range(10):
        prob.c[:] = rng.normal(size=2)
        a = solve_qp(prob, x0=warm.z, active0=warm.active, cache=cache)
        b = solve_qp(QpProblem(prob.Q, prob.c.copy(), prob.G, prob.h))
        assert a.status == b.status == "optimal"
        np.testing.assert_allclose(a.z, b.z, atol=1e-9)
        warm = a


def test_rejects_asymmetric_q():
    with pytest.raises(ValueError):
        QpProblem(np.array([[1.0, 0.5], [0.0, 1.0]]), np.zeros(2), np.eye(2), np.zeros(2))
