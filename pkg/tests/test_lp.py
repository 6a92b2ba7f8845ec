import numpy as np
import pytest

from factorgame.numerics import LpProblem, solve_lp


def test_single_bound_maximization():
    # maximize z s.t. z <= 3, z >= 0, as minimize -z
    res = solve_lp(LpProblem([-1.0], A_ineq=[[-1.0]], b_ineq=[-3.0], lower_bounds=[0.0]))
    assert res.status == "optimal"
    assert res.z[0] == 3.0
    assert res.value == -3.0


def test_degenerate_optimal_face():
    res = solve_lp(
        LpProblem([-1.0, -1.0], A_ineq=[[-1.0, -1.0]], b_ineq=[-1.0], lower_bounds=[0.0, 0.0])
    )
    assert res.status == "optimal"
    assert res.value == pytest.approx(-1.0, abs=1e-12)
    assert res.z.sum() == pytest.approx(1.0, abs=1e-12)


def test_epigraph_of_negative_edge_game():
    # variables (lam, c): maximize lam s.t. lam <= theta*c for theta in
    # {-1.5, -1, -0.5} and -1 <= c <= 1
    thetas = [-1.5, -1.0, -0.5]
    a_ineq = [[-1.0, t] for t in thetas] + [[0.0, 1.0], [0.0, -1.0]]
    b_ineq = [0.0, 0.0, 0.0, -1.0, -1.0]
    res = solve_lp(LpProblem([-1.0, 0.0], A_ineq=a_ineq, b_ineq=b_ineq))
    assert res.status == "optimal"
    # independent oracle: max over a fine grid of correlations
    grid = np.linspace(-1, 1, 4001)
    oracle = max(min(t * c for t in thetas) for c in grid)
    assert oracle == pytest.approx(0.5, abs=1e-12)
    assert -res.value == pytest.approx(0.5, abs=1e-9)
    assert res.z[1] == pytest.approx(-1.0, abs=1e-9)


def test_status_infeasible():
    res = solve_lp(
        LpProblem([1.0], A_ineq=[[1.0], [-1.0]], b_ineq=[2.0, -1.0], lower_bounds=[0.0])
    )
    assert res.status == "infeasible"


def test_status_unbounded():
    res = solve_lp(LpProblem([-1.0], lower_bounds=[0.0]))
    assert res.status == "unbounded"
    res = solve_lp(LpProblem([-1.0, 0.0], A_ineq=[[0.0, 1.0]], b_ineq=[0.0]))
    assert res.status == "unbounded"


def test_known_vertex_reproduced_exactly():
    # minimize -x - 2y s.t. x + y <= 4, x <= 2, x, y >= 0: vertex (0, 4)
    res = solve_lp(
        LpProblem(
            [-1.0, -2.0],
            A_ineq=[[-1.0, -1.0], [-1.0, 0.0]],
            b_ineq=[-4.0, -2.0],
            lower_bounds=[0.0, 0.0],
        )
    )
    assert res.status == "optimal"
    assert tuple(res.z) == (0.0, 4.0)
    assert res.value == -8.0


def test_equalities_and_free_variables():
    # minimize |shift|: free variable pinned by equality
    res = solve_lp(LpProblem([1.0, 0.0], A_eq=[[1.0, 1.0]], b_eq=[2.0], lower_bounds=[0.0, -np.inf]))
    assert res.status == "optimal"
    assert res.value == pytest.approx(0.0, abs=1e-12)
    assert res.z[1] == pytest.approx(2.0, abs=1e-12)


def test_finite_lower_bounds_are_shifted():
    res = solve_lp(LpProblem([1.0], lower_bounds=[2.0]))
    assert res.status == "optimal"
    assert res.z[0] == 2.0


def test_redundant_rows_are_harmless():
    a_eq = [[1.0, 1.0], [2.0, 2.0], [1.0, 1.0]]
    b_eq = [1.0, 2.0, 1.0]
    res = solve_lp(LpProblem([1.0, 2.0], A_eq=a_eq, b_eq=b_eq, lower_bounds=[0.0, 0.0]))
    assert res.status == "optimal"
    np.testing.assert_allclose(res.z, [1.0, 0.0], atol=1e-12)


def test_duality_gap_on_random_feasible_problems():
    rng = np.random.default_rng(2)
    for _ in range(100):
        m = int(rng.integers(2, 6))
        n = m + int(rng.integers(1, 6))
        a = rng.normal(size=(m, n))
        x0 = rng.uniform(0.1, 2.0, size=n)
        b = a @ x0
        y0 = rng.normal(size=m)
        c = a.T @ y0 + rng.uniform(0.0, 1.5, size=n)  # dual feasible by design
        res = solve_lp(LpProblem(c, A_eq=a, b_eq=b, lower_bounds=np.zeros(n)))
        assert res.status == "optimal"
        gap = abs(res.value - res.dual_eq @ b)
        assert gap <= 1e-8
        # primal feasibility of the reported optimizer
        assert np.abs(a @ res.z - b).max() <= 1e-9 * (1 + np.abs(b).max())
        assert res.z.min() >= -1e-9


def test_inequality_duals_are_nonnegative():
    rng = np.random.default_rng(4)
    for _ in range(50):
        n = int(rng.integers(2, 5))
        k = int(rng.integers(1, 4))
        g = rng.normal(size=(k, n))
        interior = rng.uniform(0.5, 1.5, size=n)
        b = g @ interior - rng.uniform(0.1, 1.0, size=k)
        c = rng.uniform(0.5, 1.5, size=n)
        res = solve_lp(LpProblem(c, A_ineq=g, b_ineq=b, lower_bounds=np.zeros(n)))
        assert res.status == "optimal"
        assert res.dual_ineq.min() >= -1e-9


def test_rejects_bad_blocks():
    with pytest.raises(ValueError):
        LpProblem([1.0], A_eq=[[1.0, 2.0]], b_eq=[1.0])
    with pytest.raises(ValueError):
        LpProblem([np.nan])
    with pytest.raises(ValueError):
        LpProblem([1.0], lower_bounds=[np.inf])
