import numpy as np
import pytest

from conftest import SPINS, chain_instance, edge_factor, field_factor, single_edge_instance
from factorgame.graph import (
    Alphabet,
    Factor,
    FactorGraphInstance,
    PureStrategyPair,
    is_tree,
    objective_eval,
    validate,
)
from factorgame.ising import IsingSpec, build_ising


def test_alphabet_rejects_duplicates_and_singletons():
    with pytest.raises(ValueError):
        Alphabet((1, 1))
    with pytest.raises(ValueError):
        Alphabet((1,))
    assert Alphabet((-1, 1)).index(1) == 1


def test_validate_wellformed_instance():
    assert validate(single_edge_instance([1.0])) == []


def test_validate_reports_table_shape():
    bad = Factor((0, 1), (1.0,), np.zeros((3, 1)))
    inst = FactorGraphInstance(SPINS, 2, (bad,))
    errors = validate(inst)
    assert any("table shape" in e for e in errors)


def test_validate_reports_nonfinite_potential():
    table = np.array([[1.0], [np.nan], [0.0], [1.0]])
    inst = FactorGraphInstance(SPINS, 2, (Factor((0, 1), (1.0,), table),))
    errors = validate(inst)
    assert any("non-finite potential" in e for e in errors)


def test_validate_reports_structural_problems():
    dup = Factor((0, 0), (1.0,), np.zeros((4, 1)))
    inst = FactorGraphInstance(SPINS, 3, (dup,))
    errors = validate(inst)
    assert any("duplicate edge" in e for e in errors)
    assert any("variable 1 has degree 0" in e for e in errors)
    assert any("variable 2 has degree 0" in e for e in errors)


def test_validate_requires_ascending_neighbors():
    factor = Factor((1, 0), (1.0,), np.zeros((4, 1)))
    inst = FactorGraphInstance(SPINS, 2, (factor,))
    assert any("ascending" in e for e in validate(inst))


def test_objective_single_edge_signs():
    inst = single_edge_instance([1.0])
    pp = PureStrategyPair.from_labels(inst, [1, 1], [1.0, 0.0, 0.0])
    assert objective_eval(inst, pp) == pytest.approx(1.0)
    pp = PureStrategyPair.from_labels(inst, [1, -1], [1.0, 0.0, 0.0])
    assert objective_eval(inst, pp) == pytest.approx(-1.0)


def test_objective_chain_matches_direct_sum():
    # independent oracle: loop over edge and field terms directly
    inst = chain_instance(3, edge_theta=1.0, field_thetas=[0.5, 0.5, 0.5])
    x = [1, 1, 1]
    direct = sum(1.0 * x[i] * x[i + 1] for i in range(2)) + sum(0.5 * xi for xi in x)
    assert direct == pytest.approx(3.5)
    pair = PureStrategyPair.from_labels(inst, x, [1.0, 1.0, 0.5, 0.5, 0.5])
    assert objective_eval(inst, pair) == pytest.approx(direct)


def test_objective_rejects_malformed_assignments():
    inst = single_edge_instance([1.0])
    with pytest.raises(ValueError):
        objective_eval(inst, PureStrategyPair(np.array([0]), np.zeros(3, dtype=int)))
    with pytest.raises(ValueError):
        objective_eval(inst, PureStrategyPair(np.array([0, 5]), np.zeros(3, dtype=int)))
    with pytest.raises(ValueError):
        objective_eval(inst, PureStrategyPair(np.array([0, 1]), np.array([0, 0, 9])))


def test_is_tree_on_chain_triangle_and_forest():
    assert is_tree(chain_instance(3))
    triangle = FactorGraphInstance(
        SPINS, 3, (edge_factor(0, 1, [1.0]), edge_factor(1, 2, [1.0]), edge_factor(0, 2, [1.0]))
    )
    assert not is_tree(triangle)
    forest = FactorGraphInstance(
        SPINS, 4, (edge_factor(0, 1, [1.0]), edge_factor(2, 3, [1.0]))
    )
    assert not is_tree(forest)


def test_objective_additive_over_disjoint_union():
    rng = np.random.default_rng(11)
    a = build_ising(IsingSpec(n=4, delta=0.5, h=1.0, seed=1))
    b = build_ising(IsingSpec(n=3, delta=1.0, h=0.5, seed=2))
    shifted = [
        Factor(tuple(i + a.n_variables for i in f.neighbors), f.thetas, f.table)
        for f in b.factors
    ]
    union = FactorGraphInstance(SPINS, 7, a.factors + tuple(shifted))
    xa = rng.integers(0, 2, 4)
    xb = rng.integers(0, 2, 3)
    ta = np.array([rng.integers(0, len(f.thetas)) for f in a.factors])
    tb = np.array([rng.integers(0, len(f.thetas)) for f in b.factors])
    v_union = objective_eval(
        union, PureStrategyPair(np.concatenate([xa, xb]), np.concatenate([ta, tb]))
    )
    v_parts = objective_eval(a, PureStrategyPair(xa, ta)) + objective_eval(
        b, PureStrategyPair(xb, tb)
    )
    assert v_union == pytest.approx(v_parts, abs=1e-12)


def _permute_instance(inst, perm):
    """Relabel variables by perm, keeping tables aligned with sorted neighbors."""
    q = inst.alphabet.size
    factors = []
    for f in inst.factors:
        new_neighbors = [perm[i] for i in f.neighbors]
        order = np.argsort(new_neighbors)
        cube = f.table.reshape((q,) * f.degree + (len(f.thetas),))
        cube = np.transpose(cube, tuple(order) + (f.degree,))
        factors.append(
            Factor(
                tuple(sorted(new_neighbors)),
                f.thetas,
                cube.reshape(q**f.degree, len(f.thetas)),
            )
        )
    return FactorGraphInstance(inst.alphabet, inst.n_variables, tuple(factors))


def test_objective_invariant_under_relabeling():
    rng = np.random.default_rng(5)
    inst = build_ising(IsingSpec(n=6, delta=1.0, h=1.0, seed=9))
    perm = rng.permutation(6)
    relabeled = _permute_instance(inst, perm)
    assert validate(relabeled) == []
    for _ in range(20):
        x = rng.integers(0, 2, 6)
        theta = np.array([rng.integers(0, len(f.thetas)) for f in inst.factors])
        x_new = np.empty(6, dtype=int)
        x_new[perm] = x
        assert objective_eval(inst, PureStrategyPair(x, theta)) == pytest.approx(
            objective_eval(relabeled, PureStrategyPair(x_new, theta)), abs=1e-12
        )
