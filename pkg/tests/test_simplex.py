"""Phase-I simplex membership: feasibility, duals, exact arithmetic."""

from fractions import Fraction

import numpy as np

from routedbell.simplex import convex_membership
from routedbell.util import make_rng


def test_interior_point_of_a_simplex_is_member():
    cols = np.eye(3)
    target = np.array([0.2, 0.3, 0.5])
    res = convex_membership(cols, target)
    assert res.feasible
    assert res.infeasibility <= 1e-12
    assert np.allclose(res.weights, target, atol=1e-12)
    assert abs(res.weights.sum() - 1.0) < 1e-12


def test_random_convex_combinations_are_members():
    rng = make_rng(2024)
    for _ in range(20):
        cols = rng.standard_normal((5, 9))
        w = rng.dirichlet(np.ones(9))
        target = cols @ w
        res = convex_membership(cols, target)
        assert res.feasible
        recon = cols @ res.weights
        assert np.max(np.abs(recon - target)) < 1e-9


def test_outside_point_yields_separating_dual():
    cols = np.eye(2)  # hull = segment between e1 and e2
    target = np.array([1.0, 1.0])  # off the probability simplex
    res = convex_membership(cols, target)
    assert not res.feasible
    assert res.infeasibility > 1e-6
    y = res.dual
    lifted = np.vstack([cols, np.ones(2)])
    assert np.max(y @ lifted) <= 1e-9
    assert y @ np.concatenate([target, [1.0]]) > 1e-9


def test_separation_on_random_instances():
    rng = make_rng(77)
    hits = 0
    for _ in range(30):
        cols = rng.standard_normal((4, 6))
        target = cols @ rng.dirichlet(np.ones(6)) + rng.standard_normal(4) * 0.5
        res = convex_membership(cols, target)
        if res.feasible:
            assert np.max(np.abs(cols @ res.weights - target)) < 1e-9
        else:
            hits += 1
            y = res.dual
            lifted = np.vstack([cols, np.ones(cols.shape[1])])
            assert np.max(y @ lifted) <= 1e-9
            assert y @ np.concatenate([target, [1.0]]) > 0.0
    assert hits > 0  # the perturbation pushes some targets outside


def test_exact_mode_with_fractions():
    cols = np.array([[Fraction(1), Fraction(0)],
                     [Fraction(0), Fraction(1)]], dtype=object)
    target = np.array([Fraction(1, 3), Fraction(2, 3)], dtype=object)
    res = convex_membership(cols, target, exact=True)
    assert res.feasible
    assert res.weights[0] == Fraction(1, 3)
    assert res.weights[1] == Fraction(2, 3)
    off = np.array([Fraction(2, 3), Fraction(2, 3)], dtype=object)
    res = convex_membership(cols, off, exact=True)
    assert not res.feasible


def test_duplicate_columns_are_harmless():
    cols = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    res = convex_membership(cols, np.array([0.5, 0.5]))
    assert res.feasible
    assert abs(res.weights.sum() - 1.0) < 1e-12


def test_negative_coordinates_handled_by_row_flips():
    cols = np.array([[-1.0, 1.0], [-1.0, -1.0]])
    res = convex_membership(cols, np.array([0.0, -1.0]))
    assert res.feasible
    assert np.allclose(res.weights, [0.5, 0.5], atol=1e-12)
