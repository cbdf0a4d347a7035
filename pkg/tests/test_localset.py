"""Local polytope membership, hybrid adversary models, and the trade-off."""

import numpy as np
import pytest
from scipy.optimize import linprog

from conftest import ideal_table, lossy_table
from routedbell.behavior import postprocess_assign
from routedbell.chsh import chsh_value, tradeoff_rhs
from routedbell.localset import (
    HybridLhvModel,
    Scenario,
    ascend_hybrid_model,
    batch_hybrid_chsh_pairs,
    best_far_responses,
    chsh_coefficients,
    chsh_symmetrizations,
    enumerate_vertices,
    hybrid_chsh_pair,
    induced_behavior,
    is_local,
    local_max,
    random_ns_table,
    sample_hybrid_models,
    tilted_coefficients,
    vertex_table,
    _pr_box,
    _vertex_matrix,
)
from routedbell.util import make_rng

SQRT2 = np.sqrt(2.0)
CHSH = Scenario(2, 2, 2, 2)


def test_vertex_counts():
    assert CHSH.n_vertices == 16
    assert len(enumerate_vertices(CHSH)) == 16
    assert Scenario(4, 2, 2, 2).n_vertices == 64
    assert Scenario(1, 1, 1, 1).n_vertices == 1
    with pytest.raises(ValueError):
        Scenario(10, 4, 1, 1)  # 4^10 deterministic points exceeds the guard


def test_local_max_of_chsh_is_two_exactly():
    value, argmax = local_max(chsh_coefficients(), CHSH)
    assert value == 2.0
    assert 0 <= argmax < 16


def test_local_max_of_tilted_functionals_is_two():
    for eta_a0, eta_b in ((1.0, 1.0), (0.8, 0.9), (0.5, 1.0), (0.66, 0.66)):
        coeffs, const = tilted_coefficients(eta_a0, eta_b)
        value, _ = local_max(coeffs, CHSH, const)
        assert abs(value - 2.0) < 1e-12


def test_local_max_of_zero_functional():
    value, _ = local_max(np.zeros(CHSH.table_shape), CHSH)
    assert value == 0.0


def test_werner_half_visibility_is_local():
    branch = lossy_table(nu_a0=0.5).branch(0)[..., :2, :2]
    cert = is_local(branch, CHSH)
    assert cert.is_member
    recon = (_vertex_matrix(CHSH) @ cert.weights).reshape(CHSH.table_shape)
    assert np.max(np.abs(recon - branch)) < 1e-9


def test_ideal_branch_is_nonlocal_with_separating_functional():
    branch = postprocess_assign(ideal_table()).branch(0)
    cert = is_local(branch, CHSH)
    assert not cert.is_member
    assert cert.value > cert.offset + 1e-6
    # canonical witness: CHSH itself reaches 2 sqrt 2 against local bound 2
    assert abs(float(np.sum(chsh_coefficients() * branch)) - 2.0 * SQRT2) < 1e-9


def test_every_vertex_is_local_with_unit_weight():
    for idx in (0, 5, 11, 15):
        table = vertex_table(enumerate_vertices(CHSH)[idx], CHSH)
        cert = is_local(table, CHSH)
        assert cert.is_member
        assert abs(cert.weights[idx] - 1.0) < 1e-9


def test_random_ns_tables_are_valid_behaviors():
    rng = make_rng(31)
    for _ in range(25):
        t = random_ns_table(rng)
        assert np.all(t >= -1e-14)
        assert np.allclose(t.sum(axis=(2, 3)), 1.0, atol=1e-12)
        # no-signaling in both directions
        pa = t.sum(axis=3)
        pb = t.sum(axis=2)
        assert np.max(np.abs(pa[:, 0] - pa[:, 1])) < 1e-12
        assert np.max(np.abs(pb[0] - pb[1])) < 1e-12


def test_fine_equivalence_on_random_tables():
    # LP membership must agree with the symmetrized-CHSH criterion
    rng = make_rng(99)
    disagreements = 0
    nonlocal_seen = 0
    for k in range(100):
        if k % 2 == 0:
            t = random_ns_table(rng)
        else:
            # a single PR box mixed with local noise straddles the boundary
            lam = rng.uniform(0.6, 1.0)
            t = lam * _pr_box(0, 0, 0) + (1.0 - lam) * random_ns_table(rng, 0.0)
        by_lp = is_local(t, CHSH).is_member
        by_fine = bool(np.max(np.abs(chsh_symmetrizations(t))) <= 2.0 + 1e-9)
        disagreements += by_lp != by_fine
        nonlocal_seen += not by_lp
    assert disagreements == 0
    assert nonlocal_seen > 10


def test_membership_matches_scipy_linprog():
    rng = make_rng(7)
    mat = _vertex_matrix(CHSH)
    d, n = mat.shape
    a_eq = np.vstack([mat, np.ones(n)])
    for k in range(30):
        if k % 3:
            lam = rng.uniform(0.4, 1.0)
            t = lam * _pr_box(0, 0, 0) + (1.0 - lam) * random_ns_table(rng, 0.0)
        else:
            t = random_ns_table(rng)
        b_eq = np.concatenate([t.reshape(-1), [1.0]])
        lp = linprog(np.zeros(n), A_eq=a_eq, b_eq=b_eq, bounds=(0, None),
                     method="highs")
        assert is_local(t, CHSH).is_member == lp.success


def test_single_component_ideal_model_has_uncorrelated_far_branch():
    phi = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / SQRT2
    a0 = np.array([[[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]])
    bob = np.array([[[1 / SQRT2, 0.0, 1 / SQRT2], [-1 / SQRT2, 0.0, 1 / SQRT2]]])
    for ra in (-1.0, 1.0):
        for rb in (-1.0, 1.0):
            model = HybridLhvModel(
                weights=np.array([1.0]), psis=phi[None, :],
                vis=np.array([1.0]), a0_blochs=a0, b_blochs=bob,
                a1_resp=np.array([[ra, rb]]))
            c_near, c_far = hybrid_chsh_pair(model)
            assert abs(c_near - 2.0 * SQRT2) < 1e-12
            assert abs(c_far) < 1e-12


def test_product_component_model_stays_local_on_both_branches():
    ket00 = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
    z = [[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]]
    model = HybridLhvModel(
        weights=np.array([1.0]), psis=ket00[None, :], vis=np.array([1.0]),
        a0_blochs=np.array([z]), b_blochs=np.array([z]),
        a1_resp=np.array([[1.0, -1.0]]))
    c_near, c_far = hybrid_chsh_pair(model)
    assert c_near <= 2.0 + 1e-12
    assert c_far <= 2.0 + 1e-12


def test_hybrid_pair_matches_induced_behavior():
    for model, table in sample_hybrid_models(10, seed=404, support=3):
        c_near, c_far = hybrid_chsh_pair(model)
        assert abs(c_near - chsh_value(table, 0)) < 1e-10
        assert abs(c_far - chsh_value(table, 1)) < 1e-10
        assert table.validate().ok


def test_sampled_models_respect_the_tradeoff():
    near, far = batch_hybrid_chsh_pairs(500, seed=11, support=4)
    rhs = np.array([tradeoff_rhs(min(c, 2.0 * SQRT2)) for c in near])
    assert np.max(far - rhs) <= 1e-9


def test_best_far_responses_dominate_random_ones():
    models = sample_hybrid_models(20, seed=5, support=4)
    for model, _ in models:
        _, far_random = hybrid_chsh_pair(model)
        improved = HybridLhvModel(model.weights, model.psis, model.vis,
                                  model.a0_blochs, model.b_blochs,
                                  best_far_responses(model))
        _, far_best = hybrid_chsh_pair(improved)
        assert far_best >= far_random - 1e-12


def test_coordinate_ascent_stays_on_the_safe_side():
    for model, _ in sample_hybrid_models(5, seed=23, support=4):
        pushed = ascend_hybrid_model(model, rounds=2)
        c_near, c_far = hybrid_chsh_pair(pushed)
        c_near = min(c_near, 2.0 * SQRT2)
        assert c_far <= tradeoff_rhs(c_near) + 1e-9
