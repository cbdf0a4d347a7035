"""States, observables, visibility channel, and Bell operators."""

import numpy as np
import pytest

from routedbell.quantum import (
    OBS_X,
    OBS_Z,
    OBS_ZX_MINUS,
    OBS_ZX_PLUS,
    DichotomicObservable,
    TwoQubitState,
    apply_visibility,
    bell_operator,
    chsh_functional,
    correlator,
    functional_value,
    isotropic_strategy,
    phi_plus,
    tilted_chsh_functional,
)
from routedbell.linalg import hermitian_eig
from routedbell.util import make_rng

SQRT2 = np.sqrt(2.0)


def test_phi_plus_is_the_maximally_entangled_state():
    rho = phi_plus().rho
    vec = np.array([1.0, 0.0, 0.0, 1.0]) / SQRT2
    fidelity = float(np.real(vec @ rho @ vec))
    assert abs(fidelity - 1.0) < 1e-14


def test_ideal_correlator_is_inverse_sqrt2():
    # independent 4x4 trace: <sigma_z (x) (sigma_z+sigma_x)/sqrt(2)> on phi+
    z = np.diag([1.0, -1.0])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    vec = np.array([1.0, 0.0, 0.0, 1.0]) / SQRT2
    op = np.kron(z, (z + x) / SQRT2)
    expected = float(vec @ op @ vec)
    assert abs(expected - 1.0 / SQRT2) < 1e-15
    got = correlator(phi_plus(), OBS_Z, OBS_ZX_PLUS)
    assert abs(got - expected) < 1e-14


def test_single_party_marginals_vanish():
    state = phi_plus()
    for obs in (OBS_Z, OBS_X, OBS_ZX_PLUS, OBS_ZX_MINUS):
        a_marg = state.expect(np.kron(obs.matrix, np.eye(2)))
        b_marg = state.expect(np.kron(np.eye(2), obs.matrix))
        assert abs(a_marg) < 1e-14
        assert abs(b_marg) < 1e-14


def test_observable_projectors():
    rng = make_rng(3)
    for _ in range(5):
        n = rng.standard_normal(3)
        obs = DichotomicObservable(tuple(n / np.linalg.norm(n)))
        plus, minus = obs.projector(+1), obs.projector(-1)
        assert np.allclose(plus + minus, np.eye(2), atol=1e-14)
        assert np.allclose(plus @ plus, plus, atol=1e-14)
        assert np.allclose(minus @ minus, minus, atol=1e-14)
        assert np.allclose(plus - minus, obs.matrix, atol=1e-14)
    with pytest.raises(ValueError):
        DichotomicObservable((1.0, 1.0, 0.0))


def test_state_validation():
    with pytest.raises(ValueError):
        TwoQubitState(np.eye(4))  # trace 4
    bad = np.diag([1.5, -0.5, 0.0, 0.0])
    with pytest.raises(ValueError):
        TwoQubitState(bad)
    state = TwoQubitState.from_vector([2.0, 0.0, 0.0, 2.0])
    assert abs(np.trace(state.rho) - 1.0) < 1e-14


def test_visibility_endpoints():
    state = phi_plus()
    same = apply_visibility(state, 1.0, 1.0)
    assert np.allclose(same.rho, state.rho, atol=1e-14)
    depol = apply_visibility(state, 0.0, 0.0)
    assert np.allclose(depol.rho, np.eye(4) / 4.0, atol=1e-14)


def test_visibility_scales_the_zz_correlator():
    z = np.diag([1.0, -1.0])
    zz = np.kron(z, z)
    for nu in (0.0, 0.3, 0.7, 1.0):
        mixed = apply_visibility(phi_plus(), nu, 1.0)
        assert abs(mixed.expect(zz) - nu) < 1e-12
        mixed_b = apply_visibility(phi_plus(), 1.0, nu)
        assert abs(mixed_b.expect(zz) - nu) < 1e-12


def test_visibility_is_affine_in_each_argument():
    rng = make_rng(9)
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    state = TwoQubitState.from_vector(psi)
    for side in ("a", "b"):
        nus = (0.2, 0.5, 0.8)  # collinear: middle is the average
        rhos = []
        for nu in nus:
            args = (nu, 0.6) if side == "a" else (0.6, nu)
            rhos.append(apply_visibility(state, *args).rho)
        residual = np.max(np.abs(rhos[1] - 0.5 * (rhos[0] + rhos[2])))
        assert residual <= 1e-12


def test_visibility_preserves_the_other_sides_reduced_state():
    rng = make_rng(10)
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    state = TwoQubitState.from_vector(psi)
    mixed = apply_visibility(state, 0.4, 1.0)
    assert np.allclose(mixed.reduced_bob(), state.reduced_bob(), atol=1e-12)
    mixed = apply_visibility(state, 1.0, 0.4)
    assert np.allclose(mixed.reduced_alice(), state.reduced_alice(), atol=1e-12)


def test_bell_operator_spectrum_at_the_optimal_observables():
    strat = isotropic_strategy()
    op = bell_operator(chsh_functional(), strat.alice[0], strat.bob)
    # brute-force characteristic polynomial on a 4x4 grid of candidates
    w, _ = hermitian_eig(op)
    assert abs(w[0] - 2.0 * SQRT2) < 1e-12
    assert abs(w[-1] + 2.0 * SQRT2) < 1e-12
    value = functional_value(chsh_functional(), strat.state, strat.alice[0], strat.bob)
    assert abs(value - 2.0 * SQRT2) < 1e-12


def test_single_term_operator_has_unit_spectrum():
    f = chsh_functional()
    single = type(f)(joint=((1.0, 0.0), (0.0, 0.0)))
    op = bell_operator(single, (OBS_Z, OBS_X), (OBS_Z, OBS_X))
    w, _ = hermitian_eig(op)
    assert np.allclose(np.abs(w), 1.0, atol=1e-13)


def test_tilted_functional_reduces_to_chsh_at_unit_efficiency():
    tilted = tilted_chsh_functional(1.0, 1.0)
    assert tilted.joint == chsh_functional().joint
    assert tilted.alice_marg == (0.0, 0.0)
    assert tilted.bob_marg == (0.0, 0.0)
    assert tilted.const == 0.0
    strat = isotropic_strategy()
    v = functional_value(tilted, strat.state, strat.alice[0], strat.bob)
    assert abs(v - 2.0 * SQRT2) < 1e-12


def test_tilted_functional_constant_at_zero_efficiency():
    tilted = tilted_chsh_functional(0.0, 0.0)
    strat = isotropic_strategy()
    v = functional_value(tilted, strat.state, strat.alice[0], strat.bob)
    assert abs(v - 2.0) < 1e-14
    with pytest.raises(ValueError):
        tilted_chsh_functional(1.2, 0.5)
