"""Moment-matrix relaxations: word algebra, layouts, bounds, and guessing."""

import numpy as np
import pytest

from conftest import deterministic_table, ideal_table
from routedbell.behavior import (
    DeviceParams,
    RoutedDeviceSet,
    postprocess_assign,
    simulate_behavior,
)
from routedbell.conic import replay_residuals
from routedbell.localset import Scenario
from routedbell.npa import (
    CHSH_SCENARIO,
    IDENTITY,
    ROUTED_SCENARIO,
    OutsideRelaxationError,
    build_layout,
    build_membership_relaxation,
    behavior_rows,
    default_level,
    flatten_routed,
    guessing_probability,
    max_functional_upper_bound,
    membership_residual,
    parse_level,
    presolve_rows,
    word_adjoint,
    word_class,
    word_mul,
    words_for_level,
)
from routedbell.quantum import chsh_functional, isotropic_strategy, tilted_chsh_functional
from routedbell.seesaw import SeesawConfig, seesaw_tilted
from routedbell.util import make_rng

SQRT2 = np.sqrt(2.0)


# -- projector word algebra ---------------------------------------------------

def _aw(*syms):
    return (tuple(syms), ())


def _bw(*syms):
    return ((), tuple(syms))


def test_word_reduction_rules():
    a00 = _aw((0, 0))
    assert word_mul(a00, a00) == a00                     # idempotent
    assert word_mul(a00, _aw((0, 1))) is None            # orthogonal outcomes
    assert word_mul(a00, _aw((1, 0))) == _aw((0, 0), (1, 0))
    assert word_mul(a00, _bw((1, 0))) == (((0, 0),), ((1, 0),))
    assert word_mul(IDENTITY, a00) == a00
    assert word_mul(a00, IDENTITY) == a00


def test_word_adjoint_and_class():
    w = (((0, 0), (1, 0)), ((0, 0),))
    assert word_adjoint(w) == (((1, 0), (0, 0)), ((0, 0),))
    assert word_adjoint(word_adjoint(w)) == w
    assert word_class(w) == word_class(word_adjoint(w))


def test_word_multiplication_is_associative():
    rng = make_rng(17)
    symbols = [(i, o) for i in range(3) for o in range(2)]

    def draw():
        na, nb = rng.integers(0, 3, size=2)
        return (tuple(symbols[k] for k in rng.integers(0, len(symbols), size=na)),
                tuple(symbols[k] for k in rng.integers(0, len(symbols), size=nb)))

    checked = 0
    for _ in range(400):
        u, v, w = draw(), draw(), draw()
        uv = word_mul(u, v)
        vw = word_mul(v, w)
        left = None if uv is None else word_mul(uv, w)
        right = None if vw is None else word_mul(u, vw)
        assert left == right
        checked += left is not None
    assert checked > 100


def test_parse_level_aliases():
    assert parse_level("1") == "1"
    assert parse_level(2) == "2"
    assert parse_level(" 1AB ") == "1ab"
    assert parse_level("1+AB") == "1ab"
    with pytest.raises(ValueError):
        parse_level("3")


def test_word_and_moment_counts():
    expected = {
        (CHSH_SCENARIO, "1"): (5, 11),
        (CHSH_SCENARIO, "1ab"): (9, 17),
        (CHSH_SCENARIO, "2"): (13, 31),
        (ROUTED_SCENARIO, "1"): (13, 73),
        (ROUTED_SCENARIO, "1ab"): (45, 393),
        (ROUTED_SCENARIO, "2"): (101, 2221),
    }
    for (s, lv), (side, n_moments) in expected.items():
        words = words_for_level(s, lv)
        assert len(words) == side
        assert len(set(words)) == side
        assert build_layout(words).n_vars == n_moments


def test_default_level_prefers_the_deepest_affordable():
    assert default_level(CHSH_SCENARIO) == "2"
    assert default_level(ROUTED_SCENARIO) == "2"
    assert default_level(ROUTED_SCENARIO, cap=50) == "1ab"
    assert default_level(Scenario(4, 3, 4, 3), cap=50) == "1ab"


# -- layout against actual quantum moments ------------------------------------

def _word_operators(word, alice_obs, bob_obs):
    opa = np.eye(2, dtype=complex)
    for inp, out in word[0]:
        assert out == 0
        opa = opa @ alice_obs[inp].projector(+1)
    opb = np.eye(2, dtype=complex)
    for inp, out in word[1]:
        assert out == 0
        opb = opb @ bob_obs[inp].projector(+1)
    return opa, opb


def test_moment_layout_matches_quantum_mechanics():
    strategy = isotropic_strategy()
    alice, bob = strategy.alice[0], strategy.bob
    words = words_for_level(CHSH_SCENARIO, "2")
    lay = build_layout(words)
    ops = [_word_operators(w, alice, bob) for w in words]

    y = np.full(lay.n_vars, np.nan)
    for rep, vid in lay.var_of.items():
        opa, opb = _word_operators(rep, alice, bob)
        y[vid] = strategy.state.expect(np.kron(opa, opb))
    assert not np.any(np.isnan(y))
    assert abs(y[0] - 1.0) < 1e-12

    side = lay.side
    m = np.zeros((side, side))
    for i, j, vid in zip(lay.slot_rows, lay.slot_cols, lay.slot_vars):
        ai, bi = ops[i]
        aj, bj = ops[j]
        direct = strategy.state.expect(np.kron(ai.conj().T @ aj, bi.conj().T @ bj))
        assert abs(direct - y[vid]) < 1e-9
        m[i, j] = m[j, i] = y[vid]
    assert float(np.linalg.eigvalsh(m)[0]) > -1e-9

    table = postprocess_assign(ideal_table()).branch(0)
    for (x, yy, a, b), cols in behavior_rows(CHSH_SCENARIO, lay):
        recon = sum(v * y[c] for c, v in cols)
        assert abs(recon - table[x, yy, a, b]) < 1e-9


# -- equality presolve --------------------------------------------------------

def test_presolve_drops_dependent_integral_rows():
    rows = [([(0, 1.0), (1, 1.0)], 1.0),
            ([(0, 2.0), (1, 2.0)], 2.0),
            ([(0, 1.0)], 0.25)]
    pre = presolve_rows(rows, 2)
    assert pre.kept == [0, 2]
    assert pre.dropped == [(1, 0.0)]
    assert pre.max_inconsistency == 0.0


def test_presolve_measures_inconsistency():
    rows = [([(0, 1.0)], 1.0), ([(0, 1.0)], 1.5)]
    pre = presolve_rows(rows, 1)
    assert pre.kept == [0]
    assert abs(pre.max_inconsistency - 0.5) < 1e-12


def test_presolve_float_rows_use_orthogonalization():
    rows = [([(0, 0.5), (1, 0.5)], 0.5),
            ([(0, 0.25), (1, 0.25)], 0.25),
            ([(1, 0.5)], 0.125)]
    pre = presolve_rows(rows, 2)
    assert pre.kept == [0, 2]
    assert pre.max_inconsistency < 1e-12


def test_signaling_table_is_rejected_by_the_row_system():
    relax = build_membership_relaxation(CHSH_SCENARIO, "1")
    t = np.zeros((2, 2, 2, 2))
    t[0, 0, 0, 0] = 1.0          # Alice marginal depends on Bob's input
    t[0, 1, 1, 1] = 1.0
    t[1] = 0.25
    with pytest.raises(OutsideRelaxationError):
        membership_residual(t, relax)


# -- membership ---------------------------------------------------------------

def test_quantum_branch_is_inside_every_level():
    branch = postprocess_assign(ideal_table()).branch(0)
    for lv in ("1", "1ab", "2"):
        relax = build_membership_relaxation(CHSH_SCENARIO, lv)
        rep = membership_residual(branch, relax)
        assert rep.feasible
        assert rep.t_value > -1e-7


def test_pr_box_is_outside_level_1():
    pr = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for yy in range(2):
            for a in range(2):
                for b in range(2):
                    if (a ^ b) == (x & yy):
                        pr[x, yy, a, b] = 0.5
    relax = build_membership_relaxation(CHSH_SCENARIO, "1")
    rep = membership_residual(pr, relax)
    assert not rep.feasible
    assert rep.residual > 0.05


def test_simulated_routed_tables_are_inside_the_relaxation():
    devices = RoutedDeviceSet(DeviceParams(0.8, 0.9), DeviceParams(0.7, 0.95),
                              DeviceParams(0.85, 0.9))
    flat = flatten_routed(simulate_behavior(isotropic_strategy(), devices))
    for lv in ("1", "1ab"):
        relax = build_membership_relaxation(ROUTED_SCENARIO, lv)
        rep = membership_residual(flat, relax)
        assert rep.feasible
        assert rep.t_value > -1e-7


def test_membership_shape_mismatch():
    relax = build_membership_relaxation(CHSH_SCENARIO, "1")
    with pytest.raises(ValueError):
        membership_residual(np.zeros((2, 2, 3, 3)), relax)


def test_flatten_routed_ordering():
    table = ideal_table()
    flat = flatten_routed(table)
    assert flat.shape == (4, 2, 3, 3)
    for i in range(2):
        for x in range(2):
            assert np.array_equal(flat[2 * i + x], table.entries[i, x])


# -- certified functional bounds ----------------------------------------------

def test_chsh_level_1_bound_is_certified():
    nb = max_functional_upper_bound(chsh_functional(), level="1")
    assert nb.bound >= 2.0 * SQRT2 - 1e-9
    assert nb.bound <= 2.0 * SQRT2 + 1e-6
    assert nb.primal <= nb.bound + 1e-9
    pres, dres, gap = replay_residuals(nb.problem, nb.solution)
    assert pres <= 1e-6 and dres <= 1e-6 and gap <= 1e-6


def test_tilted_bounds_tighten_with_level():
    cfg = SeesawConfig(restarts=4)
    for eta_a0, eta_b in ((0.8, 0.9), (0.7, 1.0)):
        f = tilted_chsh_functional(eta_a0, eta_b)
        b1 = max_functional_upper_bound(f, level="1").bound
        b2 = max_functional_upper_bound(f, level="2").bound
        lower = seesaw_tilted(eta_a0, eta_b, cfg).value
        assert b2 <= b1 + 1e-9
        assert lower - 1e-6 <= b2
        assert b2 - lower <= 1e-4


def test_correlator_bounds_need_dichotomic_outcomes():
    with pytest.raises(ValueError):
        max_functional_upper_bound(chsh_functional(), s=ROUTED_SCENARIO, level="1")


# -- guessing program ---------------------------------------------------------

def test_deterministic_far_outcome_is_fully_guessable():
    res = guessing_probability(deterministic_table(), 0, "1")
    assert res.g == 1.0
    assert res.h_min == 0.0


def test_ideal_table_level_1_certifies_nothing():
    res = guessing_probability(ideal_table(), 0, "1")
    assert res.g >= 1.0 - 1e-6
    assert res.h_min <= 1e-5
    assert res.certificate["bound"] >= 1.0 - 1e-6


def test_ideal_table_level_1ab_pins_the_coin_flip():
    res = guessing_probability(ideal_table(), 0, "1ab")
    assert 0.5 - 1e-9 <= res.g <= 0.5 + 2e-4
    assert abs(res.h_min - 1.0) < 1e-3
    assert "rescue" in res.certificate
    assert res.certificate["bound"] >= res.g - 1e-12
    assert res.certificate["bound"] < 0.51
    total = res.branch_behaviors.sum(axis=0)
    assert np.max(np.abs(total - flatten_routed(ideal_table()))) < 1e-6


def test_guessing_validation_errors():
    with pytest.raises(ValueError):
        guessing_probability(ideal_table(), 2, "1")
    two_outcome = postprocess_assign(ideal_table())
    with pytest.raises(ValueError):
        guessing_probability(two_outcome, 0, "1")
