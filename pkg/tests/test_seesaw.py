"""Alternating-maximization solver for two-qubit Bell functionals."""

import numpy as np
import pytest

from routedbell.quantum import chsh_functional, functional_value, tilted_chsh_functional
from routedbell.seesaw import (
    SeesawConfig,
    bias_saturation_search,
    seesaw_functional,
    seesaw_tilted,
    strategy_start,
    strategy_to_csv,
    threshold_eta,
)

SQRT2 = np.sqrt(2.0)
CHEAP = SeesawConfig(restarts=4, max_iters=300)


def test_chsh_reaches_tsirelson():
    res = seesaw_functional(chsh_functional(), CHEAP)
    assert abs(res.value - 2.0 * SQRT2) < 1e-8
    assert res.converged
    assert res.value == max(res.restart_values)


def test_trace_is_monotone():
    res = seesaw_functional(chsh_functional(), CHEAP)
    diffs = np.diff(np.asarray(res.trace))
    assert np.min(diffs) > -1e-10


def test_reported_value_matches_returned_strategy():
    f = tilted_chsh_functional(0.85, 0.9)
    res = seesaw_tilted(0.85, 0.9, CHEAP)
    replay = functional_value(f, res.strategy.state, res.strategy.alice[0], res.strategy.bob)
    assert abs(replay - res.value) < 1e-10


def test_tilted_boundary_efficiencies_sit_on_the_local_bound():
    # both known quantum-advantage onsets collapse the optimum to exactly 2
    res_sym = seesaw_tilted(2.0 / 3.0, 2.0 / 3.0, CHEAP)
    assert abs(res_sym.value - 2.0) < 1e-6
    res_asym = seesaw_tilted(0.5, 1.0, CHEAP)
    assert abs(res_asym.value - 2.0) < 1e-6


def test_untilted_thresholds_match_closed_forms():
    assert abs(threshold_eta("sym", tilted=False, tol=1e-6) - 2.0 / (1.0 + SQRT2)) < 1e-5
    assert abs(threshold_eta("asym", tilted=False, tol=1e-6) - 1.0 / SQRT2) < 1e-5


def test_tilted_asym_threshold_is_one_half():
    eta = threshold_eta("asym", tilted=True, tol=1e-3, config=CHEAP)
    assert abs(eta - 0.5) < 2e-3


def test_warm_start_round_trip():
    res = seesaw_functional(chsh_functional(), CHEAP)
    start = strategy_start(res.strategy)
    res2 = seesaw_functional(chsh_functional(), SeesawConfig(restarts=2, max_iters=50),
                             extra_starts=[start])
    assert res2.value >= res.value - 1e-9


def test_bias_saturation_hits_target_chsh():
    strategy, chsh, bias = bias_saturation_search(2.4, tol_c=1e-4,
                                                  config=SeesawConfig(restarts=4))
    bound = 0.5 * np.sqrt(8.0 - chsh * chsh)
    assert abs(chsh - 2.4) < 1e-4
    assert bias <= bound + 1e-9
    assert bias > bound - 1e-3


def test_bias_search_rejects_out_of_range_targets():
    with pytest.raises(ValueError):
        bias_saturation_search(2.0)
    with pytest.raises(ValueError):
        bias_saturation_search(3.0)
    with pytest.raises(ValueError):
        threshold_eta("bogus")


def test_strategy_csv_has_state_and_observables(tmp_path):
    res = seesaw_functional(chsh_functional(), SeesawConfig(restarts=2, max_iters=50))
    path = tmp_path / "strategy.csv"
    strategy_to_csv(res.strategy, path)
    text = path.read_text()
    assert "psi_0_re" in text
    assert "bob_y0_x" in text
    assert len(text.strip().splitlines()) > 4
