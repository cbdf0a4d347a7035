"""Shared table builders used across the test modules."""

import numpy as np

from routedbell.behavior import (
    BehaviorTable,
    DeviceParams,
    RoutedDeviceSet,
    perfect_devices,
    simulate_behavior,
)
from routedbell.quantum import isotropic_strategy


def ideal_table() -> BehaviorTable:
    """Three-outcome table of the isotropic strategy with perfect devices."""
    return simulate_behavior(isotropic_strategy(), perfect_devices())


def lossy_table(eta_a0=1.0, nu_a0=1.0, eta_a1=1.0, nu_a1=1.0,
                eta_b=1.0, nu_b=1.0) -> BehaviorTable:
    devices = RoutedDeviceSet(
        a0=DeviceParams(eta_a0, nu_a0),
        a1=DeviceParams(eta_a1, nu_a1),
        b=DeviceParams(eta_b, nu_b),
    )
    return simulate_behavior(isotropic_strategy(), devices)


def deterministic_table(n_outcomes: int = 3) -> BehaviorTable:
    """Both parties always output +1 in every branch."""
    entries = np.zeros((2, 2, 2, n_outcomes, n_outcomes))
    entries[..., 0, 0] = 1.0
    return BehaviorTable(entries)
