"""Routed Bell experiments: simulation, certification, and randomness bounds.

The package simulates two-branch (near/far) Bell tests with lossy, noisy
devices, evaluates CHSH-type certificates and their detection-efficiency
trade-off, bounds the far device's guessing probability through moment-matrix
relaxations solved by an embedded interior-point conic solver, and reproduces
the two no-signaling attacks that pin the security thresholds.
"""

from .behavior import (
    BehaviorTable,
    DeviceParams,
    RoutedDeviceSet,
    eta_from_distance,
    perfect_devices,
    postprocess_assign,
    simulate_behavior,
)
from .chsh import (
    TSIRELSON,
    ChshReport,
    CriticalPoint,
    CurvePoint,
    chsh_value,
    critical_eta_a1,
    marginal_bias_bound,
    report_from_table,
    sweep_curve,
    tilted_chsh_value,
    tradeoff_rhs,
)
from .conic import ConicProblem, SdpBlock, SolveOptions, SolveReport, solve
from .localset import (
    HybridLhvModel,
    LocalityCertificate,
    Scenario,
    hybrid_chsh_pair,
    is_local,
    local_max,
    sample_hybrid_models,
)
from .npa import (
    GuessingResult,
    NpaBound,
    OutsideRelaxationError,
    RelaxationSolverError,
    critical_eta_numeric,
    guessing_probability,
    max_functional_upper_bound,
    membership_residual,
)
from .quantum import (
    RoutedStrategy,
    TwoQubitState,
    apply_visibility,
    chsh_functional,
    isotropic_strategy,
    phi_plus,
    tilted_chsh_functional,
)
from .attacks import (
    AttackScenario,
    NsBehavior,
    attack_one,
    attack_two,
    induced_table,
    security_floor,
)
from .seesaw import SeesawConfig, seesaw_functional, seesaw_tilted, threshold_eta

__version__ = "0.1.0"

__all__ = [
    "AttackScenario",
    "BehaviorTable",
    "ChshReport",
    "ConicProblem",
    "CriticalPoint",
    "CurvePoint",
    "DeviceParams",
    "GuessingResult",
    "HybridLhvModel",
    "LocalityCertificate",
    "NpaBound",
    "NsBehavior",
    "OutsideRelaxationError",
    "RelaxationSolverError",
    "RoutedDeviceSet",
    "RoutedStrategy",
    "Scenario",
    "SdpBlock",
    "SeesawConfig",
    "SolveOptions",
    "SolveReport",
    "TSIRELSON",
    "TwoQubitState",
    "apply_visibility",
    "attack_one",
    "attack_two",
    "chsh_functional",
    "chsh_value",
    "critical_eta_a1",
    "critical_eta_numeric",
    "eta_from_distance",
    "guessing_probability",
    "hybrid_chsh_pair",
    "induced_table",
    "is_local",
    "isotropic_strategy",
    "local_max",
    "marginal_bias_bound",
    "max_functional_upper_bound",
    "membership_residual",
    "perfect_devices",
    "phi_plus",
    "postprocess_assign",
    "report_from_table",
    "sample_hybrid_models",
    "security_floor",
    "seesaw_functional",
    "seesaw_tilted",
    "simulate_behavior",
    "solve",
    "sweep_curve",
    "threshold_eta",
    "tilted_chsh_functional",
    "tilted_chsh_value",
    "tradeoff_rhs",
]
