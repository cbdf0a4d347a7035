"""Two-qubit states, dichotomic observables, and routed measurement strategies.

A routed strategy fixes one bipartite state, a pair of Alice observables for
each routing branch i (near device for i=0, distant device for i=1), and a
pair of Bob observables shared by both branches.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    as_matrix,
    dagger,
    is_hermitian,
    partial_trace_first,
    partial_trace_second,
)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
ID2 = np.eye(2, dtype=np.complex128)
ID4 = np.eye(4, dtype=np.complex128)

SQRT2 = float(np.sqrt(2.0))


@dataclass(frozen=True)
class DichotomicObservable:
    """A +/-1-valued qubit observable n . sigma, stored by its Bloch vector."""

    bloch: tuple[float, float, float]

    def __post_init__(self):
        n = np.asarray(self.bloch, dtype=float)
        if n.shape != (3,):
            raise ValueError("Bloch vector must have three components")
        norm = float(np.linalg.norm(n))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"Bloch vector must be unit length, |n| = {norm!r}")
        object.__setattr__(self, "bloch", tuple(float(c) for c in n / norm))

    @property
    def matrix(self) -> np.ndarray:
        nx, ny, nz = self.bloch
        return nx * PAULI_X + ny * PAULI_Y + nz * PAULI_Z

    def projector(self, outcome: int) -> np.ndarray:
        """Rank-1 projector onto the +1 (outcome=+1) or -1 eigenspace."""
        if outcome not in (+1, -1):
            raise ValueError("outcome must be +1 or -1")
        return (ID2 + outcome * self.matrix) / 2.0


OBS_Z = DichotomicObservable((0.0, 0.0, 1.0))
OBS_X = DichotomicObservable((1.0, 0.0, 0.0))
OBS_ZX_PLUS = DichotomicObservable((1.0 / SQRT2, 0.0, 1.0 / SQRT2))
OBS_ZX_MINUS = DichotomicObservable((-1.0 / SQRT2, 0.0, 1.0 / SQRT2))


@dataclass
class TwoQubitState:
    """Density operator on C^2 (x) C^2 (Alice factor first)."""

    rho: np.ndarray

    def __post_init__(self):
        rho = as_matrix(self.rho, dim=4)
        if not is_hermitian(rho, tol=1e-10):
            raise ValueError("state must be Hermitian")
        tr = float(np.real(np.trace(rho)))
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"state must have unit trace, got {tr!r}")
        sym = (rho + dagger(rho)) / 2.0
        try:
            np.linalg.cholesky(sym + 1e-10 * np.eye(4))
        except np.linalg.LinAlgError:
            raise ValueError("state must be positive semidefinite (within 1e-10)") from None
        self.rho = sym

    @classmethod
    def from_vector(cls, psi) -> "TwoQubitState":
        v = np.asarray(psi, dtype=np.complex128).reshape(4)
        nrm = float(np.linalg.norm(v))
        if nrm <= 0:
            raise ValueError("state vector must be nonzero")
        v = v / nrm
        return cls(np.outer(v, np.conj(v)))

    def reduced_alice(self) -> np.ndarray:
        return partial_trace_second(self.rho)

    def reduced_bob(self) -> np.ndarray:
        return partial_trace_first(self.rho)

    def expect(self, op: np.ndarray) -> float:
        return float(np.real(np.trace(self.rho @ op)))


def phi_plus() -> TwoQubitState:
    return TwoQubitState.from_vector([1.0, 0.0, 0.0, 1.0])


@dataclass
class RoutedStrategy:
    """State plus observables; alice[i][x] is the branch-i setting-x observable."""

    state: TwoQubitState
    alice: tuple[tuple[DichotomicObservable, DichotomicObservable],
                 tuple[DichotomicObservable, DichotomicObservable]]
    bob: tuple[DichotomicObservable, DichotomicObservable]

    def alice_obs(self, x: int, i: int) -> DichotomicObservable:
        return self.alice[i][x]

    def bob_obs(self, y: int) -> DichotomicObservable:
        return self.bob[y]


def isotropic_strategy() -> RoutedStrategy:
    """Maximally entangled state with the standard CHSH-optimal observables.

    Alice measures sigma_z / sigma_x on both branches; Bob measures
    (sigma_z +/- sigma_x)/sqrt(2).
    """
    pair = (OBS_Z, OBS_X)
    return RoutedStrategy(state=phi_plus(), alice=(pair, pair), bob=(OBS_ZX_PLUS, OBS_ZX_MINUS))


def apply_visibility(state: TwoQubitState, nu_alice: float, nu_bob: float) -> TwoQubitState:
    """Mix in white noise independently on each side.

    With probability nu the side keeps its share of the state; otherwise that
    share is replaced by a maximally mixed qubit, leaving the other side's
    reduced state untouched.
    """
    for name, nu in (("nu_alice", nu_alice), ("nu_bob", nu_bob)):
        if not 0.0 <= nu <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {nu!r}")
    rho = state.rho
    red_a = state.reduced_alice()
    red_b = state.reduced_bob()
    mixed = (
        nu_alice * nu_bob * rho
        + nu_alice * (1.0 - nu_bob) * np.kron(red_a, ID2 / 2.0)
        + (1.0 - nu_alice) * nu_bob * np.kron(ID2 / 2.0, red_b)
        + (1.0 - nu_alice) * (1.0 - nu_bob) * ID4 / 4.0
    )
    return TwoQubitState(mixed)


@dataclass(frozen=True)
class BellFunctional:
    """Linear functional over one branch: joint, marginal, and constant terms.

    value = sum_xy joint[x, y] <a_x b_y> + sum_x alice_marg[x] <a_x>
            + sum_y bob_marg[y] <b_y> + const
    """

    joint: tuple[tuple[float, float], tuple[float, float]]
    alice_marg: tuple[float, float] = (0.0, 0.0)
    bob_marg: tuple[float, float] = (0.0, 0.0)
    const: float = 0.0

    def joint_array(self) -> np.ndarray:
        return np.asarray(self.joint, dtype=float)


CHSH_SIGNS = ((1.0, 1.0), (1.0, -1.0))


def chsh_functional() -> BellFunctional:
    return BellFunctional(joint=CHSH_SIGNS)


def tilted_chsh_functional(eta_a0: float, eta_b: float) -> BellFunctional:
    """Efficiency-weighted CHSH with marginal compensation terms.

    Equals the plain CHSH value of the no-click-to-+1 behavior when evaluated
    on the lossless branch-0 correlations (efficiencies eta_a0, eta_b).  Its
    local bound is 2 for every choice of efficiencies.
    """
    for name, eta in (("eta_a0", eta_a0), ("eta_b", eta_b)):
        if not 0.0 <= eta <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {eta!r}")
    joint = tuple(tuple(eta_a0 * eta_b * s for s in row) for row in CHSH_SIGNS)
    return BellFunctional(
        joint=joint,
        alice_marg=(2.0 * eta_a0 * (1.0 - eta_b), 0.0),
        bob_marg=(2.0 * (1.0 - eta_a0) * eta_b, 0.0),
        const=2.0 * (1.0 - eta_a0) * (1.0 - eta_b),
    )


def bell_operator(
    functional: BellFunctional,
    alice_pair: tuple[DichotomicObservable, DichotomicObservable],
    bob_pair: tuple[DichotomicObservable, DichotomicObservable],
) -> np.ndarray:
    """Assemble the 4x4 operator whose expectation is the functional value."""
    op = np.zeros((4, 4), dtype=np.complex128)
    for x in range(2):
        ax = alice_pair[x].matrix
        for y in range(2):
            cxy = functional.joint[x][y]
            if cxy != 0.0:
                op += cxy * np.kron(ax, bob_pair[y].matrix)
        if functional.alice_marg[x] != 0.0:
            op += functional.alice_marg[x] * np.kron(ax, ID2)
    for y in range(2):
        if functional.bob_marg[y] != 0.0:
            op += functional.bob_marg[y] * np.kron(ID2, bob_pair[y].matrix)
    if functional.const != 0.0:
        op += functional.const * ID4
    return op


def correlator(state: TwoQubitState, obs_a: DichotomicObservable, obs_b: DichotomicObservable) -> float:
    return state.expect(np.kron(obs_a.matrix, obs_b.matrix))


def functional_value(
    functional: BellFunctional,
    state: TwoQubitState,
    alice_pair: tuple[DichotomicObservable, DichotomicObservable],
    bob_pair: tuple[DichotomicObservable, DichotomicObservable],
) -> float:
    return state.expect(bell_operator(functional, alice_pair, bob_pair))
