"""CHSH functionals on routed behaviors and the near/far certification trade-off.

The near branch (i=0) plays a standard CHSH test; a strong enough violation
there buys a nontrivial bound on what any classically simulable distant device
could score, which in turn yields a critical distant efficiency.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .behavior import BehaviorTable, DeviceParams, RoutedDeviceSet, postprocess_assign, simulate_behavior
from .quantum import RoutedStrategy, isotropic_strategy
from .util import fmt17

TSIRELSON = 2.0 * float(np.sqrt(2.0))
BISECT_ITERATIONS = 60

OUTCOME_SIGNS = np.array([1.0, -1.0])


def correlators(table: BehaviorTable, i: int) -> np.ndarray:
    """Correlation matrix <a_x b_y> of one branch of a two-outcome table."""
    if table.n_outcomes != 2:
        raise ValueError("correlators require a two-outcome table")
    return np.einsum("xyab,a,b->xy", table.branch(i), OUTCOME_SIGNS, OUTCOME_SIGNS)


def alice_marginals(table: BehaviorTable, i: int) -> np.ndarray:
    """<a_x> per setting, averaged over Bob's setting (no-signaling makes y moot)."""
    if table.n_outcomes != 2:
        raise ValueError("alice_marginals require a two-outcome table")
    return np.einsum("xyab,a->x", table.branch(i), OUTCOME_SIGNS) / 2.0


def bob_marginals(table: BehaviorTable, i: int) -> np.ndarray:
    if table.n_outcomes != 2:
        raise ValueError("bob_marginals require a two-outcome table")
    return np.einsum("xyab,b->y", table.branch(i), OUTCOME_SIGNS) / 2.0


def chsh_value(table: BehaviorTable, i: int) -> float:
    """CHSH combination E00 + E01 + E10 - E11 of branch i."""
    e = correlators(table, i)
    return float(e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1])


def chsh_variants(table: BehaviorTable, i: int) -> np.ndarray:
    """All eight sign-symmetrized CHSH values of branch i."""
    e = correlators(table, i)
    values = []
    for ax in (1.0, -1.0):
        for bx in (1.0, -1.0):
            for g in (1.0, -1.0):
                values.append(g * (e[0, 0] + bx * e[0, 1] + ax * e[1, 0] - ax * bx * e[1, 1]))
    return np.array(values)


def tradeoff_rhs(c_near: float) -> float:
    """Best CHSH score available to a classically simulable distant device.

    Returns sqrt(8 - c^2) when the near branch violates (c > 2); otherwise the
    plain local bound 2 applies.
    """
    if c_near > TSIRELSON + 1e-9:
        raise ValueError(f"near CHSH value {c_near!r} exceeds the quantum maximum")
    c = min(c_near, TSIRELSON)
    if c <= 2.0:
        return 2.0
    # clamp: at the quantum maximum 8 - c^2 can round to -1e-15
    return float(np.sqrt(max(8.0 - c * c, 0.0)))


def marginal_bias_bound(c: float) -> float:
    """Largest |<b_y>| compatible with a CHSH value of c (trivial bound 1 below 2)."""
    if c > TSIRELSON + 1e-9:
        raise ValueError(f"CHSH value {c!r} exceeds the quantum maximum")
    c = min(abs(c), TSIRELSON)
    if c <= 2.0:
        return 1.0
    return float(0.5 * np.sqrt(max(8.0 - c * c, 0.0)))


def tilted_chsh_value(table: BehaviorTable, eta_a0: float, eta_b: float) -> float:
    """Efficiency-weighted CHSH evaluated on ideal branch-0 correlations.

    Identity: this equals the plain CHSH value of the behavior obtained by
    pushing the same strategy through devices with efficiencies (eta_a0,
    eta_b) and assigning no-clicks to +1.
    """
    c = chsh_value(table, 0)
    a0 = float(alice_marginals(table, 0)[0])
    b0 = float(bob_marginals(table, 0)[0])
    return (
        eta_a0 * eta_b * c
        + 2.0 * eta_a0 * (1.0 - eta_b) * a0
        + 2.0 * (1.0 - eta_a0) * eta_b * b0
        + 2.0 * (1.0 - eta_a0) * (1.0 - eta_b)
    )


@dataclass
class ChshReport:
    """Near/far CHSH scores of an assigned behavior and the implied certificate."""

    c_near: float
    c_far: float
    rhs: float
    certified: bool


def report_from_table(table: BehaviorTable) -> ChshReport:
    """Evaluate both branches of a two-outcome table against the trade-off."""
    c_near = chsh_value(table, 0)
    c_far = chsh_value(table, 1)
    rhs = tradeoff_rhs(c_near)
    return ChshReport(c_near=c_near, c_far=c_far, rhs=rhs, certified=bool(c_far > rhs))


@dataclass
class CriticalPoint:
    """Smallest distant efficiency at which the far branch clears its bound."""

    eta_a1_star: float
    nu_a1_fixed: float
    method: str  # "closed-form" or "bisection"
    c_a0b: float
    leveraged: bool  # near branch violated CHSH (bound below 2)
    attainable: bool = True


def _far_chsh(strategy: RoutedStrategy, near: tuple[DeviceParams, DeviceParams],
              eta_a1: float, nu_a1: float) -> float:
    devices = RoutedDeviceSet(a0=near[0], a1=DeviceParams(eta_a1, nu_a1), b=near[1])
    assigned = postprocess_assign(simulate_behavior(strategy, devices))
    return chsh_value(assigned, 1)


def _is_perfect_iso_asym(strategy: RoutedStrategy, near: tuple[DeviceParams, DeviceParams],
                         nu_a1: float) -> bool:
    a0, b = near
    if not (a0.nu == 1.0 and b.eta == 1.0 and b.nu == 1.0 and nu_a1 == 1.0):
        return False
    iso = isotropic_strategy()
    if np.max(np.abs(strategy.state.rho - iso.state.rho)) > 1e-12:
        return False
    for i in range(2):
        for x in range(2):
            if np.max(np.abs(np.subtract(strategy.alice[i][x].bloch, iso.alice[i][x].bloch))) > 1e-12:
                return False
    for y in range(2):
        if np.max(np.abs(np.subtract(strategy.bob[y].bloch, iso.bob[y].bloch))) > 1e-12:
            return False
    return True


def critical_eta_a1(strategy: RoutedStrategy, near: tuple[DeviceParams, DeviceParams],
                    nu_a1: float = 1.0) -> CriticalPoint:
    """Critical distant-device efficiency under the no-click-to-+1 assignment.

    `near` holds the (Alice near-path, Bob) device parameters.  When the near
    branch violates CHSH the far branch must beat sqrt(8 - c^2); otherwise it
    must beat the plain local bound 2 on its own and the result is flagged as
    not leveraged.
    """
    devices0 = RoutedDeviceSet(a0=near[0], a1=DeviceParams(1.0, nu_a1), b=near[1])
    assigned = postprocess_assign(simulate_behavior(strategy, devices0))
    c_near = chsh_value(assigned, 0)
    rhs = tradeoff_rhs(c_near)
    leveraged = c_near > 2.0

    if leveraged and _is_perfect_iso_asym(strategy, near, nu_a1):
        eta = near[0].eta
        return CriticalPoint(
            eta_a1_star=float(np.sqrt(1.0 - eta * eta)),
            nu_a1_fixed=nu_a1,
            method="closed-form",
            c_a0b=c_near,
            leveraged=True,
        )

    far_at_1 = chsh_value(assigned, 1)
    if far_at_1 < rhs:
        return CriticalPoint(1.0, nu_a1, "bisection", c_near, leveraged, attainable=False)
    if _far_chsh(strategy, near, 0.0, nu_a1) >= rhs:
        return CriticalPoint(0.0, nu_a1, "bisection", c_near, leveraged)
    lo, hi = 0.0, 1.0
    for _ in range(BISECT_ITERATIONS):
        mid = 0.5 * (lo + hi)
        if _far_chsh(strategy, near, mid, nu_a1) >= rhs:
            hi = mid
        else:
            lo = mid
    return CriticalPoint(hi, nu_a1, "bisection", c_near, leveraged)


@dataclass
class CurvePoint:
    case: str
    eta: float
    eta_star_a1: float
    method: str
    c_a0b: float


SWEEP_CASES = ("iso-sym", "iso-asym", "tilted-sym", "tilted-asym")


def _case_setup(case: str, eta: float):
    # Imported here to keep the module dependency one-way (seesaw uses quantum only).
    from .seesaw import seesaw_tilted

    if case == "iso-sym":
        return isotropic_strategy(), (DeviceParams(eta, 1.0), DeviceParams(eta, 1.0))
    if case == "iso-asym":
        return isotropic_strategy(), (DeviceParams(eta, 1.0), DeviceParams(1.0, 1.0))
    if case == "tilted-sym":
        result = seesaw_tilted(eta, eta)
        return result.strategy, (DeviceParams(eta, 1.0), DeviceParams(eta, 1.0))
    if case == "tilted-asym":
        result = seesaw_tilted(eta, 1.0)
        return result.strategy, (DeviceParams(eta, 1.0), DeviceParams(1.0, 1.0))
    raise ValueError(f"unknown sweep case {case!r}; expected one of {SWEEP_CASES}")


def sweep_point(case: str, eta: float, nu_a1: float = 1.0) -> CurvePoint:
    strategy, near = _case_setup(case, eta)
    cp = critical_eta_a1(strategy, near, nu_a1)
    method = cp.method if cp.leveraged else "standalone"
    return CurvePoint(case=case, eta=float(eta), eta_star_a1=cp.eta_a1_star,
                      method=method, c_a0b=cp.c_a0b)


def sweep_curve(case: str, grid, nu_a1: float = 1.0) -> list[CurvePoint]:
    """Critical far efficiency across a grid of near efficiencies for one case."""
    return [sweep_point(case, float(eta), nu_a1) for eta in grid]


def curve_to_csv(points: list[CurvePoint], path, comments: list[str] | None = None) -> None:
    with Path(path).open("w", newline="") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["case", "eta", "eta_star_a1", "method", "c_a0b"])
        for pt in points:
            writer.writerow([pt.case, fmt17(pt.eta), fmt17(pt.eta_star_a1), pt.method, fmt17(pt.c_a0b)])


def curve_from_csv(path) -> list[CurvePoint]:
    points = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(reader, None)
        if header != ["case", "eta", "eta_star_a1", "method", "c_a0b"]:
            raise ValueError(f"unexpected curve CSV header: {header}")
        for row in reader:
            if not row:
                continue
            case, eta, star, method, c = row
            points.append(CurvePoint(case, float(eta), float(star), method, float(c)))
    return points
