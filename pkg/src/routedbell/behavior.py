"""Detection-layer behavior tables for routed strategies.

Outcomes are ordered (+1, -1, perp) where "perp" is the no-click event.
Settings are ordered lexicographically in (i, x, y): i selects Alice's routing
branch, x her measurement setting, y Bob's setting.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .quantum import RoutedStrategy, apply_visibility
from .util import fmt17

OUTCOME_LABELS = ("+1", "-1", "perp")
PERP = 2  # index of the no-click outcome

NORMALIZATION_TOL = 1e-9
NO_SIGNALING_TOL = 1e-10
ENTRY_FLOOR = -1e-14


@dataclass(frozen=True)
class DeviceParams:
    """Detection efficiency and visibility of one measurement device."""

    eta: float
    nu: float = 1.0

    def __post_init__(self):
        for name, val in (("eta", self.eta), ("nu", self.nu)):
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {val!r}")


@dataclass(frozen=True)
class RoutedDeviceSet:
    """Devices for the near Alice path (a0), distant Alice path (a1), and Bob."""

    a0: DeviceParams
    a1: DeviceParams
    b: DeviceParams


def perfect_devices() -> RoutedDeviceSet:
    one = DeviceParams(1.0, 1.0)
    return RoutedDeviceSet(one, one, one)


@dataclass
class ValidationReport:
    normalization_dev: float
    min_entry: float
    alice_ns_dev: float
    bob_ns_dev: float

    @property
    def normalized(self) -> bool:
        return self.normalization_dev <= NORMALIZATION_TOL

    @property
    def nonnegative(self) -> bool:
        return self.min_entry >= ENTRY_FLOOR

    @property
    def no_signaling(self) -> bool:
        return max(self.alice_ns_dev, self.bob_ns_dev) <= NO_SIGNALING_TOL

    @property
    def ok(self) -> bool:
        return self.normalized and self.nonnegative and self.no_signaling


class BehaviorTable:
    """Joint outcome distribution p(a, b | i, x, y), two or three outcomes per side."""

    def __init__(self, entries: np.ndarray):
        arr = np.asarray(entries, dtype=float)
        if arr.ndim != 5 or arr.shape[:3] != (2, 2, 2) or arr.shape[3] != arr.shape[4]:
            raise ValueError(f"expected shape (2, 2, 2, k, k), got {arr.shape}")
        if arr.shape[3] not in (2, 3):
            raise ValueError("outcome count must be 2 or 3")
        self.entries = arr

    @property
    def n_outcomes(self) -> int:
        return int(self.entries.shape[3])

    def branch(self, i: int) -> np.ndarray:
        """Entries of one routing branch, indexed [x, y, a, b]."""
        return self.entries[i]

    def validate(self) -> ValidationReport:
        p = self.entries
        norm_dev = float(np.max(np.abs(p.sum(axis=(3, 4)) - 1.0)))
        min_entry = float(p.min())
        alice = p.sum(axis=4)  # [i, x, y, a]
        alice_dev = float(np.max(np.ptp(alice, axis=2)))
        bob = p.sum(axis=3)  # [i, x, y, b]
        flat = bob.transpose(2, 3, 0, 1).reshape(2, self.n_outcomes, 4)
        bob_dev = float(np.max(np.ptp(flat, axis=2)))
        return ValidationReport(norm_dev, min_entry, alice_dev, bob_dev)

    def __eq__(self, other) -> bool:
        return isinstance(other, BehaviorTable) and np.array_equal(self.entries, other.entries)

    def to_csv(self, path, comments: list[str] | None = None) -> None:
        path = Path(path)
        labels = OUTCOME_LABELS[: self.n_outcomes]
        with path.open("w", newline="") as fh:
            for line in comments or []:
                fh.write(f"# {line}\n")
            writer = csv.writer(fh)
            writer.writerow(["i", "x", "y", "a", "b", "p"])
            for i in range(2):
                for x in range(2):
                    for y in range(2):
                        for ia, la in enumerate(labels):
                            for ib, lb in enumerate(labels):
                                writer.writerow(
                                    [i, x, y, la, lb, fmt17(self.entries[i, x, y, ia, ib])]
                                )

    @classmethod
    def from_csv(cls, path) -> "BehaviorTable":
        rows = _read_table_rows(path)
        labels = {row[3] for row in rows} | {row[4] for row in rows}
        if "perp" in labels:
            k = 3
        else:
            k = 2
        idx = {lab: j for j, lab in enumerate(OUTCOME_LABELS[:k])}
        entries = np.full((2, 2, 2, k, k), np.nan)
        for i, x, y, la, lb, p in rows:
            try:
                entries[int(i), int(x), int(y), idx[la], idx[lb]] = p
            except (KeyError, IndexError, ValueError) as exc:
                raise ValueError(f"malformed behavior row {(i, x, y, la, lb)}") from exc
        if np.isnan(entries).any():
            raise ValueError("behavior CSV is missing entries")
        return cls(entries)


def _parse_prob(text: str) -> float:
    text = text.strip()
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def _read_table_rows(path) -> list[tuple[str, str, str, str, str, float]]:
    rows = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["i", "x", "y", "a", "b", "p"]:
            raise ValueError(f"unexpected behavior CSV header: {header}")
        for row in reader:
            if not row:
                continue
            if len(row) != 6:
                raise ValueError(f"malformed behavior CSV row: {row}")
            i, x, y, a, b, p = row
            rows.append((i, x, y, a.strip(), b.strip(), _parse_prob(p)))
    return rows


def simulate_behavior(strategy: RoutedStrategy, devices: RoutedDeviceSet) -> BehaviorTable:
    """Three-outcome behavior of a routed strategy through lossy, noisy devices.

    Each side clicks independently with its device efficiency.  A joint click
    samples the Born distribution of the visibility-degraded state; a lone
    click samples that party's marginal; a double no-click happens with
    probability (1 - eta_A)(1 - eta_B).
    """
    entries = np.zeros((2, 2, 2, 3, 3))
    for i in range(2):
        dev_a = devices.a0 if i == 0 else devices.a1
        state = apply_visibility(strategy.state, dev_a.nu, devices.b.nu)
        eta_a, eta_b = dev_a.eta, devices.b.eta
        for x in range(2):
            proj_a = [strategy.alice_obs(x, i).projector(o) for o in (+1, -1)]
            for y in range(2):
                proj_b = [strategy.bob_obs(y).projector(o) for o in (+1, -1)]
                for ia in range(2):
                    marg_a = state.expect(np.kron(proj_a[ia], np.eye(2)))
                    for ib in range(2):
                        joint = state.expect(np.kron(proj_a[ia], proj_b[ib]))
                        entries[i, x, y, ia, ib] = eta_a * eta_b * joint
                    entries[i, x, y, ia, PERP] = eta_a * (1.0 - eta_b) * marg_a
                for ib in range(2):
                    marg_b = state.expect(np.kron(np.eye(2), proj_b[ib]))
                    entries[i, x, y, PERP, ib] = (1.0 - eta_a) * eta_b * marg_b
                entries[i, x, y, PERP, PERP] = (1.0 - eta_a) * (1.0 - eta_b)
    if entries.min() < ENTRY_FLOOR:
        raise ValueError(f"negative probability {entries.min()!r} from Born rule")
    return BehaviorTable(np.clip(entries, 0.0, None))


def postprocess_assign(table: BehaviorTable, target: int = +1) -> BehaviorTable:
    """Merge the no-click outcome into a definite outcome on both sides."""
    if table.n_outcomes != 3:
        raise ValueError("postprocess_assign expects a three-outcome table")
    if target not in (+1, -1):
        raise ValueError("target outcome must be +1 or -1")
    t = 0 if target == +1 else 1
    p = table.entries
    out = p[:, :, :, :2, :2].copy()
    out[:, :, :, t, :] += p[:, :, :, PERP, :2]
    out[:, :, :, :, t] += p[:, :, :, :2, PERP]
    out[:, :, :, t, t] += p[:, :, :, PERP, PERP]
    return BehaviorTable(out)


def eta_from_distance(eta0: float, alpha_db_per_km: float, length_km: float) -> float:
    """Effective efficiency of a detector behind `length_km` of lossy fiber."""
    if not 0.0 <= eta0 <= 1.0:
        raise ValueError("eta0 must lie in [0, 1]")
    if alpha_db_per_km < 0 or length_km < 0:
        raise ValueError("attenuation and length must be nonnegative")
    return eta0 * 10.0 ** (-alpha_db_per_km * length_km / 10.0)
