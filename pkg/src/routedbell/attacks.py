"""Active attacks that fake lossy nonlocal statistics with classical models.

Both attacks distribute classical hidden variables, answer honestly only
when a guess matches, and output the no-click outcome otherwise.  The
induced tables are computed by enumerating the hidden variables in exact
arithmetic; any exact scalar type with field operations works (Fraction
entries are the common case), so claimed identities can be checked
bit-for-bit rather than to a tolerance.

Scenario counts follow (N, N', M, M'): Alice's input and output counts,
then Bob's.  Induced tables append the no-click outcome after the definite
outcomes, index N' (Alice) or M' (Bob).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .util import make_rng

SETTINGS_GUESS = "settings-guess"
OUTCOME_GUESS = "outcome-guess"


@dataclass(frozen=True)
class AttackScenario:
    a_inputs: int
    a_outputs: int
    b_inputs: int
    b_outputs: int

    def __post_init__(self):
        for name, v in vars(self).items():
            if v < 1:
                raise ValueError(f"{name} must be positive, got {v}")


class NsBehavior:
    """No-signaling target distribution with exact entries, indexed [x, y, a, b]."""

    def __init__(self, entries: np.ndarray):
        arr = np.asarray(entries, dtype=object)
        if arr.ndim != 4:
            raise ValueError(f"expected a 4-axis table, got shape {arr.shape}")
        self.entries = arr
        self._validate()

    @property
    def scenario(self) -> AttackScenario:
        nx, ny, na, nb = self.entries.shape
        return AttackScenario(nx, na, ny, nb)

    def _validate(self):
        p = self.entries
        nx, ny, na, nb = p.shape
        zero = p.flat[0] * 0
        for x in range(nx):
            for y in range(ny):
                block = p[x, y]
                if sum(block.flat) != zero + 1:
                    raise ValueError(f"block ({x}, {y}) does not sum to one exactly")
                for v in block.flat:
                    if v < zero:
                        raise ValueError(f"negative entry in block ({x}, {y})")
        for x in range(nx):
            ref = p[x, 0].sum(axis=1)
            for y in range(1, ny):
                if not np.array_equal(ref, p[x, y].sum(axis=1)):
                    raise ValueError(f"Alice's marginal at x={x} depends on y")
        for y in range(ny):
            ref = p[0, y].sum(axis=0)
            for x in range(1, nx):
                if not np.array_equal(ref, p[x, y].sum(axis=0)):
                    raise ValueError(f"Bob's marginal at y={y} depends on x")

    def alice_marginal(self, x: int) -> np.ndarray:
        return self.entries[x, 0].sum(axis=1)

    def bob_marginal(self, y: int) -> np.ndarray:
        return self.entries[0, y].sum(axis=0)

    def as_float(self) -> np.ndarray:
        return np.vectorize(float)(self.entries)


@dataclass
class AttackModel:
    """Hidden-variable description of one attack round.

    settings-guess: hidden (lx, ly, la, lb) carry a guessed input pair and
    outcomes pre-sampled from the target conditioned on that pair; a device
    answers its pre-sampled outcome iff its real input matches the guess.

    outcome-guess: hidden (la, lb) are uniform outcome guesses; devices
    measure honestly and reveal the outcome iff it equals the guess.
    """

    kind: str
    scenario: AttackScenario
    target: NsBehavior
    hidden_joint: np.ndarray | None = None   # settings-guess: [lx, ly, la, lb]

    def alice_response(self, x: int, hidden, honest=None) -> int:
        s = self.scenario
        if self.kind == SETTINGS_GUESS:
            lx, _, la, _ = hidden
            return la if x == lx else s.a_outputs
        la, _ = hidden
        return honest if honest == la else s.a_outputs

    def bob_response(self, y: int, hidden, honest=None) -> int:
        s = self.scenario
        if self.kind == SETTINGS_GUESS:
            _, ly, _, lb = hidden
            return lb if y == ly else s.b_outputs
        _, lb = hidden
        return honest if honest == lb else s.b_outputs


def security_floor(n_inputs: int, n_outputs: int) -> float:
    """Detection efficiency below which the attacks reproduce any target:
    min(1/N, 1/N') for a device with N inputs and N' outputs."""
    if n_inputs < 1 or n_outputs < 1:
        raise ValueError("input and output counts must be positive")
    return 1.0 / max(n_inputs, n_outputs)


def _empty_induced(s: AttackScenario, like) -> np.ndarray:
    zero = like * 0
    out = np.empty((s.a_inputs, s.b_inputs, s.a_outputs + 1, s.b_outputs + 1),
                   dtype=object)
    out[...] = zero
    return out


def attack_one(p_nl: NsBehavior) -> tuple[AttackModel, NsBehavior]:
    """Settings-guess attack: four classical variables per round, efficiency
    1/N for Alice and 1/M for Bob, target reproduced exactly."""
    s = p_nl.scenario
    nm = Fraction(1, s.a_inputs * s.b_inputs)
    hidden = np.empty((s.a_inputs, s.b_inputs, s.a_outputs, s.b_outputs),
                      dtype=object)
    for lx in range(s.a_inputs):
        for ly in range(s.b_inputs):
            for la in range(s.a_outputs):
                for lb in range(s.b_outputs):
                    hidden[lx, ly, la, lb] = nm * p_nl.entries[lx, ly, la, lb]
    model = AttackModel(SETTINGS_GUESS, s, p_nl, hidden)
    return model, induced_table(model)


def attack_two(p_nl: NsBehavior) -> tuple[AttackModel, NsBehavior, float]:
    """Outcome-guess attack: uniform guesses (la, lb), efficiency 1/N' and
    1/M'; the eavesdropper knows every revealed outcome, so leakage is 1."""
    model = AttackModel(OUTCOME_GUESS, p_nl.scenario, p_nl)
    return model, induced_table(model), 1.0


def induced_table(model: AttackModel) -> NsBehavior:
    """Exact observed distribution of an attack, by hidden-variable
    enumeration (not the closed product form, which tests check against)."""
    s = model.scenario
    target = model.target.entries
    out = _empty_induced(s, target.flat[0])
    if model.kind == SETTINGS_GUESS:
        hj = model.hidden_joint
        for lx in range(s.a_inputs):
            for ly in range(s.b_inputs):
                for la in range(s.a_outputs):
                    for lb in range(s.b_outputs):
                        w = hj[lx, ly, la, lb]
                        if w == 0:
                            continue
                        for x in range(s.a_inputs):
                            a = la if x == lx else s.a_outputs
                            for y in range(s.b_inputs):
                                b = lb if y == ly else s.b_outputs
                                out[x, y, a, b] += w
    elif model.kind == OUTCOME_GUESS:
        w0 = Fraction(1, s.a_outputs * s.b_outputs)
        for la in range(s.a_outputs):
            for lb in range(s.b_outputs):
                for x in range(s.a_inputs):
                    for y in range(s.b_inputs):
                        for ah in range(s.a_outputs):
                            a = ah if ah == la else s.a_outputs
                            for bh in range(s.b_outputs):
                                b = bh if bh == lb else s.b_outputs
                                out[x, y, a, b] += w0 * target[x, y, ah, bh]
    else:
        raise ValueError(f"unknown attack kind {model.kind!r}")
    return NsBehavior(out)


# -- targets -----------------------------------------------------------------

def pr_embedded_box(s: AttackScenario) -> NsBehavior:
    """The PR box on the first two inputs/outputs; extra inputs repeat input
    0, extra outcomes carry no mass.  Exact and no-signaling by symmetry."""
    if s.a_outputs < 2 or s.b_outputs < 2:
        raise ValueError("PR embedding needs at least two outcomes per side")
    half = Fraction(1, 2)
    out = np.empty((s.a_inputs, s.b_inputs, s.a_outputs, s.b_outputs), dtype=object)
    out[...] = Fraction(0)
    for x in range(s.a_inputs):
        for y in range(s.b_inputs):
            ex, ey = min(x, 1), min(y, 1)
            for a in range(2):
                for b in range(2):
                    if (a + b) % 2 == (ex * ey) % 2:
                        out[x, y, a, b] = half
    return NsBehavior(out)


def random_ns_target(s: AttackScenario, rng: np.random.Generator,
                     n_vertices: int = 6) -> NsBehavior:
    """Rational no-signaling target: a random rational mixture of the
    embedded PR box and local deterministic vertices."""
    raw = [int(v) for v in rng.integers(1, 24, size=n_vertices + 1)]
    total = sum(raw)
    weights = [Fraction(v, total) for v in raw]
    out = np.empty((s.a_inputs, s.b_inputs, s.a_outputs, s.b_outputs), dtype=object)
    out[...] = Fraction(0)
    out += weights[0] * pr_embedded_box(s).entries
    for w in weights[1:]:
        fa = rng.integers(0, s.a_outputs, size=s.a_inputs)
        fb = rng.integers(0, s.b_outputs, size=s.b_inputs)
        for x in range(s.a_inputs):
            for y in range(s.b_inputs):
                out[x, y, int(fa[x]), int(fb[y])] += w
    return NsBehavior(out)


# -- Monte-Carlo sampling ----------------------------------------------------

def sample_counts(model: AttackModel, n_rounds: int, seed: int) -> np.ndarray:
    """Outcome counts from `n_rounds` rounds with uniform random settings;
    shape matches the induced table."""
    s = model.scenario
    rng = make_rng(seed)
    xs = rng.integers(0, s.a_inputs, size=n_rounds)
    ys = rng.integers(0, s.b_inputs, size=n_rounds)
    ka, kb = s.a_outputs + 1, s.b_outputs + 1
    counts = np.zeros((s.a_inputs, s.b_inputs, ka, kb), dtype=np.int64)
    if model.kind == SETTINGS_GUESS:
        pvec = np.vectorize(float)(model.hidden_joint).reshape(-1)
        hid = rng.choice(pvec.size, size=n_rounds, p=pvec)
        lx, ly, la, lb = np.unravel_index(hid, model.hidden_joint.shape)
        a = np.where(xs == lx, la, s.a_outputs)
        b = np.where(ys == ly, lb, s.b_outputs)
    else:
        la = rng.integers(0, s.a_outputs, size=n_rounds)
        lb = rng.integers(0, s.b_outputs, size=n_rounds)
        ah = np.empty(n_rounds, dtype=np.int64)
        bh = np.empty(n_rounds, dtype=np.int64)
        tfloat = model.target.as_float()
        for x in range(s.a_inputs):
            for y in range(s.b_inputs):
                sel = np.flatnonzero((xs == x) & (ys == y))
                if sel.size == 0:
                    continue
                joint = tfloat[x, y].reshape(-1)
                draws = rng.choice(joint.size, size=sel.size, p=joint / joint.sum())
                ah[sel], bh[sel] = np.unravel_index(draws, tfloat[x, y].shape)
        a = np.where(ah == la, ah, s.a_outputs)
        b = np.where(bh == lb, bh, s.b_outputs)
    np.add.at(counts, (xs, ys, a, b), 1)
    return counts


# -- CSV interchange ---------------------------------------------------------

def _outcome_label(idx: int, n_definite: int) -> str:
    if idx == n_definite:
        return "perp"
    if n_definite == 2:
        return "+1" if idx == 0 else "-1"
    return str(idx)


def _fraction_text(v) -> str:
    f = Fraction(v) if not isinstance(v, Fraction) else v
    return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)


def ns_to_csv(table: NsBehavior, path, comments: list[str] | None = None,
              definite_a: int | None = None, definite_b: int | None = None) -> None:
    """Write a (possibly attacked) table with exact `num/den` probabilities.

    `definite_a`/`definite_b` mark how many outcomes are definite; outcomes
    past them are labeled `perp`.  Defaults treat every outcome as definite.
    """
    nx, ny, na, nb = table.entries.shape
    da = na if definite_a is None else definite_a
    db = nb if definite_b is None else definite_b
    with Path(path).open("w", newline="") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "a", "b", "p"])
        for x in range(nx):
            for y in range(ny):
                for a in range(na):
                    for b in range(nb):
                        writer.writerow([x, y, _outcome_label(a, da),
                                         _outcome_label(b, db),
                                         _fraction_text(table.entries[x, y, a, b])])


def ns_from_csv(path) -> NsBehavior:
    rows = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x", "y", "a", "b", "p"]:
            raise ValueError(f"unexpected attack CSV header: {header}")
        for row in reader:
            if not row:
                continue
            if len(row) != 5:
                raise ValueError(f"malformed attack CSV row: {row}")
            rows.append(row)
    labels_a = sorted({r[2].strip() for r in rows}, key=_label_key)
    labels_b = sorted({r[3].strip() for r in rows}, key=_label_key)
    ia = {lab: k for k, lab in enumerate(labels_a)}
    ib = {lab: k for k, lab in enumerate(labels_b)}
    nx = 1 + max(int(r[0]) for r in rows)
    ny = 1 + max(int(r[1]) for r in rows)
    out = np.empty((nx, ny, len(labels_a), len(labels_b)), dtype=object)
    for x, y, a, b, p in rows:
        out[int(x), int(y), ia[a.strip()], ib[b.strip()]] = Fraction(p.strip())
    if any(v is None for v in out.flat):
        raise ValueError("attack CSV is missing entries")
    return NsBehavior(out)


def _label_key(lab: str):
    order = {"+1": 0, "-1": 1, "perp": 10**6}
    if lab in order:
        return order[lab]
    return int(lab)
