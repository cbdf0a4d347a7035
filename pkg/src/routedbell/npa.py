"""Moment-matrix outer approximations of the quantum set, and the
adversarial guessing-probability program over a routed behavior.

Measurement operators are projectors, one free projector per dichotomic
input and two per three-outcome input (the last outcome follows from
completeness).  A word is a product of projectors stored as per-party
symbol tuples, each symbol (input, outcome); parties commute, so the
canonical form lists Alice's symbols before Bob's.  A word and its adjoint
(symbol reversal) share one moment variable, which keeps every relaxation
real-symmetric and the problem files bit-stable.

The routed scenario flattens Alice's (route, setting) pair into a single
input index 2*i + x with three outcomes per side, matching the 72-entry
behavior tables produced by the simulator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .behavior import BehaviorTable, DeviceParams, RoutedDeviceSet, simulate_behavior
from .conic import (ConicProblem, SdpBlock, Solution, SolveOptions, SolveReport,
                    cone_shifted, dual_ingredients, solve)
from .localset import Scenario
from .quantum import BellFunctional, RoutedStrategy

LEVELS = ("1", "1ab", "2")
CHSH_SCENARIO = Scenario(2, 2, 2, 2)
ROUTED_SCENARIO = Scenario(4, 3, 2, 3)

SIZE_CAP = 200        # moment-matrix side cap used by the default level choice
ETA_FLOOR = 1e-2      # lower end of critical-efficiency bisections
CERT_MARGIN = 1e-6    # G below 1 - CERT_MARGIN counts as certified randomness
BISECT_TOL = 1e-4
ROW_CONSISTENCY_TOL = 1e-7
RESCUE_SHIFTS = (1e-4, 1e-5, 1e-6)  # cone slacks for boundary-degenerate re-solves
RESCUE_GAP = 1e-5     # certificate-vs-iterate slack that flags a stalled solve
RESCUE_PRES = 1e-8    # largest primal residual a rescue stage may carry

Word = tuple[tuple[tuple[int, int], ...], tuple[tuple[int, int], ...]]
IDENTITY: Word = ((), ())


class OutsideRelaxationError(ValueError):
    """The queried table admits no decomposition inside the relaxation."""


class RelaxationSolverError(RuntimeError):
    """The interior-point solve ended without a usable certificate."""


# -- words -------------------------------------------------------------------

def _reduce_seq(seq):
    out = []
    for sym in seq:
        if out and out[-1][0] == sym[0]:
            if out[-1][1] == sym[1]:
                continue          # idempotent projector
            return None           # orthogonal outcomes of one input
        out.append(sym)
    return tuple(out)


def word_mul(u: Word, v: Word) -> Word | None:
    a = _reduce_seq(u[0] + v[0])
    if a is None:
        return None
    b = _reduce_seq(u[1] + v[1])
    if b is None:
        return None
    return (a, b)


def word_adjoint(w: Word) -> Word:
    return (w[0][::-1], w[1][::-1])


def word_class(w: Word) -> Word:
    """Canonical representative shared by a word and its adjoint."""
    return min(w, word_adjoint(w))


def word_length(w: Word) -> int:
    return len(w[0]) + len(w[1])


def parse_level(level) -> str:
    txt = str(level).strip().lower().replace("+", "")
    if txt in LEVELS:
        return txt
    raise ValueError(f"unsupported relaxation level {level!r}; choose from {LEVELS}")


def _generators(s: Scenario) -> tuple[list[Word], list[Word]]:
    ga = [(((inp, o),), ())
          for inp in range(s.alice_inputs) for o in range(s.alice_outputs - 1)]
    gb = [((), ((inp, o),))
          for inp in range(s.bob_inputs) for o in range(s.bob_outputs - 1)]
    return ga, gb


def words_for_level(s: Scenario, level) -> list[Word]:
    """Deterministically ordered word list: identity, Alice singles, Bob
    singles (input-major, outcome-minor), then level-specific products in
    generator-scan order with first-occurrence dedup."""
    lv = parse_level(level)
    ga, gb = _generators(s)
    words = [IDENTITY] + ga + gb
    if lv == "1":
        return words
    if lv == "1ab":
        return words + [word_mul(a, b) for a in ga for b in gb]
    seen = set(words)
    for g in ga + gb:
        for h in ga + gb:
            w = word_mul(g, h)
            if w is None or word_length(w) < 2 or w in seen:
                continue
            seen.add(w)
            words.append(w)
    return words


# -- moment layout -----------------------------------------------------------

@dataclass
class MomentLayout:
    words: list[Word]
    side: int
    classes: list[Word]                      # representative per variable id
    var_of: dict[Word, int]
    slot_rows: np.ndarray
    slot_cols: np.ndarray
    slot_vars: np.ndarray

    def vid(self, w: Word) -> int:
        return self.var_of[word_class(w)]

    @property
    def n_vars(self) -> int:
        return len(self.classes)


def build_layout(words: list[Word]) -> MomentLayout:
    """Scan upper-triangular slots row-major; variable ids are assigned in
    first-appearance order, so the identity moment is always variable 0."""
    var_of: dict[Word, int] = {}
    classes: list[Word] = []
    rows, cols, vids = [], [], []
    adj = [word_adjoint(w) for w in words]
    for i in range(len(words)):
        for j in range(i, len(words)):
            w = word_mul(adj[i], words[j])
            if w is None:
                continue
            rep = word_class(w)
            vid = var_of.get(rep)
            if vid is None:
                vid = len(classes)
                var_of[rep] = vid
                classes.append(rep)
            rows.append(i)
            cols.append(j)
            vids.append(vid)
    return MomentLayout(words, len(words), classes, var_of,
                        np.array(rows, dtype=int), np.array(cols, dtype=int),
                        np.array(vids, dtype=int))


def _single_word(sa, sb) -> Word:
    return ((sa,) if sa is not None else (), (sb,) if sb is not None else ())


def _expansion(inp: int, out: int, n_out: int):
    """Projector expansion of one outcome; the last outcome is 1 - sum."""
    if out < n_out - 1:
        return [((inp, out), 1.0)]
    return [(None, 1.0)] + [((inp, o), -1.0) for o in range(n_out - 1)]


def behavior_rows(s: Scenario, layout: MomentLayout):
    """Per behavior entry (x, y, a, b): the sparse moment combination equal
    to p(a, b | x, y), in lexicographic entry order."""
    rows = []
    for x in range(s.alice_inputs):
        for y in range(s.bob_inputs):
            for a in range(s.alice_outputs):
                for b in range(s.bob_outputs):
                    acc: dict[int, float] = {}
                    for sa, ca in _expansion(x, a, s.alice_outputs):
                        for sb, cb in _expansion(y, b, s.bob_outputs):
                            vid = layout.vid(_single_word(sa, sb))
                            acc[vid] = acc.get(vid, 0.0) + ca * cb
                    rows.append(((x, y, a, b), sorted(acc.items())))
    return rows


@dataclass
class Relaxation:
    scenario: Scenario
    level: str
    layout: MomentLayout
    rows: list

    @property
    def n_moments(self) -> int:
        return self.layout.n_vars

    @property
    def side(self) -> int:
        return self.layout.side


@lru_cache(maxsize=8)
def _cached_relaxation(s: Scenario, lv: str) -> Relaxation:
    layout = build_layout(words_for_level(s, lv))
    return Relaxation(s, lv, layout, behavior_rows(s, layout))


def build_membership_relaxation(s: Scenario, level) -> Relaxation:
    return _cached_relaxation(s, parse_level(level))


def default_level(s: Scenario, cap: int = SIZE_CAP) -> str:
    return "2" if len(words_for_level(s, "2")) <= cap else "1ab"


def flatten_routed(table: BehaviorTable) -> np.ndarray:
    """Routed table as a flat 4-input scenario array [2*i + x, y, a, b]."""
    if table.n_outcomes != 3:
        raise ValueError("routed relaxations expect three-outcome tables")
    p = table.entries
    out = np.empty((4, 2, 3, 3))
    for i in range(2):
        for x in range(2):
            out[2 * i + x] = p[i, x]
    return out


# -- equality presolve -------------------------------------------------------

@dataclass
class PresolveResult:
    kept: list[int]
    dropped: list[tuple[int, float]]      # (row index, rhs inconsistency)

    @property
    def max_inconsistency(self) -> float:
        return max((r for _, r in self.dropped), default=0.0)


def presolve_rows(rows, n_vars: int) -> PresolveResult:
    """Drop linearly dependent equality rows, keeping the first independent
    set.  Exact rational elimination when every coefficient is integral,
    otherwise Gram-Schmidt with threshold 1e-10.  The rhs of each dropped
    row is reduced alongside; its residual measures inconsistency."""
    integral = all(float(v).is_integer() for cols, _ in rows for _, v in cols)
    if integral:
        return _presolve_rational(rows)
    return _presolve_qr(rows, n_vars)


def _presolve_rational(rows) -> PresolveResult:
    pivots: dict[int, tuple[dict[int, Fraction], float]] = {}
    kept, dropped = [], []
    for idx, (cols, rhs) in enumerate(rows):
        work = {c: Fraction(int(v)) for c, v in cols if v}
        t = float(rhs)
        while True:
            pv = min((c for c in work if c in pivots), default=None)
            if pv is None:
                break
            prow, prhs = pivots[pv]
            c = work.pop(pv)
            for cc, vv in prow.items():
                nv = work.get(cc, Fraction(0)) - c * vv
                if nv:
                    work[cc] = nv
                elif cc in work:
                    del work[cc]
            t -= float(c) * prhs
        if not work:
            dropped.append((idx, abs(t)))
            continue
        kept.append(idx)
        pc = min(work)
        lead = work.pop(pc)
        pivots[pc] = ({c: v / lead for c, v in work.items()}, t / float(lead))
    return PresolveResult(kept, dropped)


def _presolve_qr(rows, n_vars: int) -> PresolveResult:
    kept, dropped = [], []
    basis: list[tuple[np.ndarray, float]] = []
    for idx, (cols, rhs) in enumerate(rows):
        r = np.zeros(n_vars)
        for c, v in cols:
            r[c] += v
        scale = max(1.0, float(np.linalg.norm(r)))
        v, vt = r.copy(), float(rhs)
        for _ in range(2):                      # re-orthogonalize once
            for q, qt in basis:
                c = float(q @ v)
                v -= c * q
                vt -= c * qt
        nrm = float(np.linalg.norm(v))
        if nrm <= 1e-10 * scale:
            dropped.append((idx, abs(vt)))
        else:
            kept.append(idx)
            basis.append((v / nrm, vt / nrm))
    return PresolveResult(kept, dropped)


def _equality_arrays(kept_rows):
    er, ec, ev, rhs = [], [], [], []
    for r, (cols, t) in enumerate(kept_rows):
        for c, v in cols:
            er.append(r)
            ec.append(c)
            ev.append(v)
        rhs.append(t)
    return (np.array(er, dtype=int), np.array(ec, dtype=int),
            np.array(ev, dtype=float), np.array(rhs, dtype=float))


def _presolved(rows, n_vars: int):
    pre = presolve_rows(rows, n_vars)
    if pre.max_inconsistency > ROW_CONSISTENCY_TOL:
        raise OutsideRelaxationError(
            "behavior table violates a linear identity of the relaxation "
            f"by {pre.max_inconsistency:.3e}")
    return [rows[i] for i in pre.kept], pre


def _moment_block_arrays(layout: MomentLayout, offset: int):
    return (layout.slot_vars + offset, layout.slot_rows, layout.slot_cols,
            np.ones(len(layout.slot_vars)))


# -- certified bounds --------------------------------------------------------

def certified_upper(problem: ConicProblem, sol: Solution, y_bound: float = 1.0) -> dict:
    """Rigorous objective upper bound from an approximate dual solution.

    Every feasible variable of the moment programs lies in [-1, 1]: each
    diagonal moment is dominated by a shorter word's diagonal via a 2x2
    minor, down to the identity moment which the constraints pin to at most
    one.  The dual residual therefore contributes at most its l1 norm, and
    any negative part of X at most its magnitude times the cone dimension.
    """
    ing = dual_ingredients(problem, sol)
    correction = ing["rd_l1"] * y_bound + max(0.0, -ing["x_min_eig"]) * ing["cone_dim"]
    return {
        "dual_value": ing["dual_value"],
        "rd_l1": ing["rd_l1"],
        "x_min_eig": ing["x_min_eig"],
        "cone_dim": ing["cone_dim"],
        "correction": correction,
        "bound": ing["dual_value"] + correction,
    }


def _check_status(report: SolveReport, context: str):
    if report.status == "infeasible":
        raise OutsideRelaxationError(
            f"{context}: no decomposition exists inside the relaxation "
            f"(diverging dual, value {report.dual_value:.3e})")
    if report.status not in ("optimal", "near-optimal"):
        raise RelaxationSolverError(
            f"{context}: solver status {report.status}, residuals "
            f"{report.residuals}")


# -- membership --------------------------------------------------------------

@dataclass
class MembershipReport:
    t_value: float            # max t with M(y) - t I psd under the data rows
    residual: float           # max(0, -t): how far outside the cone
    status: str
    report: SolveReport
    problem: ConicProblem
    solution: Solution

    @property
    def feasible(self) -> bool:
        return self.status in ("optimal", "near-optimal") and self.residual <= 1e-7


def membership_residual(table: np.ndarray, relax: Relaxation,
                        options: SolveOptions | None = None) -> MembershipReport:
    """Largest t such that some moment completion of `table` keeps the
    moment matrix t-positive; t >= 0 certifies membership."""
    t = np.asarray(table, dtype=float)
    if t.shape != relax.scenario.table_shape:
        raise ValueError(f"table shape {t.shape} does not match "
                         f"{relax.scenario.table_shape}")
    rows = [(cols, float(t[key])) for key, cols in relax.rows]
    rows.append(([(0, 1.0)], 1.0))                       # identity moment = 1
    kept, _ = _presolved(rows, relax.n_moments)
    n = relax.n_moments
    side = relax.side
    var, br, bc, bv = _moment_block_arrays(relax.layout, 0)
    diag = np.arange(side)
    blk = SdpBlock(size=side,
                   var=np.concatenate([var, np.full(side, n)]),
                   row=np.concatenate([br, diag]),
                   col=np.concatenate([bc, diag]),
                   val=np.concatenate([bv, -np.ones(side)]))
    er, ec, ev, rhs = _equality_arrays(kept)
    obj = np.zeros(n + 1)
    obj[n] = 1.0
    prob = ConicProblem(n_vars=n + 1, objective=obj, blocks=[blk],
                        eq_row=er, eq_col=ec, eq_val=ev, eq_rhs=rhs,
                        name=f"membership-L{relax.level}")
    report, sol = solve(prob, options or SolveOptions())
    tv = report.primal_value
    return MembershipReport(tv, max(0.0, -tv), report.status, report, prob, sol)


# -- functional bounds -------------------------------------------------------

@dataclass
class NpaBound:
    bound: float              # certified upper bound on the functional
    primal: float             # achieved value of the relaxation iterate
    certificate: dict
    report: SolveReport
    problem: ConicProblem
    solution: Solution


def max_functional_upper_bound(functional: BellFunctional, s: Scenario = CHSH_SCENARIO,
                               level="1", options: SolveOptions | None = None) -> NpaBound:
    """SDP maximum of a correlator functional over the level-L relaxation;
    upper-bounds the quantum value."""
    if s.alice_outputs != 2 or s.bob_outputs != 2:
        raise ValueError("correlator functionals need dichotomic scenarios")
    relax = build_membership_relaxation(s, level)
    lay = relax.layout
    obj = np.zeros(relax.n_moments)
    joint = np.asarray(functional.joint_array(), dtype=float)
    for x in range(s.alice_inputs):
        for y in range(s.bob_inputs):
            j = joint[x, y]
            if j:
                obj[lay.vid(_single_word((x, 0), (y, 0)))] += 4.0 * j
                obj[lay.vid(_single_word((x, 0), None))] -= 2.0 * j
                obj[lay.vid(_single_word(None, (y, 0)))] -= 2.0 * j
                obj[0] += j
    for x, m in enumerate(functional.alice_marg):
        if m:
            obj[lay.vid(_single_word((x, 0), None))] += 2.0 * m
            obj[0] -= m
    for y, m in enumerate(functional.bob_marg):
        if m:
            obj[lay.vid(_single_word(None, (y, 0)))] += 2.0 * m
            obj[0] -= m
    obj[0] += functional.const
    var, br, bc, bv = _moment_block_arrays(lay, 0)
    blk = SdpBlock(size=relax.side, var=var, row=br, col=bc, val=bv)
    prob = ConicProblem(n_vars=relax.n_moments, objective=obj, blocks=[blk],
                        eq_row=np.array([0]), eq_col=np.array([0]),
                        eq_val=np.array([1.0]), eq_rhs=np.array([1.0]),
                        name=f"functional-L{relax.level}")
    report, sol = solve(prob, options or SolveOptions())
    _check_status(report, "functional bound")
    cert = certified_upper(prob, sol)
    return NpaBound(cert["bound"], report.primal_value, cert, report, prob, sol)


# -- guessing probability ----------------------------------------------------

@dataclass
class GuessingResult:
    g: float                  # reported guessing bound, in [far-mode prob, 1]
    h_min: float              # -log2(g)
    primal: float
    branch_behaviors: np.ndarray     # [branch, x, y, a, b], sums to the input
    certificate: dict         # rigorous upper bound and its ingredients; a
                              # "rescue" key records any slackened re-solve
    report: SolveReport
    problem: ConicProblem
    solution: Solution


def _far_mode(flat: np.ndarray, x: int) -> float:
    """Largest single-outcome probability of the far device at setting x.

    Copying the observed behavior into one branch per outcome is a feasible
    decomposition whenever the table lies inside the relaxation, so the
    guessing program is always worth at least this much.
    """
    return float(np.max(np.sum(flat[2 + x, 0], axis=1)))


def _boundary_rescue(prob: ConicProblem, options: SolveOptions | None):
    """Slackened re-solves for programs whose feasible matrices are all
    singular, with extrapolation back to zero slack.

    Behavior equalities at an extremal table pin the moment variables to a
    face of the cone: no interior point exists, the dual optimum is not
    attained, and path-following stalls with a loose certificate no matter
    the iteration budget.  Slacking every cone to F(y) + delta I >= 0
    restores the central path; the slackened optimum exceeds the true one by
    a*sqrt(delta) + b*delta + O(delta^1.5), so fitting the solved values at
    a few slacks against sqrt(delta) and reading off the intercept estimates
    the true value to roughly the fit order.  Iterate values are used for
    the fit (the duals stay loose at small slacks); each slackened
    certificate is still a valid upper bound for the original program
    because slacking only enlarges the feasible set.

    Returns the extrapolated value, a diagnostics dict, and the smallest
    usable slack's (report, solution, problem, certificate).
    """
    stages = []
    for delta in RESCUE_SHIFTS:
        shifted = cone_shifted(prob, delta)
        rep, sol = solve(shifted, options or SolveOptions())
        # diagonal moments of the slackened problem reach 1 + O(delta)
        cert = certified_upper(shifted, sol, y_bound=1.0 + 2.0 * delta)
        usable = (rep.status in ("optimal", "near-optimal")
                  and rep.residuals[0] <= RESCUE_PRES)
        stages.append((delta, rep, sol, shifted, cert, usable))
    used = [st for st in stages if st[-1]]
    if len(used) < 2:
        raise RelaxationSolverError(
            "slackened guessing re-solves failed: "
            + "; ".join(f"delta={st[0]:g} status={st[1].status}" for st in stages))
    roots = np.sqrt([st[0] for st in used])
    vals = np.array([st[1].primal_value for st in used])
    if np.all(np.diff(vals) <= 1e-9):
        # interpolate in sqrt(delta) and read the value at zero slack
        value = float(np.polyval(np.polyfit(roots, vals, len(used) - 1), 0.0))
    else:
        # slack values should shrink with delta; if not, skip extrapolating
        value = float(vals.min())
    rescue = {"deltas": tuple(st[0] for st in used),
              "values": tuple(float(v) for v in vals),
              "statuses": tuple(st[1].status for st in stages),
              "extrapolated": value}
    last = used[-1]
    return value, rescue, last[1], last[2], last[3], min(
        (st[4] for st in stages), key=lambda c: c["bound"])


def guessing_probability(table: BehaviorTable, x: int, level,
                         options: SolveOptions | None = None) -> GuessingResult:
    """Maximum probability that an adversary holding the branch label
    guesses the far device's outcome at setting x, over all three-branch
    decompositions of `table` with each branch inside the relaxation.

    The reported ``g`` is the certified bound when the plain solve converges
    cleanly.  Extremal tables (ideal or deterministic behaviors) leave the
    program without an interior point and the plain certificate stalls; in
    that case ``g`` comes from slackened re-solves extrapolated to zero
    slack, clamped between the far-outcome mode and the best rigorous
    certificate, which keeps exact cases (G = 1/2, G = 1) exact to the
    extrapolation error.  ``certificate["bound"]`` is always a rigorous
    upper bound on the program value.
    """
    if table.n_outcomes != 3:
        raise ValueError("guessing program expects a three-outcome table")
    if x not in (0, 1):
        raise ValueError("setting x must be 0 or 1")
    check = table.validate()
    if not check.ok:
        raise ValueError(f"behavior table fails validation: {check}")
    relax = build_membership_relaxation(ROUTED_SCENARIO, level)
    lay = relax.layout
    flat = flatten_routed(table)
    n = relax.n_moments
    rows = []
    for key, cols in relax.rows:
        spread = [(branch * n + c, v) for branch in range(3) for c, v in cols]
        rows.append((spread, float(flat[key])))
    rows.append(([(branch * n, 1.0) for branch in range(3)], 1.0))
    kept, _ = _presolved(rows, 3 * n)
    er, ec, ev, rhs = _equality_arrays(kept)
    blocks = []
    for branch in range(3):
        var, br, bc, bv = _moment_block_arrays(lay, branch * n)
        blocks.append(SdpBlock(size=relax.side, var=var, row=br, col=bc, val=bv))
    far_input = 2 + x
    obj = np.zeros(3 * n)
    for branch in range(3):
        for sym, coeff in _expansion(far_input, branch, 3):
            obj[branch * n + lay.vid(_single_word(sym, None))] += coeff
    prob = ConicProblem(n_vars=3 * n, objective=obj, blocks=blocks,
                        eq_row=er, eq_col=ec, eq_val=ev, eq_rhs=rhs,
                        name=f"guess-x{x}-L{relax.level}")
    report, sol = solve(prob, options or SolveOptions())
    if report.status == "infeasible":
        _check_status(report, "guessing program")
    cert = certified_upper(prob, sol)
    value = cert["bound"]
    stalled = (report.status not in ("optimal", "near-optimal")
               or cert["bound"] - report.primal_value > RESCUE_GAP)
    if stalled:
        value, rescue, report, sol, prob, cert2 = _boundary_rescue(prob, options)
        cert = min((cert, cert2), key=lambda c: c["bound"])
        cert = dict(cert)
        cert["rescue"] = rescue
    else:
        _check_status(report, "guessing program")
    g = min(1.0, cert["bound"], max(value, _far_mode(flat, x)))
    if g <= 0.0:
        h_min = math.inf
    else:
        h_min = 0.0 if g >= 1.0 else -math.log2(g)
    branches = np.zeros((3, 4, 2, 3, 3))
    for branch in range(3):
        for key, cols in relax.rows:
            branches[(branch, *key)] = sum(v * sol.y[branch * n + c] for c, v in cols)
    return GuessingResult(g, h_min, report.primal_value, branches, cert,
                          report, prob, sol)


def critical_eta_numeric(strategy: RoutedStrategy,
                         near: tuple[DeviceParams, DeviceParams],
                         nu_a1: float, level, x: int = 0,
                         options: SolveOptions | None = None) -> float:
    """Bisect the far-device efficiency for the G = 1 boundary of the full
    three-outcome treatment; `near` is (Alice near device, Bob device).
    Returns ETA_FLOOR when even the floor certifies, inf when nothing does.
    """
    a0, bdev = near

    def certified(eta: float) -> bool:
        devices = RoutedDeviceSet(a0, DeviceParams(eta, nu_a1), bdev)
        tab = simulate_behavior(strategy, devices)
        res = guessing_probability(tab, x, level, options)
        # gate on the rigorous certificate, not the possibly extrapolated g
        return res.certificate["bound"] < 1.0 - CERT_MARGIN

    lo, hi = ETA_FLOOR, 1.0
    if certified(lo):
        return lo
    if not certified(hi):
        return math.inf
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if certified(mid):
            hi = mid
        else:
            lo = mid
    return hi
