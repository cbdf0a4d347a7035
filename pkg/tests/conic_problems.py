"""Regression suite of 25 small conic programs for the interior-point solver.

Every problem is built deterministically.  Where an entry carries an expected
optimum it comes from an independent source: a closed form, an eigenvalue or
singular-value computation, or scipy's LP solver.  Entries without an expected
value are random strictly feasible instances (Slater points planted on both
sides) whose role is to exercise status, residuals, and determinism.
"""

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from routedbell.conic import ConicProblem, SdpBlock, solve
from routedbell.localset import Scenario, chsh_coefficients, enumerate_vertices, vertex_table
from routedbell.util import make_rng


@dataclass
class SuiteEntry:
    name: str
    problem: ConicProblem
    expected: float | None
    tol: float = 1e-6


def _block(f0, slices, diag=False):
    """Assemble an SdpBlock from a dense F0 and (var, dense slice) pairs."""
    if diag:
        f0 = np.asarray(f0, dtype=float)
        size = f0.shape[0]
        keep = np.nonzero(f0)[0]
        var_l, pos_l, val_l = [], [], []
        for v, g in slices:
            g = np.asarray(g, dtype=float)
            nz = np.nonzero(g)[0]
            var_l.extend([v] * len(nz))
            pos_l.extend(nz.tolist())
            val_l.extend(g[nz].tolist())
        return SdpBlock(size=size, var=var_l, row=pos_l, col=pos_l, val=val_l,
                        const_row=keep, const_col=keep, const_val=f0[keep], diag=True)
    f0 = np.asarray(f0, dtype=float)
    size = f0.shape[0]
    r0, c0 = np.triu_indices(size)
    keep = f0[r0, c0] != 0.0
    var_l, row_l, col_l, val_l = [], [], [], []
    for v, m in slices:
        m = np.asarray(m, dtype=float)
        vals = m[r0, c0]
        nz = vals != 0.0
        var_l.extend([v] * int(np.count_nonzero(nz)))
        row_l.extend(r0[nz].tolist())
        col_l.extend(c0[nz].tolist())
        val_l.extend(vals[nz].tolist())
    return SdpBlock(size=size, var=var_l, row=row_l, col=col_l, val=val_l,
                    const_row=r0[keep], const_col=c0[keep], const_val=f0[r0, c0][keep])


def _sym(rng, n):
    m = rng.normal(size=(n, n))
    return 0.5 * (m + m.T)


def _spd(rng, n):
    a = rng.normal(size=(n, n))
    return a @ a.T / n + 0.5 * np.eye(n)


def _pair_basis(size):
    """Moment-matrix variables: one per strict upper-triangle entry."""
    pairs = [(i, j) for i in range(size) for j in range(i + 1, size)]
    slices = []
    for v, (i, j) in enumerate(pairs):
        m = np.zeros((size, size))
        m[i, j] = 1.0
        slices.append((v, m))
    return pairs, slices


def _moment_problem(name, coeff):
    """5x5 unit-diagonal moment matrix; coeff maps (row, col) to weight."""
    pairs, slices = _pair_basis(5)
    b = np.zeros(len(pairs))
    for (i, j), w in coeff.items():
        b[pairs.index((i, j))] = w
    return ConicProblem(n_vars=len(pairs), objective=b,
                        blocks=[_block(np.eye(5), slices)], name=name)


def _lambda_min_problem(name, a):
    size = a.shape[0]
    return ConicProblem(n_vars=1, objective=np.array([1.0]),
                        blocks=[_block(a, [(0, -np.eye(size))])], name=name)


def _sigma_max_problem(name, a):
    p, q = a.shape
    f0 = np.zeros((p + q, p + q))
    f0[:p, p:] = a
    f0[p:, :p] = a.T
    return ConicProblem(n_vars=1, objective=np.array([-1.0]),
                        blocks=[_block(f0, [(0, np.eye(p + q))])], name=name)


def _random_lp(name, seed, m, k):
    rng = make_rng(seed)
    gmat = rng.normal(size=(k, m))
    h = rng.uniform(1.0, 2.0, size=k)
    gmat = np.vstack([gmat, np.eye(m), -np.eye(m)])
    h = np.concatenate([h, 5.0 * np.ones(2 * m)])
    c = rng.normal(size=m)
    res = linprog(-c, A_ub=gmat, b_ub=h, bounds=(None, None), method="highs")
    assert res.success
    block = _block(h, [(i, -gmat[:, i]) for i in range(m)], diag=True)
    problem = ConicProblem(n_vars=m, objective=c, blocks=[block], name=name)
    return problem, float(c @ res.x)


def _random_sdp(name, seed, sizes, m, n_eq=0, with_diag=False):
    rng = make_rng(seed)
    y0 = rng.normal(size=m)
    b = np.zeros(m)
    blocks = []
    for n in sizes:
        fs = [(i, _sym(rng, n)) for i in range(m)]
        f0 = _spd(rng, n) - sum(y0[i] * fi for i, fi in fs)
        z0 = _spd(rng, n)
        for i, fi in fs:
            b[i] -= float(np.sum(fi * z0))
        blocks.append(_block(f0, fs))
    if with_diag:
        k = 6
        gmat = rng.normal(size=(k, m))
        f0d = rng.uniform(0.5, 1.5, size=k) - gmat @ y0
        z0 = rng.uniform(0.2, 1.0, size=k)
        b -= gmat.T @ z0
        blocks.append(_block(f0d, [(i, gmat[:, i]) for i in range(m)], diag=True))
    kwargs = {}
    if n_eq:
        emat = rng.normal(size=(n_eq, m))
        nu0 = rng.normal(size=n_eq)
        b -= emat.T @ nu0
        rows, cols = np.divmod(np.arange(n_eq * m), m)
        kwargs = dict(eq_row=rows, eq_col=cols, eq_val=emat.reshape(-1),
                      eq_rhs=emat @ y0)
    return ConicProblem(n_vars=m, objective=b, blocks=blocks, name=name, **kwargs)


def _theta_c5():
    diag_slices = []
    for i in range(5):
        m = np.zeros((5, 5))
        m[i, i] = 1.0
        diag_slices.append((i, m))
    nonedges = [(0, 2), (0, 3), (1, 3), (1, 4), (2, 4)]
    pair_slices = []
    for v, (i, j) in enumerate(nonedges):
        m = np.zeros((5, 5))
        m[i, j] = 1.0
        pair_slices.append((5 + v, m))
    b = np.array([1.0] * 5 + [2.0] * 5)
    return ConicProblem(
        n_vars=10, objective=b, blocks=[_block(np.zeros((5, 5)), diag_slices + pair_slices)],
        eq_row=np.zeros(5, dtype=int), eq_col=np.arange(5), eq_val=np.ones(5),
        eq_rhs=np.array([1.0]), name="theta_c5")


def _simplex_chsh_lp():
    s = Scenario(2, 2, 2, 2)
    coeffs = chsh_coefficients()
    values = np.array([float(np.sum(coeffs * vertex_table(v, s)))
                       for v in enumerate_vertices(s)])
    n = len(values)
    block = _block(np.zeros(n), [(j, np.eye(n)[j]) for j in range(n)], diag=True)
    return ConicProblem(n_vars=n, objective=values, blocks=[block],
                        eq_row=np.zeros(n, dtype=int), eq_col=np.arange(n),
                        eq_val=np.ones(n), eq_rhs=np.array([1.0]),
                        name="simplex_chsh_lp")


def build_suite() -> list[SuiteEntry]:
    rng = make_rng(2024)
    entries = []

    chsh_coeff = {(1, 3): 1.0, (1, 4): 1.0, (2, 3): 1.0, (2, 4): -1.0}
    entries.append(SuiteEntry("npa1_chsh", _moment_problem("npa1_chsh", chsh_coeff),
                              2.0 * np.sqrt(2.0)))
    entries.append(SuiteEntry("npa1_bias", _moment_problem("npa1_bias", {(0, 1): 1.0}), 1.0))
    marg_coeff = dict(chsh_coeff)
    marg_coeff[(0, 1)] = 0.3
    marg_coeff[(0, 4)] = 0.2
    entries.append(SuiteEntry("npa1_marginals",
                              _moment_problem("npa1_marginals", marg_coeff), None))

    entries.append(SuiteEntry("boundary_2x2", ConicProblem(
        n_vars=1, objective=np.array([1.0]),
        blocks=[_block(np.eye(2), [(0, np.array([[0.0, 1.0], [1.0, 0.0]]))])],
        name="boundary_2x2"), 1.0))

    od = np.array([[0.0, 1.0], [1.0, 0.0]])
    entries.append(SuiteEntry("eq_pinned", ConicProblem(
        n_vars=2, objective=np.array([0.0, 1.0]),
        blocks=[_block(np.eye(2), [(0, od), (1, od)])],
        eq_row=np.array([0]), eq_col=np.array([0]), eq_val=np.array([1.0]),
        eq_rhs=np.array([0.5]), name="eq_pinned"), 0.5))

    entries.append(SuiteEntry("mixed_lp_sdp", ConicProblem(
        n_vars=1, objective=np.array([1.0]),
        blocks=[_block(np.array([3.0, 5.0]), [(0, np.array([-1.0, 1.0]))], diag=True),
                _block(np.diag([4.0, 9.0]), [(0, od)])],
        name="mixed_lp_sdp"), 3.0))

    entries.append(SuiteEntry("simplex_chsh_lp", _simplex_chsh_lp(), 2.0, 1e-7))
    entries.append(SuiteEntry("theta_c5", _theta_c5(), np.sqrt(5.0)))

    for n in (6, 9, 13):
        a = _sym(rng, n)
        entries.append(SuiteEntry(f"lambda_min_{n}", _lambda_min_problem(f"lambda_min_{n}", a),
                                  float(np.linalg.eigvalsh(a)[0])))
    for p, q in ((4, 6), (7, 3)):
        a = rng.normal(size=(p, q))
        smax = float(np.linalg.svd(a, compute_uv=False)[0])
        entries.append(SuiteEntry(f"sigma_max_{p}x{q}",
                                  _sigma_max_problem(f"sigma_max_{p}x{q}", a), -smax))

    for seed, m, k in ((41, 4, 12), (42, 6, 20), (43, 8, 24), (44, 5, 40), (45, 10, 30)):
        name = f"lp_random_{m}x{k}"
        problem, expected = _random_lp(name, seed, m, k)
        entries.append(SuiteEntry(name, problem, expected, 1e-5))

    entries.append(SuiteEntry("sdp_rand_5", _random_sdp("sdp_rand_5", 51, (5,), 4), None))
    entries.append(SuiteEntry("sdp_rand_8", _random_sdp("sdp_rand_8", 52, (8,), 6), None))
    entries.append(SuiteEntry("sdp_rand_two_blocks",
                              _random_sdp("sdp_rand_two_blocks", 53, (4, 6), 5), None))
    entries.append(SuiteEntry("sdp_rand_three_blocks",
                              _random_sdp("sdp_rand_three_blocks", 54, (3, 3, 3), 6), None))
    entries.append(SuiteEntry("sdp_rand_12", _random_sdp("sdp_rand_12", 55, (12,), 8), None))
    entries.append(SuiteEntry("sdp_rand_eq", _random_sdp("sdp_rand_eq", 56, (6,), 5, n_eq=2), None))
    entries.append(SuiteEntry("sdp_rand_mixed_diag",
                              _random_sdp("sdp_rand_mixed_diag", 57, (5,), 5, with_diag=True),
                              None))
    assert len(entries) == 25
    return entries


def solve_suite(entries=None):
    if entries is None:
        entries = build_suite()
    return [(e, *solve(e.problem)) for e in entries]


def suite_hash(results) -> str:
    h = hashlib.sha256()
    for entry, report, solution in results:
        h.update(entry.name.encode())
        h.update(report.status.encode())
        h.update(np.int64(report.iterations).tobytes())
        h.update(solution.y.tobytes())
    return h.hexdigest()
