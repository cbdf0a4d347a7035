"""Self-contained interior-point solver for small block-diagonal matrix cones.

Problem form (maximization over free variables y):

    maximize    objective . y
    subject to  A y = b
                F0_k + sum_i y_i F_ik  positive semidefinite, per block k

A block may be declared diagonal, which turns its cone into elementwise
nonnegativity (a linear-programming block).  The algorithm is an
infeasible-start primal-dual path follower with the HKM linearization,
Mehrotra predictor-corrector steps, independent primal and dual step lengths,
and a 0.98 fraction-to-boundary rule.  All linear algebra is dense; intended
problem sizes are a few hundred constraint rows and matrix sides up to ~200.

The normal (Schur) matrix decomposes into independent groups when blocks do
not share variables; each group is factored separately and the equality
multipliers are recovered through a small bordered system.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-7
MAX_ITERATIONS = 200
FRACTION_TO_BOUNDARY = 0.98


@dataclass
class SdpBlock:
    """One cone block: F0 plus the sparse slices of every variable.

    Entries are stored upper-triangular (row <= col) and applied
    symmetrically without halving: a triplet (v, i, j, w) means
    F_v[i, j] = F_v[j, i] = w.

    When ``proj`` is set (a size-by-r matrix with orthonormal columns) the
    cone constraint applies to the compressed matrix ``proj.T M proj``
    rather than to M itself.  Compressing is a relaxation: it discards the
    cone constraint along the dropped directions, so any dual certificate of
    the compressed problem lifts to a valid certificate of the full one.
    It is the standard facial-reduction device for problems whose feasible
    matrices are all singular and which therefore admit no interior point.
    """

    size: int
    var: np.ndarray
    row: np.ndarray
    col: np.ndarray
    val: np.ndarray
    const_row: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    const_col: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    const_val: np.ndarray = field(default_factory=lambda: np.zeros(0))
    diag: bool = False
    proj: np.ndarray | None = None

    def __post_init__(self):
        self.var = np.asarray(self.var, dtype=int)
        self.row = np.asarray(self.row, dtype=int)
        self.col = np.asarray(self.col, dtype=int)
        self.val = np.asarray(self.val, dtype=float)
        self.const_row = np.asarray(self.const_row, dtype=int)
        self.const_col = np.asarray(self.const_col, dtype=int)
        self.const_val = np.asarray(self.const_val, dtype=float)
        if not (len(self.var) == len(self.row) == len(self.col) == len(self.val)):
            raise ValueError("block triplet arrays must share a length")
        if np.any(self.row > self.col):
            raise ValueError("block entries must satisfy row <= col")
        if self.diag and np.any(self.row != self.col):
            raise ValueError("diagonal blocks admit only diagonal entries")
        if self.proj is not None:
            self.proj = np.asarray(self.proj, dtype=float)
            if self.diag:
                raise ValueError("compression is only supported for dense blocks")
            if self.proj.ndim != 2 or self.proj.shape[0] != self.size:
                raise ValueError("proj must be a size-by-r matrix")
            if not 0 < self.proj.shape[1] <= self.size:
                raise ValueError("proj must keep between 1 and size columns")


@dataclass
class ConicProblem:
    n_vars: int
    objective: np.ndarray
    blocks: list[SdpBlock]
    eq_row: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    eq_col: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    eq_val: np.ndarray = field(default_factory=lambda: np.zeros(0))
    eq_rhs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    name: str = ""

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        if self.objective.shape != (self.n_vars,):
            raise ValueError("objective length must equal n_vars")
        self.eq_row = np.asarray(self.eq_row, dtype=int)
        self.eq_col = np.asarray(self.eq_col, dtype=int)
        self.eq_val = np.asarray(self.eq_val, dtype=float)
        self.eq_rhs = np.asarray(self.eq_rhs, dtype=float)

    @property
    def n_eq(self) -> int:
        return self.eq_rhs.shape[0]

    def eq_matrix(self) -> np.ndarray:
        a = np.zeros((self.n_eq, self.n_vars))
        np.add.at(a, (self.eq_row, self.eq_col), self.eq_val)
        return a


@dataclass
class SolveOptions:
    tol: float = DEFAULT_TOL
    max_iters: int = MAX_ITERATIONS
    tau: float = FRACTION_TO_BOUNDARY
    init_scale: float | None = None
    infeas_threshold: float = 1e8
    chunk_budget: int = 8_000_000  # Schur assembly scratch entries per slab
    near_factor: float = 1000.0


@dataclass
class SolveReport:
    primal_value: float
    dual_value: float
    status: str  # optimal | near-optimal | infeasible | numerical-failure
    iterations: int
    residuals: tuple[float, float, float]  # (primal-feas, dual-feas, gap)
    log: list[tuple] = field(default_factory=list)


@dataclass
class Solution:
    y: np.ndarray
    nu: np.ndarray
    s_blocks: list[np.ndarray]
    x_blocks: list[np.ndarray]


def log_to_csv(report: SolveReport, path) -> None:
    with open(path, "w") as fh:
        fh.write("iter,mu,gap,pres,dres,step_p,step_d\n")
        for rowvals in report.log:
            fh.write(",".join(format(v, ".10g") for v in rowvals) + "\n")


def cone_shifted(problem: ConicProblem, delta: float) -> ConicProblem:
    """Copy of the problem with every cone slackened to F(y) + delta I >= 0.

    Slackening only enlarges the feasible set, so the shifted optimum and any
    dual bound certified for the shifted problem remain valid upper bounds for
    the original maximization.  Whenever the original is feasible the shifted
    problem is strictly feasible, which restores the central path on instances
    whose feasible matrices are all singular.
    """
    if delta < 0:
        raise ValueError("shift must be nonnegative")
    blocks = []
    for blk in problem.blocks:
        if blk.diag:
            dense = np.zeros(blk.size)
            np.add.at(dense, blk.const_row, blk.const_val)
            dense += delta
            idx = np.arange(blk.size)
            blocks.append(SdpBlock(size=blk.size, var=blk.var, row=blk.row,
                                   col=blk.col, val=blk.val, const_row=idx,
                                   const_col=idx, const_val=dense, diag=True))
        else:
            dense = np.zeros((blk.size, blk.size))
            dense[blk.const_row, blk.const_col] = blk.const_val
            dense[blk.const_col, blk.const_row] = blk.const_val
            dense += delta * np.eye(blk.size)
            iu, ju = np.nonzero(np.triu(dense))
            blocks.append(SdpBlock(size=blk.size, var=blk.var, row=blk.row,
                                   col=blk.col, val=blk.val, const_row=iu,
                                   const_col=ju, const_val=dense[iu, ju],
                                   proj=blk.proj))
    name = f"{problem.name}+{delta:g}I" if problem.name else f"shift+{delta:g}I"
    return ConicProblem(n_vars=problem.n_vars, objective=problem.objective,
                        blocks=blocks, eq_row=problem.eq_row,
                        eq_col=problem.eq_col, eq_val=problem.eq_val,
                        eq_rhs=problem.eq_rhs, name=name)


# -- dense triangular kernels ------------------------------------------------

def _forward(lower: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    z = np.array(rhs, dtype=float)
    for i in range(lower.shape[0]):
        if i:
            z[i] -= lower[i, :i] @ z[:i]
        z[i] /= lower[i, i]
    return z


def _backward(lower: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    z = np.array(rhs, dtype=float)
    n = lower.shape[0]
    for i in range(n - 1, -1, -1):
        if i < n - 1:
            z[i] -= lower[i + 1:, i] @ z[i + 1:]
        z[i] /= lower[i, i]
    return z


def _chol_solve(lower: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return _backward(lower, _forward(lower, rhs))


# -- per-block workspace -----------------------------------------------------

class _BlockWork:
    """Precomputed index machinery for one block.

    Holds the fully mirrored entry list sorted by variable, the constant
    matrix, flattened scatter indices, and the chunk plan for Schur assembly.
    """

    def __init__(self, blk: SdpBlock, chunk_budget: int):
        self.size = blk.size
        self.diag = blk.diag
        self.proj = blk.proj
        self.psd_size = blk.size if blk.proj is None else blk.proj.shape[1]
        s = blk.size
        off = blk.row < blk.col
        fvar = np.concatenate([blk.var, blk.var[off]])
        fp = np.concatenate([blk.row, blk.col[off]])
        fq = np.concatenate([blk.col, blk.row[off]])
        fu = np.concatenate([blk.val, blk.val[off]])
        order = np.argsort(fvar, kind="stable")
        self.fvar = fvar[order]
        self.fp = fp[order]
        self.fq = fq[order]
        self.fu = fu[order]
        self.uvars, self.starts = np.unique(self.fvar, return_index=True)
        self.locs = np.searchsorted(self.uvars, self.fvar)
        if self.diag:
            self.flat = self.fp
            self.const = np.zeros(s)
            np.add.at(self.const, blk.const_row, blk.const_val)
            # with at most one variable per dimension the Schur contribution
            # is diagonal and the dense scratch matrix can be skipped
            self.simple_diag = np.unique(self.fp).size == len(self.fp)
        else:
            self.flat = self.fp * s + self.fq
            self.const = np.zeros((s, s))
            for i, j, v in zip(blk.const_row, blk.const_col, blk.const_val):
                self.const[i, j] = v
                self.const[j, i] = v
        if self.proj is None:
            self.const_red = self.const
        else:
            self.const_red = self.proj.T @ self.const @ self.proj
        # chunk plan: contiguous runs of whole variable groups bounded by budget
        n_entries = len(self.fvar)
        per_row = max(n_entries, 1)
        self.chunks = []
        vs = 0
        while vs < len(self.uvars):
            ve = vs
            while ve < len(self.uvars):
                ee = self.starts[ve + 1] if ve + 1 < len(self.uvars) else n_entries
                es = self.starts[vs]
                if ve > vs and (ee - es) * per_row > chunk_budget:
                    break
                ve += 1
            ee = self.starts[ve] if ve < len(self.uvars) else n_entries
            self.chunks.append((vs, ve, self.starts[vs], ee))
            vs = ve

    def assemble(self, y: np.ndarray) -> np.ndarray:
        """F0 + sum_i y_i F_i for this block, compressed when proj is set."""
        out = self.const.copy()
        np.add.at(out.reshape(-1), self.flat, y[self.fvar] * self.fu)
        if self.proj is not None:
            out = self.proj.T @ out @ self.proj
        return out

    def lift(self, m: np.ndarray) -> np.ndarray:
        """Expand a compressed cone matrix back to full block coordinates."""
        if self.proj is None:
            return m
        return self.proj @ m @ self.proj.T

    def gather(self, m: np.ndarray, out: np.ndarray) -> None:
        """out_i += <F_i, m> for every variable; m in full block coordinates."""
        if self.diag:
            vals = self.fu * m[self.fp]
        else:
            vals = self.fu * m[self.fq, self.fp]
        np.add.at(out, self.fvar, vals)

    def const_inner(self, m: np.ndarray) -> float:
        """<F0, m> with m in full block coordinates."""
        return float(np.sum(self.const * m))

    def schur(self, sinv: np.ndarray, x: np.ndarray, bmat: np.ndarray,
              rows_loc: np.ndarray) -> None:
        """bmat[group rows, group rows] += Tr(F_i Sinv F_j X) for the block vars.

        rows_loc maps this block's sorted variables to group-local indices.
        """
        if self.diag:
            if self.simple_diag:
                contrib = np.zeros(len(self.uvars))
                np.add.at(contrib, self.locs,
                          self.fu * self.fu * (x * sinv)[self.fp])
                bmat[rows_loc, rows_loc] += contrib
                return
            vals = self.fu * np.sqrt(x * sinv)[self.fp]
            nv = len(self.uvars)
            m = np.zeros((self.size, nv))
            np.add.at(m, (self.fp, self.locs), vals)
            bmat[np.ix_(rows_loc, rows_loc)] += m.T @ m
            return
        col_starts = self.starts
        for vs, ve, es, ee in self.chunks:
            sg = np.take(sinv[self.fq[es:ee]], self.fp, axis=1)
            xg = np.take(x[self.fp[es:ee]], self.fq, axis=1)
            sg *= xg
            del xg
            sg *= self.fu[es:ee, None]
            sg *= self.fu[None, :]
            red = np.add.reduceat(sg, col_starts, axis=1)
            del sg
            red = np.add.reduceat(red, self.starts[vs:ve] - es, axis=0)
            bmat[np.ix_(rows_loc[vs:ve], rows_loc)] += red


def _variable_groups(problem: ConicProblem) -> list[np.ndarray]:
    """Partition variables into groups of blocks linked by shared variables."""
    n_blocks = len(problem.blocks)
    parent = list(range(n_blocks))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner = {}
    for k, blk in enumerate(problem.blocks):
        for v in np.unique(blk.var):
            v = int(v)
            if v in owner:
                parent[find(k)] = find(owner[v])
            else:
                owner[v] = k
    missing = set(range(problem.n_vars)) - set(owner)
    if missing:
        raise ValueError(f"variables missing from every block: {sorted(missing)[:5]}")
    groups: dict[int, set] = {}
    for v, k in owner.items():
        groups.setdefault(find(k), set()).add(v)
    return [np.array(sorted(g), dtype=int) for _, g in sorted(groups.items())]


def _alpha_full(smat: np.ndarray, ds: np.ndarray) -> float:
    lower = np.linalg.cholesky(smat)
    w = _forward(lower, ds)
    m = _forward(lower, w.T)
    lam = float(np.linalg.eigvalsh(0.5 * (m + m.T)).min())
    if lam >= -1e-14:
        return 1.0
    return min(1.0, -1.0 / lam)


def _alpha_diag(svec: np.ndarray, ds: np.ndarray) -> float:
    neg = ds < 0.0
    if not np.any(neg):
        return 1.0
    return float(min(1.0, np.min(-svec[neg] / ds[neg])))


def _right_divide(mat: np.ndarray, lower: np.ndarray) -> np.ndarray:
    """mat @ S^{-1} through triangular solves, S = lower lower^T."""
    return _backward(lower, _forward(lower, mat.T)).T


def solve(problem: ConicProblem, opts: SolveOptions | None = None
          ) -> tuple[SolveReport, Solution]:
    """Run the path-following iteration on one problem instance."""
    opts = opts or SolveOptions()
    n = problem.n_vars
    m_eq = problem.n_eq
    c = problem.objective
    amat = problem.eq_matrix()
    b = problem.eq_rhs
    works = [_BlockWork(blk, opts.chunk_budget) for blk in problem.blocks]
    groups = _variable_groups(problem)
    glocs = []  # per block: (group index, positions of its vars inside the group)
    for blk, wk in zip(problem.blocks, works):
        gi = next(i for i, g in enumerate(groups) if wk.uvars[0] in set(g.tolist()))
        glocs.append((gi, np.searchsorted(groups[gi], wk.uvars)))
    a_groups = [amat[:, g] for g in groups]

    total_dim = sum(w.psd_size for w in works)
    data_scale = max(
        1.0,
        float(np.max(np.abs(b))) if m_eq else 0.0,
        float(np.max(np.abs(c))) if n else 0.0,
        max(float(np.max(np.abs(w.const))) if w.const.size else 0.0 for w in works),
    )
    lam = opts.init_scale if opts.init_scale is not None else 10.0 * data_scale

    y = np.zeros(n)
    nu = np.zeros(m_eq)
    s_blocks = [lam * (np.ones(w.size) if w.diag else np.eye(w.psd_size))
                for w in works]
    x_blocks = [lam * (np.ones(w.size) if w.diag else np.eye(w.psd_size))
                for w in works]

    bden = 1.0 + (float(np.max(np.abs(b))) if m_eq else 0.0)
    cden = 1.0 + (float(np.max(np.abs(c))) if n else 0.0)

    log: list[tuple] = []
    step_p = step_d = 0.0
    it = 0
    stall = 0
    diverged = False
    best = None  # (score, (pres, dres, gapval), pval, dval, snapshot)

    def residual_state():
        r_s = [w.assemble(y) - s for w, s in zip(works, s_blocks)]
        r_eq = b - amat @ y
        astar = np.zeros(n)
        for w, x in zip(works, x_blocks):
            w.gather(w.lift(x), astar)
        r_d = c - (amat.T @ nu if m_eq else 0.0) + astar
        p = float(c @ y)
        d = float(b @ nu) + sum(
            w.const_inner(w.lift(x)) for w, x in zip(works, x_blocks))
        mu = sum(float(np.sum(x * s)) for x, s in zip(x_blocks, s_blocks)) / total_dim
        rs_inf = max((float(np.max(np.abs(r))) if r.size else 0.0) for r in r_s)
        pr = max(float(np.max(np.abs(r_eq))) if m_eq else 0.0, rs_inf) / bden
        dr = float(np.max(np.abs(r_d))) / cden if n else 0.0
        return r_s, r_eq, r_d, p, d, mu, pr, dr

    def snapshot():
        return (y.copy(), nu.copy(), [s.copy() for s in s_blocks],
                [x.copy() for x in x_blocks])

    try:
        for it in range(1, opts.max_iters + 1):
            r_s, r_eq, r_d, pval, dval, mu, pres, dres = residual_state()
            gapval = abs(dval - pval)
            log.append((it - 1, mu, gapval, pres, dres, step_p, step_d))
            score = max(pres, dres, gapval / (1.0 + abs(pval)))
            if best is None or score < best[0]:
                best = (score, (pres, dres, gapval), pval, dval, snapshot())
            if pres <= opts.tol and dres <= opts.tol and gapval <= opts.tol * (1.0 + abs(pval)):
                break
            if dval < -opts.infeas_threshold * data_scale and dres <= 1e-4:
                diverged = True
                break
            if stall >= 3:
                break

            sinvs, s_lowers = [], []
            for w, s in zip(works, s_blocks):
                if w.diag:
                    sinvs.append(1.0 / s)
                    s_lowers.append(None)
                else:
                    lower = np.linalg.cholesky(s)
                    s_lowers.append(lower)
                    eye = np.eye(w.psd_size)
                    sinvs.append(_backward(lower, _forward(lower, eye)))
            b_groups = [np.zeros((len(g), len(g))) for g in groups]
            for w, sinv, x, (gi, locs) in zip(works, sinvs, x_blocks, glocs):
                w.schur(w.lift(sinv), w.lift(x), b_groups[gi], locs)
            lowers = []
            for bg in b_groups:
                bg += bg.T  # roundoff in chunked assembly leaves a tiny skew part
                bg *= 0.5
                scale = max(1.0, float(np.max(np.diag(bg))))
                for jitter in (0.0, 1e-13, 1e-10, 1e-7):
                    try:
                        lowers.append(np.linalg.cholesky(
                            bg + jitter * scale * np.eye(bg.shape[0]) if jitter else bg))
                        break
                    except np.linalg.LinAlgError:
                        if jitter == 1e-7:
                            raise

            za_cache: list = [None] * len(groups)

            def bordered_once(rhs_full, rp_vec):
                dy = np.zeros(n)
                if m_eq:
                    meq = np.zeros((m_eq, m_eq))
                    veq = -rp_vec.astype(float)
                    zr = []
                    for gi, g in enumerate(groups):
                        if za_cache[gi] is None:
                            za_cache[gi] = _chol_solve(lowers[gi], a_groups[gi].T)
                        z = _chol_solve(lowers[gi], rhs_full[g])
                        zr.append(z)
                        meq += a_groups[gi] @ za_cache[gi]
                        veq += a_groups[gi] @ z
                    dnu = np.linalg.solve(meq, veq)
                    for gi, g in enumerate(groups):
                        dy[g] = zr[gi] - za_cache[gi] @ dnu
                else:
                    dnu = np.zeros(0)
                    for gi, g in enumerate(groups):
                        dy[g] = _chol_solve(lowers[gi], rhs_full[g])
                return dy, dnu

            def solve_newton(rhs_full, rp_vec):
                dy, dnu = bordered_once(rhs_full, rp_vec)
                # one refinement round against the assembled normal matrix
                rr = rhs_full.copy()
                for gi, g in enumerate(groups):
                    rr[g] -= b_groups[gi] @ dy[g]
                if m_eq:
                    rr -= amat.T @ dnu
                    re = rp_vec - amat @ dy
                else:
                    re = np.zeros(0)
                ey, enu = bordered_once(rr, re)
                return dy + ey, dnu + enu

            def direction(r_mats):
                rhs = r_d.copy()
                for w, sinv, slo, x, rs, rm in zip(works, sinvs, s_lowers,
                                                   x_blocks, r_s, r_mats):
                    if w.diag:
                        t = (rm - x * rs) * sinv
                    else:
                        t = _right_divide(rm - x @ rs, slo)
                    w.gather(w.lift(t), rhs)
                dy, dnu = solve_newton(rhs, r_eq)
                ds_list, dx_list = [], []
                for w, sinv, slo, x, rs, rm in zip(works, sinvs, s_lowers,
                                                   x_blocks, r_s, r_mats):
                    ds = w.assemble(dy) - w.const_red + rs
                    if w.diag:
                        dx = (rm - x * ds) * sinv
                    else:
                        dx = _right_divide(rm - x @ ds, slo)
                        dx = 0.5 * (dx + dx.T)
                    ds_list.append(ds)
                    dx_list.append(dx)
                return dy, dnu, ds_list, dx_list

            r_aff = [(-x * s if w.diag else -x @ s)
                     for w, x, s in zip(works, x_blocks, s_blocks)]
            dy_a, dnu_a, ds_a, dx_a = direction(r_aff)
            ap = opts.tau * min(_alpha_diag(s, ds) if w.diag else _alpha_full(s, ds)
                                for w, s, ds in zip(works, s_blocks, ds_a))
            ad = opts.tau * min(_alpha_diag(x, dx) if w.diag else _alpha_full(x, dx)
                                for w, x, dx in zip(works, x_blocks, dx_a))
            mu_aff = sum(
                float(np.sum((x + ad * dx) * (s + ap * ds)))
                for x, dx, s, ds in zip(x_blocks, dx_a, s_blocks, ds_a)
            ) / total_dim
            sigma = min(1.0, max(0.0, (max(mu_aff, 0.0) / mu) ** 3))

            r_cor = []
            for w, x, s, dx, ds in zip(works, x_blocks, s_blocks, dx_a, ds_a):
                if w.diag:
                    r_cor.append(sigma * mu - x * s - dx * ds)
                else:
                    r_cor.append(sigma * mu * np.eye(w.psd_size) - x @ s - dx @ ds)
            dy, dnu, ds_list, dx_list = direction(r_cor)
            step_p = opts.tau * min(_alpha_diag(s, ds) if w.diag else _alpha_full(s, ds)
                                    for w, s, ds in zip(works, s_blocks, ds_list))
            step_d = opts.tau * min(_alpha_diag(x, dx) if w.diag else _alpha_full(x, dx)
                                    for w, x, dx in zip(works, x_blocks, dx_list))
            y += step_p * dy
            nu += step_d * dnu
            for k, w in enumerate(works):
                s_blocks[k] = s_blocks[k] + step_p * ds_list[k]
                x_blocks[k] = x_blocks[k] + step_d * dx_list[k]
            stall = stall + 1 if max(step_p, step_d) < 1e-8 else 0
        else:
            r_s, r_eq, r_d, pval, dval, mu, pres, dres = residual_state()
            gapval = abs(dval - pval)
            score = max(pres, dres, gapval / (1.0 + abs(pval)))
            if best is None or score < best[0]:
                best = (score, (pres, dres, gapval), pval, dval, snapshot())
    except np.linalg.LinAlgError:
        pass

    if diverged:
        report = SolveReport(float(c @ y), float(b @ nu) + sum(
            w.const_inner(w.lift(x)) for w, x in zip(works, x_blocks)),
            "infeasible", it, (np.inf, np.inf, np.inf), log)
        return report, Solution(y.copy(), nu.copy(), [s.copy() for s in s_blocks],
                                [x.copy() for x in x_blocks])
    if best is None:
        return (SolveReport(0.0, 0.0, "numerical-failure", it,
                            (np.inf, np.inf, np.inf), log),
                Solution(y, nu, s_blocks, x_blocks))
    _, (pres, dres, gapval), pval, dval, (by, bnu, bs, bx) = best
    if pres <= opts.tol and dres <= opts.tol and gapval <= opts.tol * (1.0 + abs(pval)):
        status = "optimal"
    else:
        status = _closeness_status(opts, pres, dres, gapval, pval)
    report = SolveReport(pval, dval, status, it, (pres, dres, gapval), log)
    return report, Solution(by, bnu, bs, bx)


def _closeness_status(opts: SolveOptions, pres, dres, gapval, pval) -> str:
    loose = opts.tol * opts.near_factor
    if pres <= loose and dres <= loose and gapval <= loose * (1.0 + abs(pval)):
        return "near-optimal"
    return "numerical-failure"


def solve_hsd(problem: ConicProblem, opts: SolveOptions | None = None
              ) -> tuple[SolveReport, Solution]:
    """Path follower on the homogeneous self-dual embedding.

    Unlike :func:`solve`, the embedding always contains a strictly interior
    point, so problems whose feasible matrices are all singular (no Slater
    point) still converge: the homogenizing variable tau stays positive for
    solvable instances and the scaled iterate (y, nu, X, S)/tau approaches an
    optimal pair even when the plain path follower stalls.  The returned
    solution uses the same conventions as :func:`solve`, so replay and
    certificate helpers apply unchanged.
    """
    opts = opts or SolveOptions()
    n = problem.n_vars
    m_eq = problem.n_eq
    chat = -problem.objective  # internal minimization copy
    amat = problem.eq_matrix()
    b = problem.eq_rhs
    works = [_BlockWork(blk, opts.chunk_budget) for blk in problem.blocks]
    groups = _variable_groups(problem)
    glocs = []
    for blk, wk in zip(problem.blocks, works):
        gi = next(i for i, g in enumerate(groups) if wk.uvars[0] in set(g.tolist()))
        glocs.append((gi, np.searchsorted(groups[gi], wk.uvars)))
    a_groups = [amat[:, g] for g in groups]

    total_dim = sum(w.psd_size for w in works)
    bden = 1.0 + (float(np.max(np.abs(b))) if m_eq else 0.0)
    cden = 1.0 + (float(np.max(np.abs(chat))) if n else 0.0)

    y = np.zeros(n)
    nuh = np.zeros(m_eq)
    s_blocks = [np.ones(w.size) if w.diag else np.eye(w.psd_size) for w in works]
    x_blocks = [np.ones(w.size) if w.diag else np.eye(w.psd_size) for w in works]
    tau = 1.0
    kappa = 1.0

    def adj_f(mats, out):
        for w, m in zip(works, mats):
            w.gather(w.lift(m), out)

    def f0_inner(mats) -> float:
        return sum(
            float(np.sum(w.const_red * m)) for w, m in zip(works, mats))

    def lin_part(vec):
        return [w.assemble(vec) - w.const_red for w in works]

    log: list[tuple] = []
    it = 0
    stall = 0
    best = None
    step = 0.0

    def scaled_state():
        rp = amat @ y - b * tau
        lin = lin_part(y)
        rc = [li + w.const_red * tau - s for w, li, s in zip(works, lin, s_blocks)]
        rd = (amat.T @ nuh if m_eq else np.zeros(n)) - chat * tau
        adj_f(x_blocks, rd)
        pval = float(-chat @ y) / tau
        dval = -(float(b @ nuh) - f0_inner(x_blocks)) / tau
        rc_inf = max((float(np.max(np.abs(r))) if r.size else 0.0) for r in rc)
        pres = max(float(np.max(np.abs(rp))) if m_eq else 0.0, rc_inf) / (tau * bden)
        dres = float(np.max(np.abs(rd))) / (tau * cden) if n else 0.0
        mu = (sum(float(np.sum(x * s)) for x, s in zip(x_blocks, s_blocks))
              + tau * kappa) / (total_dim + 1)
        return rp, rc, rd, pval, dval, mu, pres, dres

    def snapshot():
        return (y / tau, -nuh / tau, [s / tau for s in s_blocks],
                [x / tau for x in x_blocks])

    status = "numerical-failure"
    try:
        for it in range(1, opts.max_iters + 1):
            rp, rc, rd, pval, dval, mu, pres, dres = scaled_state()
            gapval = abs(dval - pval)
            log.append((it - 1, mu, gapval, pres, dres, step, tau))
            score = max(pres, dres, gapval / (1.0 + abs(pval)))
            if best is None or score < best[0]:
                best = (score, (pres, dres, gapval), pval, dval, snapshot())
            if (pres <= opts.tol and dres <= opts.tol
                    and gapval <= opts.tol * (1.0 + abs(pval))):
                break
            if tau <= 1e-12 * max(1.0, kappa):
                status = "infeasible"
                break
            if stall >= 3:
                break

            sinvs, s_lowers = [], []
            for w, s in zip(works, s_blocks):
                if w.diag:
                    sinvs.append(1.0 / s)
                    s_lowers.append(None)
                else:
                    lower = np.linalg.cholesky(s)
                    s_lowers.append(lower)
                    sinvs.append(_backward(lower, _forward(lower, np.eye(w.psd_size))))
            b_groups = [np.zeros((len(g), len(g))) for g in groups]
            for w, sinv, x, (gi, locs) in zip(works, sinvs, x_blocks, glocs):
                w.schur(w.lift(sinv), w.lift(x), b_groups[gi], locs)
            lowers = []
            for bg in b_groups:
                bg += bg.T
                bg *= 0.5
                scale = max(1.0, float(np.max(np.diag(bg))))
                for jitter in (0.0, 1e-13, 1e-10, 1e-7):
                    try:
                        lowers.append(np.linalg.cholesky(
                            bg + jitter * scale * np.eye(bg.shape[0]) if jitter else bg))
                        break
                    except np.linalg.LinAlgError:
                        if jitter == 1e-7:
                            raise

            def b_solve(vec):
                out = np.empty_like(vec)
                for gi, g in enumerate(groups):
                    out[g] = _chol_solve(lowers[gi], vec[g])
                    # one refinement round against the assembled normal matrix
                    resid = vec[g] - b_groups[gi] @ out[g]
                    out[g] += _chol_solve(lowers[gi], resid)
                return out

            # h = adj(F X F0 Sinv), h0 = <F0, X F0 Sinv>
            h = np.zeros(n)
            h0 = 0.0
            th_list = []
            for w, sinv, slo, x in zip(works, sinvs, s_lowers, x_blocks):
                if w.diag:
                    th = x * w.const_red * sinv
                else:
                    th = _right_divide(x @ w.const_red, slo)
                th_list.append(th)
                w.gather(w.lift(th), h)
                h0 += float(np.sum(w.const_red * th))

            b_solve_cols = None
            if m_eq:
                b_solve_cols = np.stack([b_solve(amat[r]) for r in range(m_eq)],
                                        axis=1)
            col_tau = b_solve(chat + h)
            hc = h - chat

            def direction(r_mats, rm_tau):
                # eliminate dX = (Rm - X dS) Sinv and dkappa, then dy, leaving
                # a dense bordered system in (dnu, dtau)
                v3 = rd.copy()
                sr = 0.0
                f0xrc = 0.0
                for w, sinv, slo, x, rcb, rm in zip(works, sinvs, s_lowers,
                                                    x_blocks, rc, r_mats):
                    if w.diag:
                        t = (rm - x * rcb) * sinv
                        u = x * rcb * sinv
                    else:
                        t = _right_divide(rm - x @ rcb, slo)
                        u = _right_divide(x @ rcb, slo)
                    w.gather(w.lift(t), v3)
                    sr += float(np.sum(w.const_red * (t + u)))
                    f0xrc += float(np.sum(w.const_red * u))
                rg = float(b @ nuh) - f0_inner(x_blocks) - float(chat @ y) - kappa
                v4 = -rg + sr - f0xrc + rm_tau / tau
                rhs_y = b_solve(v3)
                hm = np.zeros((m_eq + 1, m_eq + 1))
                vv = np.zeros(m_eq + 1)
                if m_eq:
                    hm[:m_eq, :m_eq] = amat @ b_solve_cols
                    hm[:m_eq, m_eq] = -(amat @ col_tau) - b
                    vv[:m_eq] = -rp - amat @ rhs_y
                    hm[m_eq, :m_eq] = b + b_solve_cols.T @ hc
                hm[m_eq, m_eq] = (h0 + kappa / tau) - float(hc @ col_tau)
                vv[m_eq] = v4 - float(hc @ rhs_y)
                sol_border = np.linalg.solve(hm, vv)
                dnu = sol_border[:m_eq]
                dtau = float(sol_border[m_eq])
                dy = rhs_y - col_tau * dtau
                if m_eq:
                    dy += b_solve_cols @ dnu
                dkappa = (rm_tau - kappa * dtau) / tau
                ds_list, dx_list = [], []
                for w, sinv, slo, x, rcb, rm in zip(works, sinvs, s_lowers,
                                                    x_blocks, rc, r_mats):
                    ds = (w.assemble(dy) - w.const_red) + w.const_red * dtau + rcb
                    if w.diag:
                        dx = (rm - x * ds) * sinv
                    else:
                        dx = _right_divide(rm - x @ ds, slo)
                        dx = 0.5 * (dx + dx.T)
                    ds_list.append(ds)
                    dx_list.append(dx)
                return dy, dnu, dtau, dkappa, ds_list, dx_list

            r_aff = [(-x * s if w.diag else -x @ s)
                     for w, x, s in zip(works, x_blocks, s_blocks)]
            aff = direction(r_aff, -tau * kappa)
            dy_a, dnu_a, dtau_a, dkap_a, ds_a, dx_a = aff
            alphas = [1.0]
            for w, s, ds, x, dx in zip(works, s_blocks, ds_a, x_blocks, dx_a):
                alphas.append(_alpha_diag(s, ds) if w.diag else _alpha_full(s, ds))
                alphas.append(_alpha_diag(x, dx) if w.diag else _alpha_full(x, dx))
            if dtau_a < 0:
                alphas.append(-tau / dtau_a)
            if dkap_a < 0:
                alphas.append(-kappa / dkap_a)
            a_aff = opts.tau * min(alphas)
            mu_aff = (sum(
                float(np.sum((x + a_aff * dx) * (s + a_aff * ds)))
                for x, dx, s, ds in zip(x_blocks, dx_a, s_blocks, ds_a))
                + (tau + a_aff * dtau_a) * (kappa + a_aff * dkap_a)
            ) / (total_dim + 1)
            sigma = min(1.0, max(0.0, (max(mu_aff, 0.0) / mu) ** 3))

            r_cor = []
            for w, x, s, dx, ds in zip(works, x_blocks, s_blocks, dx_a, ds_a):
                if w.diag:
                    r_cor.append(sigma * mu - x * s - dx * ds)
                else:
                    r_cor.append(sigma * mu * np.eye(w.psd_size) - x @ s - dx @ ds)
            rm_tau = sigma * mu - tau * kappa - dtau_a * dkap_a
            dy, dnu, dtau, dkappa, ds_list, dx_list = direction(r_cor, rm_tau)
            alphas = [1.0]
            for w, s, ds, x, dx in zip(works, s_blocks, ds_list, x_blocks, dx_list):
                alphas.append(_alpha_diag(s, ds) if w.diag else _alpha_full(s, ds))
                alphas.append(_alpha_diag(x, dx) if w.diag else _alpha_full(x, dx))
            if dtau < 0:
                alphas.append(-tau / dtau)
            if dkappa < 0:
                alphas.append(-kappa / dkappa)
            step = opts.tau * min(alphas)
            y += step * dy
            nuh += step * dnu
            tau += step * dtau
            kappa += step * dkappa
            for k, w in enumerate(works):
                s_blocks[k] = s_blocks[k] + step * ds_list[k]
                x_blocks[k] = x_blocks[k] + step * dx_list[k]
            stall = stall + 1 if step < 1e-8 else 0
        else:
            rp, rc, rd, pval, dval, mu, pres, dres = scaled_state()
            gapval = abs(dval - pval)
            score = max(pres, dres, gapval / (1.0 + abs(pval)))
            if best is None or score < best[0]:
                best = (score, (pres, dres, gapval), pval, dval, snapshot())
    except np.linalg.LinAlgError:
        pass

    if status == "infeasible":
        report = SolveReport(0.0, 0.0, "infeasible", it,
                             (np.inf, np.inf, np.inf), log)
        return report, Solution(*snapshot())
    if best is None:
        return (SolveReport(0.0, 0.0, "numerical-failure", it,
                            (np.inf, np.inf, np.inf), log),
                Solution(y, np.zeros(m_eq), s_blocks, x_blocks))
    _, (pres, dres, gapval), pval, dval, snap = best
    if pres <= opts.tol and dres <= opts.tol and gapval <= opts.tol * (1.0 + abs(pval)):
        status = "optimal"
    else:
        status = _closeness_status(opts, pres, dres, gapval, pval)
    report = SolveReport(pval, dval, status, it, (pres, dres, gapval), log)
    return report, Solution(*snap)


def dual_ingredients(problem: ConicProblem, sol: Solution) -> dict:
    """Raw pieces of a dual bound certificate, recomputed from problem data.

    Returns the dual objective, the elementwise dual residual
    c - A^T nu + adj(F) X, the most negative eigenvalue over the X blocks,
    and the total cone dimension.  Callers that know a bound on the feasible
    primal variables can turn these into a rigorous objective bound.

    Compressed blocks report their full size in cone_dim: the compressed
    slack satisfies tr(P^T M P) <= tr(M) <= size whenever the diagonal of
    the feasible M is bounded by one, so full size remains a valid trace
    bound for the eigenvalue correction term.
    """
    works = [_BlockWork(blk, 10**7) for blk in problem.blocks]
    astar = np.zeros(problem.n_vars)
    for w, x in zip(works, sol.x_blocks):
        w.gather(w.lift(x), astar)
    rd = problem.objective + astar
    if problem.n_eq:
        rd = rd - problem.eq_matrix().T @ sol.nu
    dval = float(problem.eq_rhs @ sol.nu) if problem.n_eq else 0.0
    dval += sum(w.const_inner(w.lift(x)) for w, x in zip(works, sol.x_blocks))
    x_min = 0.0
    for w, x in zip(works, sol.x_blocks):
        if x.size == 0:
            continue
        low = float(np.min(x)) if w.diag else float(np.linalg.eigvalsh(x).min())
        x_min = min(x_min, low)
    return {
        "dual_value": dval,
        "rd": rd,
        "rd_l1": float(np.sum(np.abs(rd))),
        "x_min_eig": x_min,
        "cone_dim": int(sum(w.size for w in works)),
    }


def replay_residuals(problem: ConicProblem, sol: Solution) -> tuple[float, float, float]:
    """Recompute feasibility residuals and gap from a returned solution alone."""
    works = [_BlockWork(blk, 10**7) for blk in problem.blocks]
    amat = problem.eq_matrix()
    r_eq = problem.eq_rhs - amat @ sol.y
    rs = max(
        (float(np.max(np.abs(w.assemble(sol.y) - s))) if s.size else 0.0)
        for w, s in zip(works, sol.s_blocks)
    )
    bden = 1.0 + (float(np.max(np.abs(problem.eq_rhs))) if problem.n_eq else 0.0)
    cden = 1.0 + (float(np.max(np.abs(problem.objective))) if problem.n_vars else 0.0)
    pres = max(float(np.max(np.abs(r_eq))) if problem.n_eq else 0.0, rs) / bden
    astar = np.zeros(problem.n_vars)
    for w, x in zip(works, sol.x_blocks):
        w.gather(w.lift(x), astar)
    r_d = problem.objective - (amat.T @ sol.nu if problem.n_eq else 0.0) + astar
    dres = float(np.max(np.abs(r_d))) / cden
    pval = float(problem.objective @ sol.y)
    dval = float(problem.eq_rhs @ sol.nu) + sum(
        w.const_inner(w.lift(x)) for w, x in zip(works, sol.x_blocks)
    )
    return pres, dres, abs(dval - pval)
