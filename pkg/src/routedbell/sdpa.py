"""SDPA sparse-format export and import for conic problems.

The ".dat-s" layout: comment lines starting with `*` or `"`, then the number
of variables, the number of blocks, the block-size list (negative sizes mean
diagonal blocks), the objective row, and one `matno block i j value` line per
nonzero with 1-based upper-triangular indices.  matno 0 holds the constant
matrix.

SDPA states problems as  min c.x  with  X = sum_k x_k F_k - F0  PSD, while
this package maximizes  objective.y  with  F0 + sum y_k F_k  PSD, so the
writer negates both the objective row and the constant matrices.  Equality
rows have no native slot in the format; each row a.y = b is emitted as a pair
of opposing 1x1 diagonal inequalities appended as a final diagonal block.
Reading such a file back therefore yields an inequality-form problem; the
pairing is a documented export convention, not a lossless round trip of the
equality structure.
"""
from __future__ import annotations

import numpy as np

from .conic import ConicProblem, SdpBlock
from .util import fmt17


def write_dats(problem: ConicProblem, path, comments: tuple[str, ...] = ()) -> None:
    if any(blk.proj is not None for blk in problem.blocks):
        raise ValueError("compressed blocks have no sparse exchange encoding")
    m_eq = problem.n_eq
    sizes = [(-blk.size if blk.diag else blk.size) for blk in problem.blocks]
    if m_eq:
        sizes.append(-2 * m_eq)
    with open(path, "w") as fh:
        for line in comments:
            fh.write(f"* {line}\n")
        fh.write(f"{problem.n_vars}\n")
        fh.write(f"{len(sizes)}\n")
        fh.write("{" + ", ".join(str(s) for s in sizes) + "}\n")
        fh.write(" ".join(fmt17(-v) for v in problem.objective) + "\n")
        for bi, blk in enumerate(problem.blocks, start=1):
            for i, j, v in zip(blk.const_row, blk.const_col, blk.const_val):
                if v != 0.0:
                    fh.write(f"0 {bi} {i + 1} {j + 1} {fmt17(-v)}\n")
            for k, i, j, v in zip(blk.var, blk.row, blk.col, blk.val):
                if v != 0.0:
                    fh.write(f"{k + 1} {bi} {i + 1} {j + 1} {fmt17(v)}\n")
        if m_eq:
            bi = len(sizes)
            for r, rhs in enumerate(problem.eq_rhs):
                if rhs != 0.0:
                    fh.write(f"0 {bi} {2 * r + 1} {2 * r + 1} {fmt17(rhs)}\n")
                    fh.write(f"0 {bi} {2 * r + 2} {2 * r + 2} {fmt17(-rhs)}\n")
            for rr, cc, vv in zip(problem.eq_row, problem.eq_col, problem.eq_val):
                if vv != 0.0:
                    fh.write(f"{cc + 1} {bi} {2 * rr + 1} {2 * rr + 1} {fmt17(vv)}\n")
                    fh.write(f"{cc + 1} {bi} {2 * rr + 2} {2 * rr + 2} {fmt17(-vv)}\n")


def _tokens(line: str) -> list[str]:
    for ch in "{}(),":
        line = line.replace(ch, " ")
    return line.split()


def read_dats(path) -> ConicProblem:
    """Parse a sparse SDPA file into the package's maximization form."""
    with open(path) as fh:
        lines = [ln for ln in fh
                 if ln.strip() and not ln.lstrip().startswith(("*", '"'))]
    n_vars = int(_tokens(lines[0])[0])
    n_blocks = int(_tokens(lines[1])[0])
    sizes = [int(t) for t in _tokens(lines[2])]
    if len(sizes) != n_blocks:
        raise ValueError(f"block list has {len(sizes)} sizes, header says {n_blocks}")
    objective = -np.array([float(t) for t in _tokens(lines[3])])
    if objective.shape != (n_vars,):
        raise ValueError("objective row length does not match variable count")
    entries: list[list[list]] = [[[], [], [], []] for _ in range(n_blocks)]
    consts: list[list[list]] = [[[], [], []] for _ in range(n_blocks)]
    for ln in lines[4:]:
        t = _tokens(ln)
        if len(t) != 5:
            raise ValueError(f"malformed entry line: {ln.strip()}")
        k, bi, i, j, v = int(t[0]), int(t[1]), int(t[2]), int(t[3]), float(t[4])
        if not 1 <= bi <= n_blocks:
            raise ValueError(f"block index {bi} out of range")
        if i > j:
            i, j = j, i
        if k == 0:
            consts[bi - 1][0].append(i - 1)
            consts[bi - 1][1].append(j - 1)
            consts[bi - 1][2].append(-v)
        else:
            if not 1 <= k <= n_vars:
                raise ValueError(f"variable index {k} out of range")
            entries[bi - 1][0].append(k - 1)
            entries[bi - 1][1].append(i - 1)
            entries[bi - 1][2].append(j - 1)
            entries[bi - 1][3].append(v)
    blocks = []
    for sz, ent, con in zip(sizes, entries, consts):
        blocks.append(SdpBlock(
            size=abs(sz), diag=sz < 0,
            var=np.array(ent[0], dtype=int), row=np.array(ent[1], dtype=int),
            col=np.array(ent[2], dtype=int), val=np.array(ent[3]),
            const_row=np.array(con[0], dtype=int), const_col=np.array(con[1], dtype=int),
            const_val=np.array(con[2]),
        ))
    return ConicProblem(n_vars=n_vars, objective=objective, blocks=blocks)


def write_solution_file(path, y: np.ndarray, comments: tuple[str, ...] = ()) -> None:
    """Variable vector in the `xVec = {...}` style used by SDPA outputs."""
    with open(path, "w") as fh:
        for line in comments:
            fh.write(f"* {line}\n")
        fh.write("xVec = {" + ", ".join(fmt17(v) for v in np.asarray(y)) + "}\n")


def read_solution_file(path) -> np.ndarray:
    text = open(path).read()
    marker = text.find("xVec")
    if marker >= 0:
        start = text.index("{", marker)
        end = text.index("}", start)
        body = text[start + 1:end]
    else:
        body = " ".join(ln for ln in text.splitlines()
                        if ln.strip() and not ln.lstrip().startswith(("*", '"')))
    vals = [float(t) for t in _tokens(body)]
    return np.array(vals)


def replay_solution(problem: ConicProblem, y: np.ndarray) -> dict:
    """Recheck a variable vector against the problem data.

    Returns the objective, the worst equality violation, and the minimum
    eigenvalue (or diagonal entry) per block, so certificates can be verified
    without trusting any solver's report.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (problem.n_vars,):
        raise ValueError("solution length does not match the variable count")
    out = {"objective": float(problem.objective @ y)}
    if problem.n_eq:
        out["eq_residual"] = float(np.max(np.abs(problem.eq_matrix() @ y - problem.eq_rhs)))
    else:
        out["eq_residual"] = 0.0
    min_eigs = []
    for blk in problem.blocks:
        s = np.zeros(blk.size) if blk.diag else np.zeros((blk.size, blk.size))
        if blk.diag:
            np.add.at(s, blk.const_row, blk.const_val)
            np.add.at(s, blk.row, y[blk.var] * blk.val)
            min_eigs.append(float(np.min(s)) if blk.size else 0.0)
        else:
            for i, j, v in zip(blk.const_row, blk.const_col, blk.const_val):
                s[i, j] += v
                if i != j:
                    s[j, i] += v
            for k, i, j, v in zip(blk.var, blk.row, blk.col, blk.val):
                s[i, j] += y[k] * v
                if i != j:
                    s[j, i] += y[k] * v
            min_eigs.append(float(np.linalg.eigvalsh(s).min()))
    out["min_eigs"] = min_eigs
    out["psd_violation"] = float(max(0.0, -min(min_eigs))) if min_eigs else 0.0
    return out
