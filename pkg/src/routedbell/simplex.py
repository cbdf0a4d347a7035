"""Phase-I revised simplex for convex-membership questions.

Small and dense on purpose: the polytopes handled here have at most ~1000
vertices, and keeping the pivoting self-contained means membership answers do
not depend on the conic solver.  Bland's rule guarantees termination; with
exact=True all arithmetic runs over Fraction and the answer is exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np


@dataclass
class FeasibilityResult:
    feasible: bool
    infeasibility: float
    weights: np.ndarray | None  # convex weights over columns when feasible
    dual: np.ndarray | None  # separating row vector (length d+1) when infeasible
    pivots: int


def _to_exact(a) -> np.ndarray:
    out = np.empty(np.shape(a), dtype=object)
    flat = out.reshape(-1)
    for k, v in enumerate(np.asarray(a, dtype=object).reshape(-1)):
        flat[k] = v if isinstance(v, Fraction) else Fraction(v)
    return out


def convex_membership(columns: np.ndarray, target: np.ndarray,
                      exact: bool = False, tol: float = 1e-9) -> FeasibilityResult:
    """Decide whether `target` is a convex combination of the given columns.

    `columns` has shape (d, n).  Returns weights on success; on failure the
    dual row y (length d+1, last entry multiplying the normalization row)
    satisfies y . [col; 1] <= tol for every column while y . [target; 1] > 0.
    """
    cols = np.asarray(columns, dtype=object if exact else float)
    tgt = np.asarray(target, dtype=object if exact else float)
    if cols.ndim != 2 or tgt.shape != (cols.shape[0],):
        raise ValueError("columns must be (d, n) and target length d")
    d, n = cols.shape
    m = d + 1
    if exact:
        a = np.empty((m, n), dtype=object)
        a[:d, :] = _to_exact(cols)
        a[d, :] = Fraction(1)
        b = np.empty(m, dtype=object)
        b[:d] = _to_exact(tgt)
        b[d] = Fraction(1)
        zero = Fraction(0)
        piv_tol = Fraction(0)
        binv = _to_exact(np.eye(m))
        dtype = object
    else:
        a = np.ones((m, n))
        a[:d, :] = cols
        b = np.concatenate([tgt, [1.0]])
        zero = 0.0
        piv_tol = tol
        binv = np.eye(m)
        dtype = float

    # Flip rows with negative right-hand side so artificials start feasible.
    flip = np.ones(m, dtype=object if exact else float)
    for r in range(m):
        if b[r] < zero:
            flip[r] = -flip[r]
            b[r] = -b[r]
            a[r, :] = -a[r, :]

    basis = list(range(n, n + m))  # artificial indices; artificials cost 1
    in_basis = np.zeros(n, dtype=bool)
    xb = b.copy()

    pivots = 0
    max_pivots = 50 * (n + m) + 1000
    while True:
        cb = np.array([1 if j >= n else 0 for j in basis], dtype=dtype)
        y = cb @ binv
        entering = -1
        for j in range(n):
            if in_basis[j]:
                continue
            rc = -(y @ a[:, j])
            if rc < -piv_tol:
                entering = j
                break
        if entering < 0:
            break
        direction = binv @ a[:, entering]
        ratio = None
        leave = -1
        for r in range(m):
            if direction[r] > piv_tol:
                cand = xb[r] / direction[r]
                if ratio is None or cand < ratio or (cand == ratio and basis[r] < basis[leave]):
                    ratio = cand
                    leave = r
        if leave < 0:
            raise RuntimeError("phase-I simplex reported an unbounded direction")
        piv = direction[leave]
        binv[leave, :] = binv[leave, :] / piv
        xb[leave] = xb[leave] / piv
        for r in range(m):
            if r != leave and direction[r] != zero:
                factor = direction[r]
                binv[r, :] = binv[r, :] - factor * binv[leave, :]
                xb[r] = xb[r] - factor * xb[leave]
        if basis[leave] < n:
            in_basis[basis[leave]] = False
        basis[leave] = entering
        in_basis[entering] = True
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("phase-I simplex exceeded its pivot budget")

    cb = np.array([1 if j >= n else 0 for j in basis], dtype=dtype)
    value = cb @ xb
    feasible = (value == zero) if exact else (float(value) <= tol)
    if feasible:
        weights = np.zeros(n, dtype=dtype)
        for r, j in enumerate(basis):
            if j < n:
                weights[j] = xb[r]
        return FeasibilityResult(True, float(value), weights, None, pivots)
    y = cb @ binv
    y = y * flip  # undo row sign flips so the dual refers to the original data
    return FeasibilityResult(False, float(value), None, np.asarray(y), pivots)
