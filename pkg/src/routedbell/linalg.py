"""Dense complex linear algebra for small Hermitian problems.

Everything here works on plain numpy arrays (complex128, row-major).  Matrices
are deliberately capped at 64x64: the package only ever needs two-qubit
operators and small moment matrices handled elsewhere.
"""
from __future__ import annotations

import numpy as np

MAX_DIM = 64

JACOBI_THRESHOLD = 1e-14
JACOBI_MAX_SWEEPS = 100


def as_matrix(m, dim: int | None = None) -> np.ndarray:
    """Validate and return a square complex matrix (C-contiguous copy if needed)."""
    a = np.ascontiguousarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise ValueError(f"matrix dimension {a.shape[0]} exceeds supported maximum {MAX_DIM}")
    if dim is not None and a.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {a.shape[0]}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m.T)


def is_hermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(m - dagger(m))) <= tol)


def frob(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def partial_trace_first(m: np.ndarray, dims: tuple[int, int] = (2, 2)) -> np.ndarray:
    """Trace out the first tensor factor of an operator on H_1 (x) H_2."""
    d1, d2 = dims
    r = np.asarray(m, dtype=np.complex128).reshape(d1, d2, d1, d2)
    return np.einsum("ijik->jk", r)


def partial_trace_second(m: np.ndarray, dims: tuple[int, int] = (2, 2)) -> np.ndarray:
    """Trace out the second tensor factor of an operator on H_1 (x) H_2."""
    d1, d2 = dims
    r = np.asarray(m, dtype=np.complex128).reshape(d1, d2, d1, d2)
    return np.einsum("ijkj->ik", r)


def hermitian_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Spectral decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns (w, v) with eigenvalues w sorted in descending order and
    eigenvectors in the columns of v.  The rotation schedule is a fixed
    row-major cycle over the upper triangle, so results are bitwise
    reproducible for identical inputs.

    Raises ValueError if the input is not Hermitian or the off-diagonal mass
    does not fall below the fixed threshold within the sweep budget.
    """
    a = as_matrix(m)
    if not is_hermitian(a, tol=1e-10):
        raise ValueError("hermitian_eig requires a Hermitian matrix")
    n = a.shape[0]
    a = (a + dagger(a)) / 2.0
    v = np.eye(n, dtype=np.complex128)

    def max_offdiag() -> float:
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off = max(off, abs(a[p, q]))
        return off

    for _sweep in range(JACOBI_MAX_SWEEPS):
        if max_offdiag() <= JACOBI_THRESHOLD:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                beta = a[p, q]
                ab = abs(beta)
                if ab <= JACOBI_THRESHOLD:
                    continue
                phase = beta / ab
                theta = (a[q, q].real - a[p, p].real) / (2.0 * ab)
                # smaller root of t^2 - 2*theta*t - 1 = 0
                if theta >= 0.0:
                    t = -1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = 1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c * phase
                # apply G = I with block [[c, -s], [conj(s), c]] on (p, q): a <- G^dag a G
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p + np.conj(s) * col_q
                a[:, q] = -s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p + s * row_q
                a[q, :] = -np.conj(s) * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vcol_p = v[:, p].copy()
                vcol_q = v[:, q].copy()
                v[:, p] = c * vcol_p + np.conj(s) * vcol_q
                v[:, q] = -s * vcol_p + c * vcol_q
    if max_offdiag() > JACOBI_THRESHOLD:
        raise ValueError("Jacobi eigensolver failed to converge within 100 sweeps")

    w = np.real(np.diag(a))
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]
