"""Jacobi eigensolver and partial traces against LAPACK references."""

import numpy as np
import pytest

from routedbell.linalg import (
    MAX_DIM,
    as_matrix,
    dagger,
    frob,
    hermitian_eig,
    is_hermitian,
    partial_trace_first,
    partial_trace_second,
)
from routedbell.util import make_rng


def random_hermitian(rng, n):
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (m + m.conj().T)


def test_identity_and_pauli_spectra():
    w, _ = hermitian_eig(np.eye(4, dtype=complex))
    assert np.array_equal(w, np.ones(4))
    zz = np.kron(np.diag([1.0, -1.0]), np.diag([1.0, -1.0]))
    w, v = hermitian_eig(zz.astype(complex))
    assert np.allclose(w, [1.0, 1.0, -1.0, -1.0])
    assert np.allclose(v @ np.diag(w) @ dagger(v), zz, atol=1e-13)


def test_eigensystem_matches_lapack():
    rng = make_rng(42)
    for n in (1, 2, 3, 5, 8, 13):
        for _ in range(4):
            h = random_hermitian(rng, n)
            w, v = hermitian_eig(h)
            ref = np.linalg.eigvalsh(h)[::-1]
            assert np.max(np.abs(w - ref)) < 1e-10
            assert np.max(np.abs(v @ np.diag(w) @ dagger(v) - h)) < 1e-10
            assert np.max(np.abs(dagger(v) @ v - np.eye(n))) < 1e-12
            assert np.all(np.diff(w) <= 1e-12)  # descending


def test_eigensolver_bitwise_reproducible():
    rng = make_rng(7)
    h = random_hermitian(rng, 9)
    w1, v1 = hermitian_eig(h)
    w2, v2 = hermitian_eig(h.copy())
    assert w1.tobytes() == w2.tobytes()
    assert v1.tobytes() == v2.tobytes()


def test_non_hermitian_rejected():
    with pytest.raises(ValueError):
        hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_dimension_guard():
    with pytest.raises(ValueError):
        as_matrix(np.eye(MAX_DIM + 1))
    with pytest.raises(ValueError):
        as_matrix(np.zeros((2, 3)))


def test_partial_traces_on_kron_products():
    rng = make_rng(5)
    for _ in range(6):
        a = random_hermitian(rng, 2)
        b = random_hermitian(rng, 2)
        m = np.kron(a, b)
        assert np.allclose(partial_trace_first(m), np.trace(a) * b, atol=1e-12)
        assert np.allclose(partial_trace_second(m), np.trace(b) * a, atol=1e-12)


def test_partial_traces_are_trace_preserving():
    rng = make_rng(6)
    m = random_hermitian(rng, 4)
    assert abs(np.trace(partial_trace_first(m)) - np.trace(m)) < 1e-12
    assert abs(np.trace(partial_trace_second(m)) - np.trace(m)) < 1e-12


def test_hermitian_check_and_norm():
    rng = make_rng(8)
    h = random_hermitian(rng, 3)
    assert is_hermitian(h)
    assert not is_hermitian(h + 1e-6 * np.array([[0, 1j, 0], [0, 0, 0], [0, 0, 0]]))
    assert abs(frob(h) - np.linalg.norm(h)) < 1e-14
