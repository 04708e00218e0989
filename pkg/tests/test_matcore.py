import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vbroadcast.matcore import (
    I2,
    KET_MINUS,
    KET_PLUS,
    SX,
    SZ,
    DimensionError,
    NotHermitianError,
    hermitian_eig,
    is_hermitian,
    is_psd,
    ket,
    kron,
    partial_trace,
    projector,
    trace_norm,
    trace_norms,
)

from conftest import C_HAT, C_MINUS, haar_unitary, random_hermitian


def test_kron_identity():
    assert np.allclose(kron(I2, I2), np.eye(4))


def test_kron_diagonal():
    assert np.allclose(kron(SZ, SZ), np.diag([1, -1, -1, 1]))


def test_kron_bit_flip():
    assert np.allclose(kron(SX, SX) @ ket(0, 0), ket(1, 1))


def test_kron_variadic_matches_nested():
    a, b, c = SX, SZ, I2
    assert np.allclose(kron(a, b, c), np.kron(np.kron(a, b), c))


def test_partial_trace_identity():
    assert np.allclose(partial_trace(np.eye(4), [2, 2], {2}), 2 * np.eye(2))


def test_partial_trace_product():
    assert np.allclose(partial_trace(projector(ket(0, 1)), [2, 2], {1}), projector(ket(1)))


def test_partial_trace_outputs_of_broadcaster():
    assert np.allclose(partial_trace(C_HAT, [2, 2, 2], {1, 2}), np.eye(2), atol=1e-15)


def test_partial_trace_all_gives_trace(rng):
    m = random_hermitian(rng)
    out = partial_trace(m, [2, 2, 2], {1, 2, 3})
    assert out.shape == (1, 1)
    assert np.isclose(out[0, 0], np.trace(m))


def test_partial_trace_against_loop(rng):
    m = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    t = m.reshape(2, 3, 2, 2, 3, 2)
    expected = np.zeros((4, 4), dtype=complex)
    for b in range(3):
        expected += t[:, b, :, :, b, :].reshape(4, 4)
    assert np.allclose(partial_trace(m, [2, 3, 2], {2}), expected)


@pytest.mark.parametrize(
    "dims, traced",
    [([2, 2], {3}), ([2, 3], {1}), ([2, 2], {0})],
)
def test_partial_trace_errors(dims, traced):
    with pytest.raises(DimensionError):
        partial_trace(np.eye(4), dims, traced)


def test_eig_pauli_z():
    w, _ = hermitian_eig(SZ)
    assert np.allclose(w, [1, -1])


def test_eig_pauli_x_vectors():
    w, v = hermitian_eig(SX)
    assert np.allclose(w, [1, -1])
    assert np.isclose(abs(np.vdot(v[:, 0], KET_PLUS)), 1)
    assert np.isclose(abs(np.vdot(v[:, 1], KET_MINUS)), 1)


def test_eig_broadcaster_abs_sum():
    w, _ = hermitian_eig(C_HAT)
    assert np.isclose(np.sum(np.abs(w)), 10 / 3, atol=1e-12)


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("n", [2, 3, 5, 8, 16])
def test_eig_matches_lapack(rng, n):
    m = random_hermitian(rng, n)
    w, v = hermitian_eig(m)
    assert np.allclose(w, np.sort(np.linalg.eigvalsh(m))[::-1], atol=1e-12)
    assert np.allclose(v @ np.diag(w) @ v.conj().T, m, atol=1e-12)
    assert np.allclose(v.conj().T @ v, np.eye(n), atol=1e-12)


def test_eig_degenerate(rng):
    u = haar_unitary(rng, 4)
    m = u @ np.diag([2.0, 2.0, -1.0, -1.0]) @ u.conj().T
    w, v = hermitian_eig(m)
    assert np.allclose(w, [2, 2, -1, -1], atol=1e-12)
    assert np.allclose(v @ np.diag(w) @ v.conj().T, m, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (2, 6, 6), elements=st.floats(-10, 10)))
def test_eig_reconstructs(parts):
    a = parts[0] + 1j * parts[1]
    m = (a + a.conj().T) / 2
    w, v = hermitian_eig(m)
    assert np.all(np.diff(w) <= 1e-12)
    assert np.allclose(v @ np.diag(w) @ v.conj().T, m, atol=1e-10)


def test_trace_norm_diag():
    assert np.isclose(trace_norm(np.diag([1, -2])), 3)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_trace_norm_unitary(rng, d):
    assert np.isclose(trace_norm(haar_unitary(rng, d)), d)


def test_trace_norm_broadcaster():
    assert np.isclose(trace_norm(C_HAT), 10 / 3, atol=1e-13)


def test_trace_norms_batched(rng):
    stack = np.array([random_hermitian(rng, 4) for _ in range(5)])
    assert np.allclose(trace_norms(stack), [trace_norm(m) for m in stack])


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (2, 4, 4), elements=st.floats(-5, 5)))
def test_trace_norm_triangle(parts):
    a = parts[0] + 1j * parts[1]
    b = a.conj().T @ a
    assert trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-9


def test_predicates_identity():
    assert is_hermitian(np.eye(3)) and is_psd(np.eye(3))


def test_negative_part_is_psd():
    assert is_psd(C_MINUS)


def test_broadcaster_hermitian_not_psd():
    assert is_hermitian(C_HAT)
    assert not is_psd(C_HAT)
    assert np.min(np.linalg.eigvalsh(C_HAT)) < 0


def test_predicates_non_square():
    assert not is_hermitian(np.ones((2, 3)))
    assert not is_psd(np.ones((2, 3)))
