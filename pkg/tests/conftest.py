"""Shared reference matrices and random generators for the test suite."""

import numpy as np
import pytest

from vbroadcast.choi import ChoiOperator

# Minimal-trace-norm broadcaster and its orthogonal split, typed in by hand
# as plain fractions, independent of family_to_choi.
T, H = 1 / 3, 1 / 2
C_HAT = np.array(
    [
        [T, 0, 0, H, 0, H, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, T, 0, H, 0, 0, H],
        [H, 0, 0, T, 0, H, 0, 0],
        [0, 0, H, 0, T, 0, 0, H],
        [H, 0, 0, H, 0, T, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, H, 0, H, 0, 0, T],
    ],
    dtype=complex,
)

S = 1 / 6
C_PLUS = np.array(
    [
        [T, 0, 0, T, 0, T, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, T, 0, T, 0, 0, T],
        [T, 0, 0, T, 0, T, 0, 0],
        [0, 0, T, 0, T, 0, 0, T],
        [T, 0, 0, T, 0, T, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, T, 0, T, 0, 0, T],
    ],
    dtype=complex,
)
C_MINUS = np.array(
    [
        [T, 0, 0, -S, 0, -S, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, T, 0, -S, 0, 0, -S],
        [-S, 0, 0, T, 0, -S, 0, 0],
        [0, 0, -S, 0, T, 0, 0, -S],
        [-S, 0, 0, -S, 0, T, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, -S, 0, -S, 0, 0, T],
    ],
    dtype=complex,
)


def random_hermitian(rng, n=8):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def random_density(rng, n=2):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def haar_unitary(rng, n=2):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def c_hat():
    return ChoiOperator(C_HAT.copy())


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
