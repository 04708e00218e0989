"""Small dense complex linear algebra.

Matrices are plain ``numpy`` complex arrays. Every function returns a fresh
array and never mutates its arguments.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-10

# off-diagonal Frobenius mass at which a Jacobi sweep is considered converged
JACOBI_OFF_TOL = 1e-14
JACOBI_MAX_SWEEPS = 64

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)


class DimensionError(ValueError):
    """Operand shapes are incompatible with the requested operation."""


class NotHermitianError(ValueError):
    """A Hermitian operand was required."""


def as_matrix(m) -> np.ndarray:
    """Copy ``m`` into a finite square complex128 array."""
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def ket(*bits: int) -> np.ndarray:
    """Computational basis vector |b1 b2 ...>."""
    idx = 0
    for b in bits:
        idx = 2 * idx + int(b)
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[idx] = 1.0
    return v


def projector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def kron(a: np.ndarray, b: np.ndarray, *rest: np.ndarray) -> np.ndarray:
    out = np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    for r in rest:
        out = np.kron(out, np.asarray(r, dtype=complex))
    return out


def partial_trace(m: np.ndarray, dims: Sequence[int], traced: Iterable[int]) -> np.ndarray:
    """Trace out the subsystems listed in ``traced``.

    Subsystems are indexed from 1 (leftmost tensor factor) to ``len(dims)``.
    Tracing every subsystem returns a 1x1 matrix holding the full trace.
    """
    m = np.asarray(m, dtype=complex)
    dims = [int(d) for d in dims]
    n = len(dims)
    traced = sorted(set(int(t) for t in traced))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if int(np.prod(dims)) != m.shape[0]:
        raise DimensionError(f"subsystem dims {dims} do not match matrix dimension {m.shape[0]}")
    for t in traced:
        if not 1 <= t <= n:
            raise DimensionError(f"subsystem index {t} out of range 1..{n}")

    t = m.reshape(dims + dims)
    kept = [k for k in range(n) if k + 1 not in traced]
    # einsum labels: row axes a.., column axes A..; traced axes share a label
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for k in range(n):
        if k not in kept:
            col[k] = row[k]
    out_labels = "".join(row[k] for k in kept) + "".join(col[k] for k in kept)
    res = np.einsum("".join(row) + "".join(col) + "->" + out_labels, t)
    d_kept = int(np.prod([dims[k] for k in kept])) if kept else 1
    return np.ascontiguousarray(res.reshape(d_kept, d_kept))


def is_hermitian(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - dagger(m)), initial=0.0) <= tol)


def _jacobi_rotate(a: np.ndarray, v: np.ndarray, p: int, q: int, skip: float) -> None:
    apq = a[p, q]
    r = abs(apq)
    if r <= skip:
        # too small to matter for convergence; rotating would overflow theta
        return
    phase = apq / r  # e^{i alpha}
    theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    # G = diag-phase . real rotation, acting on the (p, q) plane
    g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex)
    cols = a[:, [p, q]] @ g
    a[:, p], a[:, q] = cols[:, 0], cols[:, 1]
    rows = dagger(g) @ a[[p, q], :]
    a[p, :], a[q, :] = rows[0], rows[1]
    a[p, q] = a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real
    vc = v[:, [p, q]] @ g
    v[:, p], v[:, q] = vc[:, 0], vc[:, 1]


def hermitian_eig(m: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.

    Returns ``(eigenvalues, V)`` with eigenvalues sorted in descending order and
    the columns of ``V`` the matching orthonormal eigenvectors, so that
    ``m == V @ diag(eigenvalues) @ V^dagger``.
    """
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        raise NotHermitianError("hermitian_eig requires a Hermitian matrix")
    a = (m + dagger(m)) / 2
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    skip = JACOBI_OFF_TOL * scale / (2 * n)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < JACOBI_OFF_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _jacobi_rotate(a, v, p, q, skip)
    w = np.diag(a).real.copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def trace_norm(m: np.ndarray) -> float:
    """Sum of singular values; for Hermitian input, the sum of |eigenvalues|."""
    m = np.asarray(m, dtype=complex)
    if is_hermitian(m, 1e-13):
        return float(np.sum(np.abs(np.linalg.eigvalsh((m + dagger(m)) / 2))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def trace_norms(stack: np.ndarray) -> np.ndarray:
    """Trace norms of a stack of Hermitian matrices with shape (..., n, n)."""
    stack = np.asarray(stack, dtype=complex)
    herm = (stack + np.conj(np.swapaxes(stack, -1, -2))) / 2
    return np.sum(np.abs(np.linalg.eigvalsh(herm)), axis=-1)


def is_psd(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, tol):
        return False
    return bool(np.min(np.linalg.eigvalsh((m + dagger(m)) / 2)) >= -tol)
