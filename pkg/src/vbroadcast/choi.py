"""Choi operators of linear maps on qubits.

Convention: ``C = sum_ij B(|i><j|) (x) |i><j|`` with the output factors first
and the input factor last, so that ``B(rho) = Tr_in[(1 (x) rho^T) C]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .matcore import (
    DEFAULT_TOL,
    I2,
    KET_MINUS,
    KET_PLUS,
    SX,
    SY,
    DimensionError,
    as_matrix,
    is_hermitian,
    is_psd,
    kron,
    partial_trace,
    projector,
)


@dataclass(frozen=True, eq=False)
class ChoiOperator:
    matrix: np.ndarray
    dim_in: int = 2
    dims_out: tuple[int, ...] = (2, 2)

    def __post_init__(self):
        m = as_matrix(self.matrix)
        dims_out = tuple(int(d) for d in self.dims_out)
        expected = int(self.dim_in) * int(np.prod(dims_out))
        if m.shape[0] != expected:
            raise DimensionError(
                f"Choi matrix of size {m.shape[0]} does not match dim_in={self.dim_in}, dims_out={dims_out}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims_out", dims_out)
        object.__setattr__(self, "dim_in", int(self.dim_in))

    @property
    def dims(self) -> list[int]:
        return [*self.dims_out, self.dim_in]

    @property
    def dim_out(self) -> int:
        return int(np.prod(self.dims_out))

    def __add__(self, other: "ChoiOperator") -> "ChoiOperator":
        _check_same_shape(self, other)
        return self.with_matrix(self.matrix + other.matrix)

    def __sub__(self, other: "ChoiOperator") -> "ChoiOperator":
        _check_same_shape(self, other)
        return self.with_matrix(self.matrix - other.matrix)

    def __mul__(self, scalar) -> "ChoiOperator":
        return self.with_matrix(scalar * self.matrix)

    __rmul__ = __mul__

    def with_matrix(self, m: np.ndarray) -> "ChoiOperator":
        return ChoiOperator(m, self.dim_in, self.dims_out)

    def to_dict(self) -> dict:
        return {
            "dim_in": self.dim_in,
            "dims_out": list(self.dims_out),
            "re": self.matrix.real.tolist(),
            "im": self.matrix.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChoiOperator":
        try:
            re = np.asarray(d["re"], dtype=float)
            im = np.asarray(d["im"], dtype=float)
            dim_in = int(d["dim_in"])
            dims_out = tuple(int(x) for x in d["dims_out"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed Choi JSON: {exc}") from exc
        if re.shape != im.shape:
            raise ValueError("malformed Choi JSON: 're' and 'im' shapes differ")
        return cls(re + 1j * im, dim_in, dims_out)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "ChoiOperator":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed Choi JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise ValueError("malformed Choi JSON: expected an object")
        return cls.from_dict(d)


def _check_same_shape(a: ChoiOperator, b: ChoiOperator) -> None:
    if a.dim_in != b.dim_in or a.dims_out != b.dims_out:
        raise DimensionError("Choi operators act between different spaces")


@dataclass(frozen=True)
class EquatorialState:
    """Qubit state 1/2 (1 + r cos(phi) X + r sin(phi) Y)."""

    r: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"Bloch radius must lie in [0, 1], got {self.r}")
        object.__setattr__(self, "phi", float(self.phi) % (2 * math.pi))

    @property
    def matrix(self) -> np.ndarray:
        return 0.5 * (I2 + self.r * math.cos(self.phi) * SX + self.r * math.sin(self.phi) * SY)

    def to_dict(self) -> dict:
        return {"r": self.r, "phi": self.phi}


def matrix_units(d: int) -> list[tuple[int, int, np.ndarray]]:
    units = []
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            units.append((i, j, e))
    return units


def choi_from_map(
    fn: Callable[[np.ndarray], np.ndarray], dim_in: int = 2, dims_out: Sequence[int] = (2, 2)
) -> ChoiOperator:
    """Build the Choi operator of ``fn`` from its action on matrix units."""
    d_out = int(np.prod(dims_out))
    c = np.zeros((d_out * dim_in, d_out * dim_in), dtype=complex)
    for _, _, e in matrix_units(dim_in):
        c += kron(np.asarray(fn(e), dtype=complex).reshape(d_out, d_out), e)
    return ChoiOperator(c, dim_in, tuple(dims_out))


def apply_map(c: ChoiOperator, rho: np.ndarray) -> np.ndarray:
    """Evaluate B(rho) = Tr_in[(1 (x) rho^T) C]."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (c.dim_in, c.dim_in):
        raise DimensionError(f"input must be {c.dim_in}x{c.dim_in}, got {rho.shape}")
    t = c.matrix.reshape(c.dim_out, c.dim_in, c.dim_out, c.dim_in)
    # sum_{l,m} C[(a,l),(b,m)] rho^T[m,l] = sum C[(a,l),(b,m)] rho[l,m]
    return np.einsum("albm,lm->ab", t, rho)


def marginal(c: ChoiOperator, rho: np.ndarray, keep: int) -> np.ndarray:
    """Reduced state of output ``keep`` (1 or 2) of a 1->2 map."""
    if tuple(c.dims_out) != (2, 2):
        raise DimensionError("marginal is defined for maps with two qubit outputs")
    if keep not in (1, 2):
        raise ValueError(f"output index must be 1 or 2, got {keep}")
    out = apply_map(c, rho)
    return partial_trace(out, [2, 2], [3 - keep])


def output_trace(c: ChoiOperator) -> np.ndarray:
    """Tr over all output factors; equals the identity for TP maps."""
    n = len(c.dims_out)
    return partial_trace(c.matrix, c.dims, range(1, n + 1))


def is_tp(c: ChoiOperator, tol: float = DEFAULT_TOL) -> bool:
    return bool(np.max(np.abs(output_trace(c) - np.eye(c.dim_in))) <= tol)


def is_hp(c: ChoiOperator, tol: float = DEFAULT_TOL) -> bool:
    return is_hermitian(c.matrix, tol)


def is_cp(c: ChoiOperator, tol: float = DEFAULT_TOL) -> bool:
    return is_psd(c.matrix, tol)


def is_cptp(c: ChoiOperator, tol: float = DEFAULT_TOL) -> bool:
    return is_cp(c, tol) and is_tp(c, tol)


def _check_basis(basis: Sequence[np.ndarray], tol: float) -> list[np.ndarray]:
    vecs = [np.asarray(b, dtype=complex).reshape(-1) for b in basis]
    if len(vecs) != 2 or any(v.shape != (2,) for v in vecs):
        raise DimensionError("a qubit basis needs exactly two 2-vectors")
    gram = np.array([[np.vdot(u, v) for v in vecs] for u in vecs])
    if np.max(np.abs(gram - np.eye(2))) > tol:
        raise ValueError("basis is not orthonormal")
    return vecs


PM_BASIS = (KET_PLUS, KET_MINUS)


def decohere(basis: Sequence[np.ndarray] = PM_BASIS, tol: float = DEFAULT_TOL) -> ChoiOperator:
    """Completely dephasing channel in ``basis``."""
    projs = [projector(v) for v in _check_basis(basis, tol)]
    return choi_from_map(lambda rho: sum(p @ rho @ p for p in projs), 2, (2,))


def classical_broadcaster(basis: Sequence[np.ndarray] = PM_BASIS, tol: float = DEFAULT_TOL) -> ChoiOperator:
    """B_cl(|i><j|) = delta_ij |ii><ii| with |i> running over ``basis``."""
    vecs = _check_basis(basis, tol)

    def fn(rho):
        return sum(np.vdot(v, rho @ v) * projector(kron(v, v)) for v in vecs)

    return choi_from_map(fn, 2, (2, 2))


def identity_channel(d: int = 2) -> ChoiOperator:
    return choi_from_map(lambda rho: rho, d, (d,))


def compose_local(c: ChoiOperator, post: ChoiOperator | None = None, pre: ChoiOperator | None = None) -> ChoiOperator:
    """Choi of (post (x) post) o B o pre for qubit channels ``post`` and ``pre``."""

    def fn(rho):
        x = apply_map(pre, rho) if pre is not None else rho
        y = apply_map(c, x)
        if post is None:
            return y
        # apply the single-qubit channel on each output factor independently
        post2 = ChoiOperator(_local_product_choi(post), 4, (4,))
        return apply_map(post2, y)

    return choi_from_map(fn, c.dim_in, c.dims_out)


def _local_product_choi(ch: ChoiOperator) -> np.ndarray:
    """Choi of ch (x) ch on two qubits, in the (out1 out2, in1 in2) ordering."""
    c = ch.matrix.reshape(2, 2, 2, 2)  # (o, i, o', i')
    both = np.einsum("aibj,ckdl->acikbdjl", c, c).reshape(16, 16)
    return both
