"""Group averages that enforce PHASE, FLIP, PERM (and full unitary covariance).

All twirls act on Choi operators of 1->2 qubit maps by conjugation with
``U (x) U (x) U*``, matching the output-output-input tensor ordering.

Why four phase points suffice: on the basis vector |jkl> the operator
U_phi (x) U_phi (x) U_phi* acts as exp(i(j+k-l)phi), with j+k-l in {-1,0,1,2}.
A matrix element therefore picks up exp(i n phi) with |n| <= 3, and the mean of
exp(i n phi) over the fourth roots of unity vanishes for every n in 1..3. The
4-point average is thus exactly the continuous U(1) average.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass
from functools import lru_cache

import numpy as np

from .choi import ChoiOperator
from .matcore import DEFAULT_TOL, I2, SX, dagger, kron

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PHASE_S = np.diag([1, 1j]).astype(complex)


class FamilyResidualError(ValueError):
    """A Choi operator does not lie in the symmetric six-parameter family."""


def _check_broadcast_shape(c: ChoiOperator) -> None:
    if c.dim_in != 2 or tuple(c.dims_out) != (2, 2):
        raise ValueError("twirls are defined for 1->2 qubit maps")


def _conj_average(c: ChoiOperator, unitaries) -> ChoiOperator:
    _check_broadcast_shape(c)
    acc = np.zeros_like(c.matrix)
    n = 0
    for v in unitaries:
        acc = acc + v @ c.matrix @ dagger(v)
        n += 1
    return c.with_matrix(acc / n)


def local_action(u: np.ndarray) -> np.ndarray:
    """U (x) U (x) U* on (out1, out2, in)."""
    return kron(u, u, np.conj(u))


def phase_unitary(phi: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * phi)])


def phase_twirl(c: ChoiOperator, n_points: int = 4) -> ChoiOperator:
    """Average over U_phi for phi on ``n_points`` equally spaced angles (exact for n_points >= 4)."""
    if n_points < 4:
        raise ValueError("at least 4 phase points are needed for an exact average")
    angles = 2 * np.pi * np.arange(n_points) / n_points
    return _conj_average(c, (local_action(phase_unitary(a)) for a in angles))


def swap_twirl(c: ChoiOperator) -> ChoiOperator:
    return _conj_average(c, [np.eye(8, dtype=complex), kron(SWAP, I2)])


def flip_twirl(c: ChoiOperator) -> ChoiOperator:
    return _conj_average(c, [np.eye(8, dtype=complex), local_action(SX)])


def symmetric_twirl(c: ChoiOperator) -> ChoiOperator:
    """Projection onto maps satisfying PHASE, FLIP and PERM simultaneously."""
    return swap_twirl(flip_twirl(phase_twirl(c)))


def _canonical_phase(u: np.ndarray) -> np.ndarray:
    flat = u.reshape(-1)
    k = int(np.argmax(np.abs(flat) > 1e-9))
    return u * (abs(flat[k]) / flat[k])


@lru_cache(maxsize=None)
def _clifford_group() -> tuple[np.ndarray, ...]:
    elements = [np.eye(2, dtype=complex)]
    keys = {_key(elements[0])}
    frontier = list(elements)
    while frontier:
        nxt = []
        for g in frontier:
            for gen in (HADAMARD, PHASE_S):
                h = _canonical_phase(gen @ g)
                k = _key(h)
                if k not in keys:
                    keys.add(k)
                    elements.append(h)
                    nxt.append(h)
        frontier = nxt
    for e in elements:
        e.setflags(write=False)
    return tuple(elements)


def _key(u: np.ndarray) -> tuple:
    return tuple(np.round(u.reshape(-1), 8).tolist())


def clifford_group() -> list[np.ndarray]:
    """The 24 single-qubit Clifford unitaries modulo global phase, in a fixed order."""
    return [g.copy() for g in _clifford_group()]


def clifford_twirl(c: ChoiOperator) -> ChoiOperator:
    """Exact unitary twirl: the single-qubit Clifford group is a unitary 3-design."""
    return _conj_average(c, (local_action(g) for g in _clifford_group()))


@dataclass(frozen=True)
class FamilyParams:
    c1: complex
    c2: complex
    c3: complex
    c4: complex
    c5: complex
    c6: complex

    def __post_init__(self):
        for name in ("c1", "c2", "c3", "c4", "c5", "c6"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=complex)

    @classmethod
    def from_array(cls, a) -> "FamilyParams":
        return cls(*(complex(x) for x in a))

    def to_dict(self) -> dict:
        return {name: [v.real, v.imag] for name, v in zip(("c1", "c2", "c3", "c4", "c5", "c6"), self.as_array())}

    def is_hermitian(self, tol: float = DEFAULT_TOL) -> bool:
        a = self.as_array()
        return bool(
            np.all(np.abs(a[[0, 3, 4, 5]].imag) <= tol) and abs(a[2] - np.conj(a[1])) <= tol
        )


def family_to_choi(p: FamilyParams) -> ChoiOperator:
    """Choi matrix of the PHASE/FLIP/PERM-symmetric family.

    Basis order is |jkl> = |out1 out2 in>. The blocks follow the invariant
    subspaces span{|000>, |011>+|101>} and its flipped partner (c1..c4), the
    antisymmetric vectors |011>-|101>, |100>-|010> (c5) and |001>, |110> (c6).
    The diagonal entries on |011>, |101>, |010>, |100> are all c4+c5.
    """
    c1, c2, c3, c4, c5, c6 = p.as_array()
    m = np.zeros((8, 8), dtype=complex)
    m[0, 0] = m[7, 7] = c1
    m[0, 3] = m[0, 5] = m[7, 2] = m[7, 4] = c2
    m[3, 0] = m[5, 0] = m[2, 7] = m[4, 7] = c3
    m[1, 1] = m[6, 6] = c6
    for a in (2, 3, 4, 5):
        m[a, a] = c4 + c5
    m[2, 4] = m[4, 2] = m[3, 5] = m[5, 3] = c4 - c5
    return ChoiOperator(m, 2, (2, 2))


def _max_dev(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)))


def extract_params(c: ChoiOperator, tol: float = DEFAULT_TOL) -> FamilyParams:
    """Read c1..c6 from designated entries and verify every other entry."""
    _check_broadcast_shape(c)
    m = c.matrix
    for name, tw in (("PHASE", phase_twirl), ("FLIP", flip_twirl), ("PERM", swap_twirl)):
        dev = _max_dev(tw(c).matrix, m)
        if dev > tol:
            raise FamilyResidualError(f"operator is not {name}-invariant (deviation {dev:.3e})")
    p = FamilyParams(
        m[0, 0], m[0, 3], m[3, 0], (m[3, 3] + m[3, 5]) / 2, (m[3, 3] - m[3, 5]) / 2, m[1, 1]
    )
    resid = np.abs(family_to_choi(p).matrix - m)
    worst = np.unravel_index(int(np.argmax(resid)), resid.shape)
    if resid[worst] > tol:
        raise FamilyResidualError(
            f"entry ({worst[0]}, {worst[1]}) deviates from the family span by {resid[worst]:.3e}"
        )
    return p


def family_residual(c: ChoiOperator) -> float:
    """Max-entry distance of ``c`` from the six-parameter span (no invariance precheck)."""
    m = c.matrix
    p = FamilyParams(
        m[0, 0], m[0, 3], m[3, 0], (m[3, 3] + m[3, 5]) / 2, (m[3, 3] - m[3, 5]) / 2, m[1, 1]
    )
    return _max_dev(family_to_choi(p).matrix, m)


def invariant_basis(projection, dim: int = 8, tol: float = 1e-10) -> list[np.ndarray]:
    """Orthonormal (Hilbert-Schmidt) basis of the image of a twirl.

    The projection is applied to every matrix unit and the images are
    orthonormalised with an SVD; the number of returned matrices is the
    complex dimension of the invariant subspace.
    """
    images = []
    for a in range(dim):
        for b in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[a, b] = 1.0
            images.append(projection(ChoiOperator(e, 2, (2, 2))).matrix.reshape(-1))
    stack = np.array(images)
    _, s, vh = np.linalg.svd(stack, full_matrices=False)
    rank = int(np.sum(s > tol * s[0]))
    return [vh[k].reshape(dim, dim) for k in range(rank)]
