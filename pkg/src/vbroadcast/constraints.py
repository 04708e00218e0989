"""CLASSIC and HP constraints on the symmetric family, and broadcast checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import config
from .choi import (
    PM_BASIS,
    ChoiOperator,
    EquatorialState,
    apply_map,
    classical_broadcaster,
    decohere,
    marginal,
)
from .matcore import DEFAULT_TOL, SZ, is_hermitian, projector, trace_norm
from .twirl import FamilyParams, family_to_choi


class ConstraintError(ValueError):
    """Family parameters violate CLASSIC or HP."""


@dataclass(frozen=True)
class ConstrainedParams:
    """Free coordinates left after CLASSIC and HP: c1, c4 and t = Im c2."""

    c1: float
    c4: float
    t: float

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c4, self.t], dtype=float)

    def to_dict(self) -> dict:
        return {"c1": self.c1, "c4": self.c4, "t": self.t}


def apply_classic(p: FamilyParams) -> FamilyParams:
    """Overwrite c3, c5, c6 so that CLASSIC holds; c1, c2, c4 are kept."""
    return FamilyParams(p.c1, p.c2, 1 - p.c2, p.c4, p.c4 - 0.5, 2 - p.c1 - 4 * p.c4)


def classic_identity_residuals(p: FamilyParams) -> np.ndarray:
    """|c3-(1-c2)|, |c5-(c4-1/2)|, |c6-(2-c1-4c4)|."""
    return np.abs(
        np.array(
            [p.c3 - (1 - p.c2), p.c5 - (p.c4 - 0.5), p.c6 - (2 - p.c1 - 4 * p.c4)],
            dtype=complex,
        )
    )


def free_to_full(q: ConstrainedParams) -> FamilyParams:
    c2 = 0.5 + 1j * q.t
    return FamilyParams(q.c1, c2, np.conj(c2), q.c4, q.c4 - 0.5, 2 - q.c1 - 4 * q.c4)


def full_to_free(p: FamilyParams, tol: float = DEFAULT_TOL) -> ConstrainedParams:
    if not p.is_hermitian(tol):
        raise ConstraintError("parameters do not satisfy HP (c1, c4, c5, c6 real and c3 = conj(c2))")
    resid = classic_identity_residuals(p)
    if np.max(resid) > tol:
        raise ConstraintError(f"parameters violate the CLASSIC identities (residuals {resid.tolist()})")
    if abs(p.c2.real - 0.5) > tol:
        raise ConstraintError("CLASSIC with HP forces Re c2 = 1/2")
    return ConstrainedParams(float(p.c1.real), float(p.c4.real), float(p.c2.imag))


def constrained_choi(q: ConstrainedParams) -> ChoiOperator:
    return family_to_choi(free_to_full(q))


def classic_deviation(c: ChoiOperator, basis: Sequence[np.ndarray] = PM_BASIS) -> float:
    """Largest entry of (D(x)D) o B o D (E) - B_cl(E) over the matrix units E of ``basis``."""
    d = decohere(basis)
    bcl = classical_broadcaster(basis)
    vecs = [np.asarray(v, dtype=complex) for v in basis]
    proj_pairs = [np.kron(projector(u), projector(v)) for u in vecs for v in vecs]
    worst = 0.0
    for u in vecs:
        for v in vecs:
            e = np.outer(u, v.conj())
            out = apply_map(c, apply_map(d, e))
            dd = sum(p @ out @ p for p in proj_pairs)
            worst = max(worst, float(np.max(np.abs(dd - apply_map(bcl, e)))))
    return worst


def verify_classic(c: ChoiOperator, tol: float = DEFAULT_TOL) -> bool:
    return classic_deviation(c) <= tol


def is_equatorial(rho: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    rho = np.asarray(rho, dtype=complex)
    return (
        is_hermitian(rho, tol)
        and abs(np.trace(rho) - 1) <= tol
        and abs(np.trace(rho @ SZ)) <= tol
        and np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)) >= -tol
    )


def equatorial_grid(radii: int | None = None, angles: int | None = None) -> list[EquatorialState]:
    """Radii from 0 to 1 inclusive crossed with equally spaced angles."""
    radii = radii or config.get("broadcast_grid", "radii")
    angles = angles or config.get("broadcast_grid", "angles")
    return [
        EquatorialState(float(r), float(phi))
        for r in np.linspace(0.0, 1.0, radii)
        for phi in 2 * np.pi * np.arange(angles) / angles
    ]


@dataclass
class BroadcastReport:
    max_deviation: float
    argmax_state: dict | None
    passed: bool
    checked: int
    out_of_scope: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "max_deviation": self.max_deviation,
            "argmax_state": self.argmax_state,
            "pass": self.passed,
            "checked": self.checked,
            "out_of_scope": self.out_of_scope,
        }


def _state_record(state) -> dict:
    if isinstance(state, EquatorialState):
        return state.to_dict()
    m = np.asarray(state, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def broadcast_deviation(c: ChoiOperator, rho: np.ndarray) -> float:
    return max(trace_norm(marginal(c, rho, k) - rho) for k in (1, 2))


def verify_broadcast(
    c: ChoiOperator,
    states: Iterable | None = None,
    tol: float | None = None,
    equatorial_only: bool = True,
) -> BroadcastReport:
    """Worst trace-norm deviation of either marginal from the input state.

    ``states`` may mix :class:`EquatorialState` values and raw 2x2 density
    matrices. With ``equatorial_only`` set, inputs off the equator are
    reported under ``out_of_scope`` and do not affect the verdict.
    """
    states = equatorial_grid() if states is None else list(states)
    tol = config.get("tolerances", "broadcast") if tol is None else tol
    worst, arg, checked = 0.0, None, 0
    skipped = []
    for s in states:
        rho = s.matrix if isinstance(s, EquatorialState) else np.asarray(s, dtype=complex)
        dev = broadcast_deviation(c, rho)
        if equatorial_only and not isinstance(s, EquatorialState) and not is_equatorial(rho):
            skipped.append({"state": _state_record(s), "deviation": dev})
            continue
        checked += 1
        if arg is None or dev > worst:
            worst, arg = dev, _state_record(s)
    return BroadcastReport(worst, arg, worst <= tol, checked, skipped)
