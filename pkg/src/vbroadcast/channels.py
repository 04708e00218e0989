"""Named channels and virtual maps, plus diamond-norm distances between them."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize as nm_minimize

from . import config
from .choi import ChoiOperator, apply_map, choi_from_map, marginal, output_trace
from .constraints import ConstrainedParams, constrained_choi
from .cost import _psd_parts, pos_neg_split
from .matcore import DEFAULT_TOL, I2, dagger, kron, trace_norm, trace_norms
from .twirl import SWAP, clifford_twirl, invariant_basis, swap_twirl

OPTIMAL_PARAMS = ConstrainedParams(1 / 3, 5 / 12, 0.0)

_CLONER = (
    np.array(
        [
            [1, 0, 0, 1, 0, 1, 0, 0],
            [0, 0, 0, 0, 0, 0, 0, 0],
            [0, 0, 1, 0, 1, 0, 0, 1],
            [1, 0, 0, 1, 0, 1, 0, 0],
            [0, 0, 1, 0, 1, 0, 0, 1],
            [1, 0, 0, 1, 0, 1, 0, 0],
            [0, 0, 0, 0, 0, 0, 0, 0],
            [0, 0, 1, 0, 1, 0, 0, 1],
        ],
        dtype=complex,
    )
    / 3
)


def phase_covariant_cloner() -> ChoiOperator:
    """Phase-covariant 1->2 cloner: the normalised positive part of the optimal broadcaster.

    Its single-copy fidelity is 5/6 for every equatorial pure state.
    """
    return ChoiOperator(_CLONER, 2, (2, 2))


def optimal_virtual_broadcaster() -> ChoiOperator:
    """Minimal-trace-norm member of the constrained symmetric family."""
    return constrained_choi(OPTIMAL_PARAMS)


def canonical_closed_form() -> ChoiOperator:
    """B(rho) = 1/2 {rho (x) 1, SWAP}."""
    return choi_from_map(lambda rho: 0.5 * (kron(rho, I2) @ SWAP + SWAP @ kron(rho, I2)), 2, (2, 2))


def _computational_classic_rows(basis_mats: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Linear system A x = y expressing CLASSIC in the computational basis for C = sum x_k M_k."""
    e = [np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)]
    rows, rhs = [], []
    dd_proj = [np.kron(np.outer(u, u), np.outer(v, v)) for u in e for v in e]
    for i in range(2):
        for j in range(2):
            unit = np.outer(e[i], e[j])
            dec = unit if i == j else np.zeros_like(unit)
            target = np.kron(np.outer(e[i], e[i]), np.outer(e[i], e[i])) if i == j else np.zeros((4, 4))
            cols = []
            for m in basis_mats:
                out = apply_map(ChoiOperator(m, 2, (2, 2)), dec)
                cols.append(sum(p @ out @ p for p in dd_proj).reshape(-1))
            rows.append(np.array(cols).T)
            rhs.append(target.reshape(-1))
    return np.vstack(rows), np.concatenate(rhs)


def canonical_broadcaster(tol: float = 1e-12) -> ChoiOperator:
    """Unique UNITARY + PERM + CLASSIC qubit broadcasting map.

    Built by twirling: the image of the Clifford and swap twirls is spanned by
    a small basis, and CLASSIC in the computational basis fixes the
    coefficients. The result is checked against the anticommutator closed form.
    """
    basis = invariant_basis(lambda c: swap_twirl(clifford_twirl(c)))
    a, y = _computational_classic_rows(basis)
    x, *_ = np.linalg.lstsq(a, y, rcond=None)
    if np.linalg.matrix_rank(a, tol=1e-9) != len(basis):
        raise RuntimeError("CLASSIC does not fix a unique covariant broadcasting map")
    if np.max(np.abs(a @ x - y)) > tol:
        raise RuntimeError("no UNITARY + PERM map satisfies CLASSIC")
    c = ChoiOperator(sum(xk * m for xk, m in zip(x, basis)), 2, (2, 2))
    ref = canonical_closed_form()
    dev = float(np.max(np.abs(c.matrix - ref.matrix)))
    if dev > tol:
        raise RuntimeError(f"pipeline broadcaster disagrees with the closed form by {dev:.3e}")
    return c


def universal_cloner() -> ChoiOperator:
    """Normalised positive part of the canonical broadcaster."""
    return pos_neg_split(canonical_broadcaster()).e_plus


def clone_fidelity(c: ChoiOperator, psi: np.ndarray, output: int = 1) -> float:
    psi = np.asarray(psi, dtype=complex)
    rho = np.outer(psi, psi.conj())
    return float(np.vdot(psi, marginal(c, rho, output) @ psi).real)


# --- diamond distance -------------------------------------------------------


def _chart_to_state(x: np.ndarray) -> np.ndarray:
    """Six chart coordinates to a unit vector in C^4 (global phase fixed)."""
    t1, t2, t3, p1, p2, p3 = x
    s1, s2 = np.sin(t1), np.sin(t2)
    return np.array(
        [
            np.cos(t1),
            s1 * np.cos(t2) * np.exp(1j * p1),
            s1 * s2 * np.cos(t3) * np.exp(1j * p2),
            s1 * s2 * np.sin(t3) * np.exp(1j * p3),
        ]
    )


MAX_ENTANGLED_CHART = np.array([np.pi / 4, np.pi / 2, np.pi / 2, 0.0, 0.0, 0.0])


def extended_output(c: ChoiOperator, psi: np.ndarray) -> np.ndarray:
    """(Phi (x) id)(|psi><psi|) for psi on input (x) reference, both of dimension dim_in."""
    d = c.dim_in
    m = np.asarray(psi, dtype=complex).reshape(d, d).T  # M[a, i] = psi[i, a]
    k = kron(np.eye(c.dim_out), m)
    return k @ c.matrix @ dagger(k)


def _extended_norm(c: ChoiOperator, x: np.ndarray) -> float:
    return float(trace_norms(extended_output(c, _chart_to_state(x))))


@dataclass
class DiamondResult:
    value: float
    lower_cert: float
    upper_cert: float
    bracket_tol: float
    argmax_state: list = field(default_factory=list)
    starts: int = 0

    @property
    def certified(self) -> bool:
        return self.upper_cert - self.lower_cert <= self.bracket_tol

    @property
    def best_lower_bound(self) -> float:
        return max(self.value, self.lower_cert)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "lower_cert": self.lower_cert,
            "upper_cert": self.upper_cert,
            "certified": self.certified,
        }


def diamond_upper_bound(delta: ChoiOperator, tol: float = DEFAULT_TOL) -> float:
    """||P-map||_dia + ||N-map||_dia for the orthogonal split of the Choi difference.

    For a CP map the diamond norm is the largest eigenvalue of its output trace.
    """
    p, n = _psd_parts(delta, tol)
    return float(
        sum(
            max(0.0, float(np.max(np.linalg.eigvalsh(output_trace(delta.with_matrix(x))))))
            for x in (p, n)
        )
    )


def diamond_distance(
    c1: ChoiOperator,
    c2: ChoiOperator,
    starts: int | None = None,
    seed: int | None = None,
    bracket_tol: float | None = None,
    cfg: dict | None = None,
) -> DiamondResult:
    """Diamond norm of map(c1) - map(c2) by search over pure extended inputs.

    The first start is the maximally entangled state, so ``value`` is never
    below the Choi witness ``lower_cert``. ``upper_cert`` comes from splitting
    the difference into orthogonal CP parts.
    """
    cfg = dict(config.DEFAULTS["diamond"], **(cfg or {}))
    starts = cfg["starts"] if starts is None else starts
    seed = cfg["seed"] if seed is None else seed
    bracket_tol = config.get("tolerances", "bracket") if bracket_tol is None else bracket_tol
    if c1.dim_in != c2.dim_in or c1.dims_out != c2.dims_out:
        raise ValueError("diamond_distance needs maps between the same spaces")
    delta = c1 - c2
    lower = trace_norm(delta.matrix) / delta.dim_in
    upper = diamond_upper_bound(delta)

    rng = np.random.default_rng(seed)
    points = np.column_stack(
        [rng.uniform(0, np.pi / 2, size=(starts, 3)), rng.uniform(0, 2 * np.pi, size=(starts, 3))]
    )
    if starts > 0:
        points[0] = MAX_ENTANGLED_CHART
    best, best_x = lower, MAX_ENTANGLED_CHART
    for x0 in points:
        res = nm_minimize(
            lambda x: -_extended_norm(delta, x),
            x0,
            method="Nelder-Mead",
            options={"xatol": cfg["xatol"], "fatol": cfg["fatol"], "maxiter": cfg["maxiter"]},
        )
        if -res.fun > best:
            best, best_x = float(-res.fun), np.asarray(res.x)
    psi = _chart_to_state(best_x)
    return DiamondResult(
        value=best,
        lower_cert=lower,
        upper_cert=upper,
        bracket_tol=bracket_tol,
        argmax_state=[[z.real, z.imag] for z in psi],
        starts=starts,
    )


# --- local optimality of the cloner -----------------------------------------


def random_cptp(rng: np.random.Generator, dim_in: int = 2, dims_out=(2, 2), kraus: int = 4) -> ChoiOperator:
    """Random channel from a Haar-like isometry (QR of a complex Gaussian)."""
    d_out = int(np.prod(dims_out))
    g = rng.normal(size=(d_out * kraus, dim_in)) + 1j * rng.normal(size=(d_out * kraus, dim_in))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    ks = [q[k * d_out : (k + 1) * d_out, :] for k in range(kraus)]
    return choi_from_map(lambda rho: sum(k @ rho @ dagger(k) for k in ks), dim_in, tuple(dims_out))


@dataclass
class LocalOptimalityReport:
    target: float
    tol: float
    samples: int
    min_distance: float
    min_by_weight: dict
    violations: int

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "tol": self.tol,
            "samples": self.samples,
            "min_distance": self.min_distance,
            "min_by_weight": self.min_by_weight,
            "violations": self.violations,
            "pass": self.passed,
        }


def perturbed_cloner(weight: float, other: ChoiOperator) -> ChoiOperator:
    return (1 - weight) * phase_covariant_cloner() + weight * other


def cloner_local_optimality(
    samples: int | None = None,
    weights=None,
    seed: int | None = None,
    tol: float | None = None,
    starts: int | None = None,
) -> LocalOptimalityReport:
    """Mix the cloner with random channels and check none gets closer than 2/3.

    Each reported distance is a lower bound on the true diamond distance: the
    maximally entangled (Choi) witness, refined by a pure-state search only
    when the witness alone falls below the target. A pass is therefore sound
    for the sampled perturbations.
    """
    cfg = config.DEFAULTS["local_optimality"]
    samples = cfg["samples"] if samples is None else samples
    weights = cfg["weights"] if weights is None else list(weights)
    seed = cfg["seed"] if seed is None else seed
    tol = cfg["tol"] if tol is None else tol
    starts = cfg["starts"] if starts is None else starts
    target = 2 / 3
    b_hat = optimal_virtual_broadcaster()
    rng = np.random.default_rng(seed)
    by_weight = {float(w): np.inf for w in weights}
    violations = 0
    for k in range(samples):
        w = float(weights[k % len(weights)])
        e = perturbed_cloner(w, random_cptp(rng))
        dist = trace_norm((b_hat - e).matrix) / b_hat.dim_in
        if dist < target - tol:
            # the Choi witness is inconclusive; search extended inputs
            dist = diamond_distance(b_hat, e, starts=starts, seed=seed + k).best_lower_bound
        by_weight[w] = min(by_weight[w], dist)
        if dist < target - tol:
            violations += 1
    return LocalOptimalityReport(
        target=target,
        tol=tol,
        samples=samples,
        min_distance=float(min(by_weight.values())),
        min_by_weight={str(w): float(v) for w, v in by_weight.items()},
        violations=violations,
    )
