"""Quasiprobability Monte-Carlo for virtual broadcasting vs direct copy distribution.

Randomness is counter based: shot ``s`` of stream ``k`` under ``seed`` always
consumes the same Philox block, so results do not depend on how the shots are
split into shards. Estimates are computed from integer outcome counts, which
makes them bit-identical across shard layouts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .choi import EquatorialState, marginal
from .cost import Decomposition
from .matcore import DEFAULT_TOL, hermitian_eig, is_hermitian

_U53 = 2.0**-53


@dataclass(frozen=True)
class ShotPlan:
    epsilon1: float
    epsilon2: float
    delta1: float
    delta2: float
    c_range: float = 2.0

    def __post_init__(self):
        for name in ("epsilon1", "epsilon2", "delta1", "delta2", "c_range"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if not (self.delta1 < 1 and self.delta2 < 1):
            raise ValueError("failure probabilities must be below 1")

    @classmethod
    def symmetric(cls, epsilon: float, delta: float, c_range: float = 2.0) -> "ShotPlan":
        return cls(epsilon, epsilon, delta, delta, c_range)


class Observable:
    """Hermitian 2x2 observable with cached spectral decomposition."""

    def __init__(self, matrix, tol: float = DEFAULT_TOL):
        m = np.array(matrix, dtype=complex)
        if m.shape != (2, 2) or not is_hermitian(m, tol):
            raise ValueError("observable must be a Hermitian 2x2 matrix")
        self.matrix = m
        w, v = hermitian_eig(m, tol)
        self.values = w
        self.projectors = [np.outer(v[:, k], v[:, k].conj()) for k in range(len(w))]

    @property
    def spread(self) -> float:
        return float(self.values.max() - self.values.min())

    def expectation(self, rho: np.ndarray) -> float:
        return float(np.trace(self.matrix @ rho).real)

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        p = np.array([np.trace(pk @ rho).real for pk in self.projectors])
        p = np.clip(p, 0.0, None)
        return p / p.sum()


def hoeffding_copies(epsilon: float, delta: float, c: float) -> int:
    """ceil(c^2 / (2 eps^2) * ln(2 / delta)).

    A relative slack of 1e-12 absorbs floating-point round-up when the bound
    is an exact integer.
    """
    if not (epsilon > 0 and delta > 0 and c > 0):
        raise ValueError("epsilon, delta and c must be strictly positive")
    if delta >= 1:
        raise ValueError("delta must be below 1")
    n = c * c / (2 * epsilon * epsilon) * math.log(2 / delta)
    return max(1, math.ceil(n * (1 - 1e-12)))


def inflated_shots(cost: float, n: int) -> int:
    """ceil((a+b)^2 n), robust to round-up when the product is an exact integer."""
    return max(1, math.ceil(cost * cost * n * (1 - 1e-12)))


def _philox_key(seed: int, stream: int) -> np.ndarray:
    return np.random.SeedSequence([int(seed), int(stream)]).generate_state(2, dtype=np.uint64)


def shot_uniforms(seed: int, stream: int, start: int, count: int) -> np.ndarray:
    """Uniforms in [0, 1) of shape (count, 4); row s belongs to shot ``start + s``."""
    bg = np.random.Philox(key=_philox_key(seed, stream))
    if start:
        bg.advance(start)
    raw = bg.random_raw(4 * count).reshape(count, 4)
    return (raw >> np.uint64(11)).astype(np.float64) * _U53


def _sample_index(u: np.ndarray, probs: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    return np.searchsorted(cdf, u, side="right")


def _shard_bounds(shots: int, shards: int) -> list[tuple[int, int]]:
    edges = np.linspace(0, shots, max(1, shards) + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


@dataclass
class VirtualEstimate:
    est1: float
    est2: float
    shots: int
    plus_fraction: float
    counts: dict = field(default_factory=dict)


def _as_density(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, EquatorialState) else np.asarray(rho, dtype=complex)


def simulate_virtual(
    d: Decomposition,
    rho,
    o1: Observable,
    o2: Observable,
    shots: int,
    seed: int = 0,
    stream: int = 0,
    shards: int = 1,
) -> VirtualEstimate:
    """Quasiprobability estimate of Tr[O_k Tr_other B(rho)] for both outputs.

    Each shot picks E+ with probability a/(a+b) (else E-), measures O1 on the
    first output marginal and O2 on the second, and records the outcome with
    sign +1 or -1 for the branch. The estimate is (a+b) times the mean.
    """
    if shots <= 0:
        raise ValueError("shots must be positive")
    rho = _as_density(rho)
    branches = [(+1, d.e_plus)]
    if d.e_minus is not None and d.b > 0:
        branches.append((-1, d.e_minus))
    p_plus = d.a / (d.a + d.b)

    probs = []
    for _, e in branches:
        probs.append((o1.probabilities(marginal(e, rho, 1)), o2.probabilities(marginal(e, rho, 2))))

    # counts[branch][output][outcome index]
    counts = np.zeros((2, 2, 2), dtype=np.int64)
    for lo, hi in _shard_bounds(shots, shards):
        u = shot_uniforms(seed, stream, lo, hi - lo)
        minus = (u[:, 0] >= p_plus) if len(branches) == 2 else np.zeros(hi - lo, dtype=bool)
        for bi in range(len(branches)):
            sel = minus if bi == 1 else ~minus
            for out in range(2):
                k = _sample_index(u[sel, 1 + out], probs[bi][out])
                counts[bi, out] += np.bincount(k, minlength=2)[:2]

    scale = d.a + d.b
    ests = []
    for out, obs in enumerate((o1, o2)):
        total = 0.0
        for bi, (sign, _) in enumerate(branches):
            total += sign * float(np.dot(counts[bi, out], obs.values))
        ests.append(scale * total / shots)
    n_plus = int(counts[0, 0].sum())
    return VirtualEstimate(ests[0], ests[1], shots, n_plus / shots, {"counts": counts.tolist()})


def simulate_direct(rho, o: Observable, shots: int, seed: int = 0, stream: int = 0, shards: int = 1) -> float:
    """Mean of projective measurements of ``o`` on fresh copies of ``rho``."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    probs = o.probabilities(_as_density(rho))
    counts = np.zeros(2, dtype=np.int64)
    for lo, hi in _shard_bounds(shots, shards):
        u = shot_uniforms(seed, stream, lo, hi - lo)
        counts += np.bincount(_sample_index(u[:, 0], probs), minlength=2)[:2]
    return float(np.dot(counts, o.values)) / shots


def sample_cost_report(plan: ShotPlan, d: Decomposition | None = None, cost: float | None = None) -> dict:
    """Copies needed by the virtual strategy versus direct distribution."""
    if cost is None:
        if d is None:
            raise ValueError("provide a decomposition or an explicit cost a+b")
        cost = d.a + d.b
    n1 = hoeffding_copies(plan.epsilon1, plan.delta1, plan.c_range)
    n2 = hoeffding_copies(plan.epsilon2, plan.delta2, plan.c_range)
    n_q = max(n1, n2)
    virtual = cost * cost * n_q
    direct = n1 + n2
    return {
        "n1": n1,
        "n2": n2,
        "n_q": n_q,
        "a_plus_b": cost,
        "virtual_copies": virtual,
        "direct_copies": direct,
        "ratio": virtual / direct,
        "sample_efficient": virtual < direct,
    }


@dataclass
class Scenario:
    """One estimation task for the failure-rate experiment."""

    strategy: str  # "virtual" or "direct"
    rho: EquatorialState
    observable: Observable
    epsilon: float
    shots: int
    decomposition: Decomposition | None = None
    output: int = 1

    def exact(self) -> float:
        rho = _as_density(self.rho)
        if self.strategy == "direct":
            return self.observable.expectation(rho)
        d = self.decomposition
        b = d.reconstruct()
        return self.observable.expectation(marginal(b, rho, self.output))


@dataclass
class FailureReport:
    rate: float
    failures: int
    repetitions: int
    exact: float
    mean_estimate: float
    errors: np.ndarray

    def binomial_bound(self, delta: float, sigmas: float = 3.0) -> float:
        return delta + sigmas * math.sqrt(delta * (1 - delta) / self.repetitions)

    def to_dict(self) -> dict:
        return {
            "rate": self.rate,
            "failures": self.failures,
            "repetitions": self.repetitions,
            "exact": self.exact,
            "mean_estimate": self.mean_estimate,
        }


def empirical_failure_rate(scenario: Scenario, repetitions: int, seed: int = 0) -> FailureReport:
    """Fraction of independent repetitions whose error exceeds epsilon."""
    if repetitions < 100:
        raise ValueError("use at least 100 repetitions")
    if scenario.strategy not in ("virtual", "direct"):
        raise ValueError(f"unknown strategy {scenario.strategy!r}")
    exact = scenario.exact()
    estimates = np.empty(repetitions)
    for r in range(repetitions):
        if scenario.strategy == "direct":
            estimates[r] = simulate_direct(scenario.rho, scenario.observable, scenario.shots, seed, stream=r)
        else:
            est = simulate_virtual(
                scenario.decomposition,
                scenario.rho,
                scenario.observable,
                scenario.observable,
                scenario.shots,
                seed,
                stream=r,
            )
            estimates[r] = est.est1 if scenario.output == 1 else est.est2
    errors = estimates - exact
    failures = int(np.sum(np.abs(errors) > scenario.epsilon))
    return FailureReport(failures / repetitions, failures, repetitions, exact, float(estimates.mean()), errors)
