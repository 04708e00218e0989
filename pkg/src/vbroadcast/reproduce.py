"""End-to-end reproduction of the headline numbers with pass/fail checks."""

from __future__ import annotations

import math
import time

import numpy as np

from . import config
from .channels import (
    canonical_broadcaster,
    clone_fidelity,
    cloner_local_optimality,
    diamond_distance,
    optimal_virtual_broadcaster,
    phase_covariant_cloner,
    universal_cloner,
)
from .choi import ChoiOperator, EquatorialState, is_cptp, output_trace
from .constraints import (
    ConstrainedParams,
    classic_identity_residuals,
    constrained_choi,
    free_to_full,
    verify_broadcast,
    verify_classic,
)
from .cost import base_norm_bounds, minimize, pos_neg_split
from .matcore import SX
from .sampler import (
    Observable,
    Scenario,
    ShotPlan,
    empirical_failure_rate,
    hoeffding_copies,
    inflated_shots,
    sample_cost_report,
)
from .twirl import FamilyParams, extract_params, family_residual, family_to_choi, symmetric_twirl


def _random_hermitian(rng: np.random.Generator, n: int = 8) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def _random_free(rng: np.random.Generator) -> ConstrainedParams:
    return ConstrainedParams(*rng.uniform([-2, -1, -2], [2, 2, 2]))


def check_family(rng, samples: int = 50) -> dict:
    worst_resid = worst_round = 0.0
    for _ in range(samples):
        c = symmetric_twirl(ChoiOperator(_random_hermitian(rng)))
        worst_resid = max(worst_resid, family_residual(c))
        back = family_to_choi(extract_params(c, tol=1e-12))
        worst_round = max(worst_round, float(np.max(np.abs(back.matrix - c.matrix))))
    return {"max_residual": worst_resid, "max_roundtrip": worst_round, "pass": worst_resid <= 1e-12 and worst_round <= 1e-12}


def check_classic(rng, samples: int = 100) -> dict:
    ok = True
    for _ in range(samples):
        q = _random_free(rng)
        p = free_to_full(q)
        ok &= verify_classic(family_to_choi(p)) and float(np.max(classic_identity_residuals(p))) == 0.0
        a = p.as_array()
        for idx, delta in ((2, 1e-3), (4, 1e-3), (5, 1e-3)):
            broken = a.copy()
            broken[idx] += delta
            ok &= not verify_classic(family_to_choi(FamilyParams.from_array(broken)))
    return {"pass": bool(ok)}


def check_broadcast(rng, samples: int = 100) -> dict:
    worst_dev = worst_tp = 0.0
    for _ in range(samples):
        c = constrained_choi(_random_free(rng))
        worst_dev = max(worst_dev, verify_broadcast(c).max_deviation)
        worst_tp = max(worst_tp, float(np.max(np.abs(output_trace(c) - np.eye(2)))))
    return {"max_deviation": worst_dev, "max_tp_error": worst_tp, "pass": worst_dev <= 1e-12 and worst_tp <= 1e-12}


def run_all(seed: int = 7, cfg: dict | None = None, fast: bool = False) -> dict:
    """Compute every headline number and its check; ``fast`` trims sample counts."""
    cfg = cfg or config.load_config()
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    checks = {}

    checks["family"] = check_family(rng, 10 if fast else 50)
    checks["classic"] = check_classic(rng, 20 if fast else 100)
    checks["broadcast_tp"] = check_broadcast(rng, 20 if fast else 100)

    mres = minimize(cfg=cfg["minimize"])
    x = mres.argmin.as_array()
    checks["minimize"] = {
        **mres.to_dict(),
        "pass": abs(mres.value - 10 / 3) <= 1e-7
        and bool(np.all(np.abs(x - np.array([1 / 3, 5 / 12, 0.0])) <= 1e-5))
        and mres.certificate.passed,
    }

    b_hat = optimal_virtual_broadcaster()
    dec = pos_neg_split(b_hat)
    bounds = base_norm_bounds(b_hat)
    checks["decomposition"] = {
        "a": dec.a,
        "b": dec.b,
        **bounds.to_dict(),
        "pass": abs(dec.a - 4 / 3) <= 1e-10
        and abs(dec.b - 1 / 3) <= 1e-10
        and is_cptp(dec.e_plus, 1e-10)
        and is_cptp(dec.e_minus, 1e-10)
        and bounds.upper - bounds.lower <= 1e-9
        and abs(bounds.lower - 5 / 3) <= 1e-9,
    }

    cloner = phase_covariant_cloner()
    fids = [clone_fidelity(cloner, np.array([1, np.exp(1j * phi)]) / math.sqrt(2)) for phi in 2 * np.pi * np.arange(36) / 36]
    checks["cloner"] = {
        "max_entry_gap": float(np.max(np.abs(dec.e_plus.matrix - cloner.matrix))),
        "equatorial_fidelity": float(np.mean(fids)),
        "fidelity_spread": float(np.ptp(fids)),
    }
    checks["cloner"]["pass"] = checks["cloner"]["max_entry_gap"] <= 1e-12 and checks["cloner"]["fidelity_spread"] <= 1e-10

    dres = diamond_distance(b_hat, cloner, cfg=cfg["diamond"])
    canon, ucl = canonical_broadcaster(), universal_cloner()
    cres = diamond_distance(canon, ucl, cfg=cfg["diamond"])
    checks["diamond"] = {
        "to_cloner": dres.to_dict(),
        "canonical_to_universal": cres.to_dict(),
        "pass": dres.lower_cert >= 2 / 3 - 1e-9
        and dres.upper_cert <= 2 / 3 + 1e-9
        and abs(dres.value - 2 / 3) <= 1e-6
        and abs(cres.value - 1) <= 1e-6,
    }

    states = []
    for _ in range(100):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        w = rng.uniform()
        states.append(w * np.outer(v, v.conj()) + (1 - w) * np.eye(2) / 2)
    brep = verify_broadcast(canon, states, equatorial_only=False)
    cbounds = base_norm_bounds(canon)
    checks["baseline"] = {
        "broadcast": brep.max_deviation,
        **cbounds.to_dict(),
        "pass": brep.max_deviation <= 1e-12 and cbounds.certified and abs(cbounds.lower - 2) <= 1e-9,
    }

    plan = ShotPlan.symmetric(cfg["sampling"]["epsilon"], cfg["sampling"]["delta"], cfg["sampling"]["c_range"])
    rep_hat = sample_cost_report(plan, dec)
    rep_canon = sample_cost_report(plan, cost=cbounds.upper)
    checks["sample"] = {
        "ratio_optimal": rep_hat["ratio"],
        "ratio_canonical": rep_canon["ratio"],
        "pass": abs(rep_hat["ratio"] - 25 / 18) <= 1e-9
        and abs(rep_canon["ratio"] - 2) <= 1e-9
        and not rep_hat["sample_efficient"]
        and not rep_canon["sample_efficient"],
    }

    eps, delta = cfg["sampling"]["epsilon"], cfg["sampling"]["delta"]
    shots = inflated_shots(dec.a + dec.b, hoeffding_copies(eps, delta, cfg["sampling"]["c_range"]))
    reps = 100 if fast else cfg["sampling"]["repetitions"]
    frep = empirical_failure_rate(Scenario("virtual", EquatorialState(1.0, 0.0), Observable(SX), eps, shots, dec), reps, seed)
    checks["monte_carlo"] = {
        **frep.to_dict(),
        "shots": shots,
        "bound": frep.binomial_bound(delta),
        "pass": frep.rate <= frep.binomial_bound(delta) and abs(frep.mean_estimate - 1) <= 0.005,
    }

    lrep = cloner_local_optimality(samples=20 if fast else None)
    checks["local_optimality"] = lrep.to_dict()

    summary = {
        "min_trace_norm": mres.value,
        "sim_cost": bounds.upper,
        "diamond_to_cloner": dres.value,
        "baseline_cost": cbounds.upper,
        "baseline_diamond": cres.value,
        "sample_ratio": rep_hat["ratio"],
        "cloner_equatorial_fidelity": checks["cloner"]["equatorial_fidelity"],
        "checks": checks,
        "all_pass": all(c["pass"] for c in checks.values()),
        "seconds": time.perf_counter() - t0,
    }
    return summary
