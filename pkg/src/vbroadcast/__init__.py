"""Virtual broadcasting of phase-covariant qubit states.

Choi-operator calculus, symmetry twirls, trace-norm minimisation over the
symmetric broadcasting family, diamond distances and a quasiprobability
sampler for estimating observables from a single virtual broadcast.
"""

from .channels import (
    canonical_broadcaster,
    clone_fidelity,
    cloner_local_optimality,
    diamond_distance,
    optimal_virtual_broadcaster,
    phase_covariant_cloner,
    universal_cloner,
)
from .choi import ChoiOperator, EquatorialState, apply_map, is_cp, is_cptp, is_hp, is_tp, marginal
from .constraints import ConstrainedParams, constrained_choi, verify_broadcast, verify_classic
from .cost import Decomposition, base_norm_bounds, minimize, pos_neg_split
from .sampler import Observable, ShotPlan, empirical_failure_rate, hoeffding_copies, sample_cost_report, simulate_virtual
from .twirl import FamilyParams, clifford_twirl, extract_params, family_to_choi, symmetric_twirl

__all__ = [
    "ChoiOperator",
    "ConstrainedParams",
    "Decomposition",
    "EquatorialState",
    "FamilyParams",
    "Observable",
    "ShotPlan",
    "apply_map",
    "base_norm_bounds",
    "canonical_broadcaster",
    "clifford_twirl",
    "clone_fidelity",
    "cloner_local_optimality",
    "constrained_choi",
    "diamond_distance",
    "empirical_failure_rate",
    "extract_params",
    "family_to_choi",
    "hoeffding_copies",
    "is_cp",
    "is_cptp",
    "is_hp",
    "is_tp",
    "marginal",
    "minimize",
    "optimal_virtual_broadcaster",
    "phase_covariant_cloner",
    "pos_neg_split",
    "sample_cost_report",
    "simulate_virtual",
    "symmetric_twirl",
    "universal_cloner",
    "verify_broadcast",
    "verify_classic",
]

__version__ = "0.1.0"
