import numpy as np
import pytest

from vbroadcast.channels import (
    MAX_ENTANGLED_CHART,
    _chart_to_state,
    canonical_broadcaster,
    canonical_closed_form,
    clone_fidelity,
    cloner_local_optimality,
    diamond_distance,
    optimal_virtual_broadcaster,
    perturbed_cloner,
    phase_covariant_cloner,
    random_cptp,
    universal_cloner,
)
from vbroadcast.choi import ChoiOperator, EquatorialState, choi_from_map, is_cptp, marginal
from vbroadcast.constraints import verify_broadcast
from vbroadcast.cost import base_norm_bounds, pos_neg_split
from vbroadcast.twirl import clifford_twirl

from conftest import C_HAT, C_MINUS, C_PLUS, haar_unitary, random_density


def _equator(n=36):
    return [np.array([1, np.exp(1j * phi)]) / np.sqrt(2) for phi in 2 * np.pi * np.arange(n) / n]


def _haar_states(rng, n):
    out = []
    for _ in range(n):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        out.append(v / np.linalg.norm(v))
    return out


def test_cloner_matrix_and_cptp():
    c = phase_covariant_cloner()
    assert np.allclose(c.matrix, C_PLUS, atol=1e-15)
    assert is_cptp(c)


def test_cloner_equatorial_fidelity_constant():
    f = [clone_fidelity(phase_covariant_cloner(), psi) for psi in _equator()]
    assert np.ptp(f) <= 1e-10
    # value recorded from the computation
    assert np.isclose(f[0], 5 / 6, atol=1e-12)


def test_cloner_marginals_agree():
    c = phase_covariant_cloner()
    for psi in _equator(12):
        rho = np.outer(psi, psi.conj())
        assert np.allclose(marginal(c, rho, 1), marginal(c, rho, 2), atol=1e-14)


def test_cloner_is_normalised_positive_part():
    d = pos_neg_split(optimal_virtual_broadcaster())
    assert np.max(np.abs(d.e_plus.matrix - phase_covariant_cloner().matrix)) <= 1e-12


def test_broadcaster_entries():
    assert np.allclose(optimal_virtual_broadcaster().matrix, C_HAT, atol=1e-15)


def test_broadcaster_broadcasts_and_costs_five_thirds():
    c = optimal_virtual_broadcaster()
    assert verify_broadcast(c).passed
    b = base_norm_bounds(c)
    assert b.certified and np.isclose(b.upper, 5 / 3, atol=1e-12)


def test_canonical_matches_closed_form():
    assert np.allclose(canonical_broadcaster().matrix, canonical_closed_form().matrix, atol=1e-12)


def test_canonical_broadcasts_everywhere(rng):
    c = canonical_broadcaster()
    states = [random_density(rng) for _ in range(100)]
    rep = verify_broadcast(c, states, equatorial_only=False)
    assert rep.checked == 100 and rep.max_deviation <= 1e-12


def test_canonical_cost_and_covariance():
    c = canonical_broadcaster()
    b = base_norm_bounds(c)
    assert b.certified and np.isclose(b.lower, 2, atol=1e-9)
    assert np.allclose(clifford_twirl(c).matrix, c.matrix, atol=1e-14)


def test_universal_cloner(rng):
    c = universal_cloner()
    assert is_cptp(c)
    assert np.allclose(clifford_twirl(c).matrix, c.matrix, atol=1e-14)
    f = [clone_fidelity(c, psi) for psi in _haar_states(rng, 100)]
    assert np.ptp(f) <= 1e-10
    assert np.isclose(f[0], 5 / 6, atol=1e-12)


def test_chart_start_is_maximally_entangled():
    psi = _chart_to_state(MAX_ENTANGLED_CHART)
    assert np.allclose(psi, np.array([1, 0, 0, 1]) / np.sqrt(2), atol=1e-15)


def test_chart_is_normalised(rng):
    for _ in range(10):
        x = rng.uniform(0, 2 * np.pi, size=6)
        assert np.isclose(np.linalg.norm(_chart_to_state(x)), 1)


def test_diamond_broadcaster_to_cloner():
    res = diamond_distance(optimal_virtual_broadcaster(), phase_covariant_cloner())
    assert abs(res.value - 2 / 3) <= 1e-6
    assert res.lower_cert >= 2 / 3 - 1e-9 and res.upper_cert <= 2 / 3 + 1e-9
    assert res.certified
    assert set(res.to_dict()) == {"value", "lower_cert", "upper_cert", "certified"}


def test_diamond_self_is_zero(rng):
    c = random_cptp(rng)
    res = diamond_distance(c, c, starts=2)
    assert res.value == 0 and res.certified


def test_diamond_canonical_to_universal():
    res = diamond_distance(canonical_broadcaster(), universal_cloner())
    assert abs(res.value - 1) <= 1e-6 and res.certified


def test_diamond_unitary_closed_form(rng):
    # ||U.U^dag - V.V^dag||_dia = 2 sin(theta / 2), theta the eigenphase gap of U^dag V
    for _ in range(3):
        u, v = haar_unitary(rng), haar_unitary(rng)
        phases = np.angle(np.linalg.eigvals(u.conj().T @ v))
        gap = abs(phases[0] - phases[1])
        gap = min(gap, 2 * np.pi - gap)
        expected = 2 * np.sin(gap / 2)
        cu = choi_from_map(lambda r: u @ r @ u.conj().T, 2, (2,))
        cv = choi_from_map(lambda r: v @ r @ v.conj().T, 2, (2,))
        res = diamond_distance(cu, cv, starts=8)
        assert abs(res.value - expected) <= 1e-6
        assert res.lower_cert <= expected + 1e-9 <= res.upper_cert + 2e-9


def test_diamond_dimension_mismatch():
    with pytest.raises(ValueError):
        diamond_distance(phase_covariant_cloner(), ChoiOperator(np.eye(4) / 2, 2, (2,)))


def test_perturbation_zero_is_cloner():
    c = perturbed_cloner(0.0, random_cptp(np.random.default_rng(0)))
    assert np.allclose(c.matrix, phase_covariant_cloner().matrix)
    res = diamond_distance(optimal_virtual_broadcaster(), c, starts=4)
    assert abs(res.value - 2 / 3) <= 1e-9


def test_moving_toward_negative_part_increases_distance():
    c = perturbed_cloner(0.1, ChoiOperator(C_MINUS))
    res = diamond_distance(optimal_virtual_broadcaster(), c, starts=4)
    assert res.best_lower_bound > 2 / 3 + 1e-3


def test_local_optimality_small():
    rep = cloner_local_optimality(samples=12)
    assert rep.passed and rep.min_distance >= 2 / 3 - 1e-6
    assert set(rep.min_by_weight) == {"0.01", "0.05", "0.1"}


def test_random_cptp_is_cptp(rng):
    assert is_cptp(random_cptp(rng))


def test_equatorial_state_inputs_broadcast():
    c = optimal_virtual_broadcaster()
    s = EquatorialState(0.4, 2.0)
    assert np.allclose(marginal(c, s.matrix, 1), s.matrix, atol=1e-14)


def _sdp_diamond(delta):
    """Diamond norm of a Hermiticity-preserving map by semidefinite programming."""
    cp = pytest.importorskip("cvxpy")
    j = delta.matrix
    w = cp.Variable((8, 8), hermitian=True)
    rho = cp.Variable((2, 2), hermitian=True)
    big = cp.kron(np.eye(4), rho)
    cons = [rho >> 0, cp.real(cp.trace(rho)) == 1, big - w >> 0, big + w >> 0]
    prob = cp.Problem(cp.Maximize(cp.real(cp.trace(j @ w))), cons)
    prob.solve(solver="CLARABEL")
    return prob.value


@pytest.mark.parametrize(
    "pair, expected",
    [
        ((optimal_virtual_broadcaster, phase_covariant_cloner), 2 / 3),
        ((canonical_broadcaster, universal_cloner), 1.0),
    ],
)
def test_diamond_against_sdp(pair, expected):
    a, b = (f() for f in pair)
    sdp = _sdp_diamond(a - b)
    res = diamond_distance(a, b, starts=8)
    assert abs(sdp - expected) <= 1e-6
    assert abs(res.value - sdp) <= 1e-6


def test_diamond_random_channels_against_sdp(rng):
    a, b = random_cptp(rng), random_cptp(rng)
    sdp = _sdp_diamond(a - b)
    res = diamond_distance(a, b, starts=16)
    assert res.lower_cert - 1e-7 <= sdp <= res.upper_cert + 1e-7
    assert abs(res.value - sdp) <= 1e-5
