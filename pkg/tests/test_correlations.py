import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtmachines.correlations import (
    ExchangeScenario,
    best_anomalous_q,
    c_range,
    chi_range,
    classical_mutual_information,
    correlated_thermal_state,
    entanglement_witness,
    heat_exchange,
    is_entangled_two_qubit,
    mutual_information,
    partial_swap,
    perfectly_correlated_state,
    q_clas_bound,
    qubit_scenario,
    witness_sweep,
)
from qtmachines.errors import DivergenceError, InvalidInputError
from qtmachines.hilbert import BipartiteState, random_density_matrix, random_unitary, thermal_state

H = np.diag([0.0, 1.0]).astype(complex)


def test_mutual_information_limits():
    rng = np.random.default_rng(0)
    prod = BipartiteState.product(random_density_matrix(2, rng), random_density_matrix(3, rng))
    assert abs(mutual_information(prod)) < 1e-12
    for D in (2, 3):
        psi = np.eye(D).reshape(-1) / np.sqrt(D)
        bell = BipartiteState(np.outer(psi, psi).astype(complex), (D, D))
        assert mutual_information(bell) == pytest.approx(2 * np.log(D), abs=1e-10)


def test_perfectly_correlated_state():
    s = perfectly_correlated_state(2)
    assert np.allclose(s.rho, np.diag([0.5, 0, 0, 0.5]))
    assert mutual_information(s) == pytest.approx(np.log(2), abs=1e-12)
    assert np.allclose(s.reduced("A"), np.eye(2) / 2)
    u = random_unitary(3, np.random.default_rng(1))
    s3 = perfectly_correlated_state(3, u, np.eye(3))
    assert mutual_information(s3) == pytest.approx(np.log(3), abs=1e-10)
    assert np.allclose(s3.reduced("B"), np.eye(3) / 3)
    with pytest.raises(InvalidInputError):
        perfectly_correlated_state(2, np.array([[1, 1], [0, 1]]))


def test_zero_discord_classical_equals_quantum_information():
    ra, rb = thermal_state(H, 0.5), thermal_state(H, 2.0)
    lo, hi = c_range(ra, rb)
    for c in np.linspace(lo, hi, 7):
        rho = correlated_thermal_state(ra, rb, 0.0, c)
        ic = classical_mutual_information(rho, (2, 2))
        iq = mutual_information(rho, (2, 2))
        assert ic == pytest.approx(iq, abs=1e-12)
        assert -1e-12 <= ic <= np.log(2) + 1e-12


def test_partial_swap_properties():
    h_tot = np.kron(H, np.eye(2)) + np.kron(np.eye(2), H)
    assert np.array_equal(partial_swap(0.0), np.eye(4))
    for th in np.random.default_rng(2).uniform(0, np.pi, 10):
        u = partial_swap(th)
        assert np.abs(u @ h_tot - h_tot @ u).max() < 1e-12
        assert np.abs(u @ u.conj().T - np.eye(4)).max() < 1e-15
    with pytest.raises(InvalidInputError):
        partial_swap(0.3, 1.0, 2.0)


def test_full_swap_exchanges_temperatures():
    s = qubit_scenario(1.0, 0.5, 2.0, np.pi / 2)
    rho1 = s.U @ s.rho_AB @ s.U.conj().T
    from qtmachines.hilbert import partial_trace

    assert np.allclose(partial_trace(rho1, (2, 2), "A"), thermal_state(H, 2.0), atol=1e-14)
    assert np.allclose(partial_trace(rho1, (2, 2), "B"), thermal_state(H, 0.5), atol=1e-14)


def test_scenario_validation():
    with pytest.raises(InvalidInputError):
        ExchangeScenario(H, H, 0.5, 2.0, np.kron(thermal_state(H, 1.0), thermal_state(H, 2.0)), np.eye(4))
    bad_u = np.kron(np.array([[0, 1], [1, 0]]), np.eye(2)).astype(complex)
    with pytest.raises(InvalidInputError):
        qubit_scenario(1.0, 0.5, 2.0, 0.0).__class__(
            H, H, 0.5, 2.0, np.kron(thermal_state(H, 0.5), thermal_state(H, 2.0)), bad_u)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.05, 3.0), st.floats(0.0, np.pi), st.floats(-1.0, 1.0), st.floats(0, 1))
def test_exchange_invariants(beta_a, beta_b, theta, chi_frac, c_frac):
    ra, rb = thermal_state(H, beta_a), thermal_state(H, beta_b)
    lo, hi = c_range(ra, rb)
    c = lo + c_frac * (hi - lo)
    chi = 1j * chi_frac * chi_range(ra, rb, c)
    s = ExchangeScenario(H, H, beta_a, beta_b, correlated_thermal_state(ra, rb, chi, c), partial_swap(theta))
    r = heat_exchange(s)
    assert abs(r.Q_A + r.Q_B) < 1e-12
    assert r.dS_A + r.dS_B == pytest.approx(r.dI, abs=1e-10)
    # thermal marginals minimize free energy
    assert beta_a * r.Q_A - r.dS_A >= -1e-10
    assert beta_b * r.Q_B - r.dS_B >= -1e-10
    assert beta_a * r.Q_A + beta_b * r.Q_B >= r.dI - 1e-10


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.05, 3.0), st.floats(0.0, np.pi))
def test_product_states_flow_hot_to_cold(beta_a, beta_b, theta):
    r = heat_exchange(qubit_scenario(1.0, beta_a, beta_b, theta))
    assert beta_a * r.Q_A + beta_b * r.Q_B >= -1e-12
    if beta_a < beta_b:
        assert r.Q_A <= 1e-15


def test_q_clas_bound():
    assert q_clas_bound(2, 1.0, 2.0) == pytest.approx(np.log(2))
    assert q_clas_bound(3, 1.0, 2.0) == pytest.approx(np.log(3))
    assert q_clas_bound(2, 1.0, 3.0) == pytest.approx(0.5 * q_clas_bound(2, 1.0, 2.0))
    with pytest.raises(DivergenceError):
        q_clas_bound(2, 1.0, 1.0)


def test_witness_verdicts():
    qc = q_clas_bound(2, 1.0, 2.0)
    assert entanglement_witness(0.0, 2, 1.0, 2.0) == "inconclusive"
    assert entanglement_witness(1.1 * qc, 2, 1.0, 2.0) == "entangled"


def test_ppt_test():
    psi = np.array([0, 1, 1, 0]) / np.sqrt(2)
    assert is_entangled_two_qubit(np.outer(psi, psi))
    assert not is_entangled_two_qubit(np.eye(4) / 4)


def test_sweep_zero_discord_never_anomalous_and_coherence_wins():
    thetas = np.linspace(0, np.pi / 2, 31)
    ra, rb = thermal_state(H, 0.5), thermal_state(H, 2.0)
    lo, hi = c_range(ra, rb)
    cs = np.linspace(lo, hi, 9)[:-1] * 0.999
    rows = witness_sweep(1.0, 0.5, 2.0, thetas, np.linspace(0, 1, 11), cs)
    zd = [r for r in rows if r.chi == 0]
    assert best_anomalous_q(zd).Q == 0.0
    assert all(r.verdict == "inconclusive" for r in zd)
    assert best_anomalous_q(rows).Q > 0.05
    assert any(r.entangled and r.Q_anomalous > 0 for r in rows)


def test_coherence_only_family_is_separable():
    ra, rb = thermal_state(H, 0.5), thermal_state(H, 2.0)
    lim = chi_range(ra, rb)
    for f in np.linspace(0, 1, 11):
        assert not is_entangled_two_qubit(correlated_thermal_state(ra, rb, 1j * f * lim), atol=1e-12)
