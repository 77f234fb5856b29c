import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm, logm, sqrtm

from qtmachines.errors import DivergenceError, InvalidInputError
from qtmachines.hilbert import (
    BipartiteState,
    bures_length,
    check_density_matrix,
    fidelity,
    partial_trace,
    random_density_matrix,
    random_hermitian,
    random_unitary,
    relative_entropy,
    thermal_state,
    von_neumann_entropy,
)

QUBIT = np.diag([0.0, 1.0])


def test_thermal_zero_temperature_is_ground_projector():
    rho = thermal_state(QUBIT, np.inf)
    assert np.allclose(rho, np.diag([1.0, 0.0]))


def test_thermal_degenerate_ground_space_is_uniform():
    rho, z = thermal_state(np.diag([0.0, 0.0, 2.0]), np.inf, return_partition=True)
    assert np.allclose(rho, np.diag([0.5, 0.5, 0.0]))
    assert z == 2.0


def test_thermal_infinite_temperature_is_maximally_mixed():
    rng = np.random.default_rng(1)
    h = random_hermitian(4, rng)
    assert np.allclose(thermal_state(h, 0.0), np.eye(4) / 4)


def test_thermal_qubit_excited_population():
    rho = thermal_state(QUBIT, 1.0)
    assert rho[1, 1].real == pytest.approx(np.exp(-1) / (1 + np.exp(-1)), abs=1e-15)


def test_thermal_rejects_non_hermitian():
    with pytest.raises(InvalidInputError):
        thermal_state(np.array([[0, 1], [0, 0]]), 1.0)


def test_thermal_matches_expm_and_commutes():
    rng = np.random.default_rng(2)
    for _ in range(20):
        h = random_hermitian(5, rng)
        beta = rng.uniform(0.1, 3)
        rho = thermal_state(h, beta)
        ref = expm(-beta * h)
        assert np.allclose(rho, ref / np.trace(ref), atol=1e-12)
        assert np.abs(rho @ h - h @ rho).max() <= 1e-12 * np.abs(h).max() * 10


def test_entropy_values():
    assert von_neumann_entropy(np.diag([1.0, 0.0])) == 0.0
    assert von_neumann_entropy(np.eye(3) / 3) == pytest.approx(np.log(3), abs=1e-14)
    p = np.exp(-1) / (1 + np.exp(-1))
    expected = -(p * np.log(p) + (1 - p) * np.log(1 - p))
    assert von_neumann_entropy(thermal_state(QUBIT, 1.0)) == pytest.approx(expected, abs=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_entropy_unitarily_invariant_and_bounded(seed, dim):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(dim, rng)
    u = random_unitary(dim, rng)
    s = von_neumann_entropy(rho)
    assert abs(von_neumann_entropy(u @ rho @ u.conj().T) - s) < 1e-10
    assert -1e-12 <= s <= np.log(dim) + 1e-12


def test_relative_entropy_self_is_zero():
    rho = thermal_state(QUBIT, 1.3)
    assert abs(relative_entropy(rho, rho)) < 1e-14


def test_relative_entropy_support_violation():
    with pytest.raises(DivergenceError):
        relative_entropy(np.diag([0.0, 1.0]), np.diag([1.0, 0.0]))


def test_relative_entropy_qubit_thermal_pair():
    rho, sigma = thermal_state(QUBIT, 1.0), thermal_state(QUBIT, 2.0)
    p = np.diag(rho).real
    s = np.diag(sigma).real
    assert relative_entropy(rho, sigma) == pytest.approx((p * np.log(p / s)).sum(), abs=1e-14)
    # frozen value from the direct eigen-sum
    assert relative_entropy(rho, sigma) == pytest.approx(0.08260774489474482, rel=1e-12)


def test_relative_entropy_rank_deficient_rho_is_finite():
    sigma = np.eye(2) / 2
    assert relative_entropy(np.diag([1.0, 0.0]), sigma) == pytest.approx(np.log(2))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_klein_inequality_against_logm(seed, dim):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(dim, rng)
    sigma = random_density_matrix(dim, rng)
    d = relative_entropy(rho, sigma)
    ref = np.trace(rho @ (logm(rho) - logm(sigma))).real
    assert d >= -1e-10
    assert d == pytest.approx(ref, abs=1e-9)


def test_fidelity_and_bures_limits():
    rho = thermal_state(QUBIT, 0.7)
    assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-12)
    assert bures_length(rho, rho) < 1e-6
    zero, one = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    assert fidelity(zero, one) == 0.0
    assert bures_length(zero, one) == pytest.approx(np.pi / 2)


def test_fidelity_against_sqrtm():
    rng = np.random.default_rng(5)
    for _ in range(20):
        rho = random_density_matrix(3, rng)
        sigma = random_density_matrix(3, rng)
        sq = sqrtm(rho)
        ref = np.trace(sqrtm(sq @ sigma @ sq)).real ** 2
        assert fidelity(rho, sigma) == pytest.approx(ref, abs=1e-10)
        assert fidelity(sigma, rho) == pytest.approx(ref, abs=1e-10)
    rho, sigma = thermal_state(QUBIT, 1.0), thermal_state(QUBIT, 2.0)
    p, s = np.diag(rho).real, np.diag(sigma).real
    assert fidelity(rho, sigma) == pytest.approx(np.sum(np.sqrt(p * s)) ** 2, abs=1e-15)


def test_partial_trace_product_and_bell():
    rng = np.random.default_rng(7)
    a = random_density_matrix(2, rng)
    b = random_density_matrix(3, rng)
    state = BipartiteState.product(a, b)
    assert np.allclose(state.reduced("A"), a, atol=1e-12)
    assert np.allclose(state.reduced("B"), b, atol=1e-12)
    bell = np.zeros(4)
    bell[[0, 3]] = 1 / np.sqrt(2)
    rho = np.outer(bell, bell)
    assert np.allclose(partial_trace(rho, (2, 2), "A"), np.eye(2) / 2)


def test_partial_trace_explicit_contraction():
    rng = np.random.default_rng(8)
    rho = random_density_matrix(6, rng)
    ref_a = np.array([[sum(rho[i * 3 + k, j * 3 + k] for k in range(3)) for j in range(2)] for i in range(2)])
    ref_b = np.array([[sum(rho[k * 3 + i, k * 3 + j] for k in range(2)) for j in range(3)] for i in range(3)])
    assert np.allclose(partial_trace(rho, (2, 3), 0), ref_a, atol=1e-15)
    assert np.allclose(partial_trace(rho, (2, 3), 1), ref_b, atol=1e-15)


def test_partial_trace_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        partial_trace(np.eye(4) / 4, (2, 3), "A")


def test_partial_trace_random_suite_valid_states():
    rng = np.random.default_rng(9)
    for _ in range(200):
        da, db = rng.integers(2, 4, size=2)
        rho = random_density_matrix(da * db, rng, rank=int(rng.integers(1, da * db + 1)))
        for keep in ("A", "B"):
            check_density_matrix(partial_trace(rho, (da, db), keep))


def test_density_matrix_validation():
    with pytest.raises(InvalidInputError):
        check_density_matrix(np.diag([0.6, 0.6]))
    with pytest.raises(InvalidInputError):
        check_density_matrix(np.diag([1.2, -0.2]))
