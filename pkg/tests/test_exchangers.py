import numpy as np
import pytest
from scipy.linalg import expm

from qtmachines.errors import InvalidInputError
from qtmachines.exchangers import (
    KINDS,
    ExchangerSetup,
    build_interactions,
    cycle_energetics_strong,
    doublet_pairs,
    engine_channel,
    equivalence_sweep,
    initial_composite,
    limit_cycle_strong,
    unitary_cycle,
)
from qtmachines.liouville import vec

SETUP = ExchangerSetup(omega_h=2.0, omega_c=1.0, beta_h=0.2, beta_c=3.0)
RHO_E = np.diag([0.5, 0.3, 0.2]).astype(complex)


def test_interactions_conserve_bare_energy():
    inter = build_interactions(SETUP)
    for h in (inter.H_oh, inter.H_oc, inter.H_ow):
        assert np.abs(h - h.conj().T).max() == 0.0
        assert np.abs(h @ inter.H_bare - inter.H_bare @ h).max() < 1e-12


def test_off_resonant_setup_rejected():
    with pytest.raises(InvalidInputError):
        ExchangerSetup(2.0, 1.0, 0.2, 3.0, gap_w=1.1)
    with pytest.raises(InvalidInputError):
        ExchangerSetup(1.0, 2.0, 0.2, 3.0)


def test_zero_coupling_is_zero_interaction():
    inter = build_interactions(ExchangerSetup(2.0, 1.0, 0.2, 3.0, g_h=0.0))
    assert not inter.H_oh.any()


def test_interaction_only_couples_resonant_doublets():
    inter = build_interactions(SETUP)
    h = inter.H_oh + inter.H_oc + inter.H_ow
    mask = np.zeros_like(h, dtype=bool)
    for i, j in doublet_pairs():
        mask[i, j] = mask[j, i] = True
    assert np.abs(h[~mask]).max() == 0.0
    assert np.all(np.abs(h[mask]) > 0)
    assert len(doublet_pairs()) == 12


def test_full_swap_time_transfers_hot_excitation():
    g = 0.8
    s = ExchangerSetup(2.0, 1.0, 0.2, 3.0, g_h=g)
    inter = build_interactions(s)
    psi = np.zeros(24, dtype=complex)
    psi[((0 * 2 + 1) * 2 + 0) * 2 + 0] = 1.0  # engine |1>, hot qubit excited
    out = expm(-1j * inter.H_oh * np.pi / (2 * g)) @ psi
    assert abs(out[((2 * 2 + 0) * 2 + 0) * 2 + 0]) ** 2 == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_cycle_unitary_and_energy_conserving(kind):
    u = unitary_cycle(kind, SETUP)
    assert np.abs(u @ u.conj().T - np.eye(24)).max() < 1e-12
    assert np.abs(unitary_cycle(kind, SETUP.with_tau(0.0)) - np.eye(24)).max() == 0.0
    inter = build_interactions(SETUP)
    rho0 = initial_composite(SETUP, RHO_E)
    rho1 = u @ rho0 @ u.conj().T
    assert abs(np.trace((rho1 - rho0) @ inter.H_bare)) < 1e-10


@pytest.mark.parametrize("kind", KINDS)
def test_first_law_over_one_cycle(kind):
    r = cycle_energetics_strong(kind, SETUP, RHO_E)
    assert abs(r.W + r.Q_h + r.Q_c + r.dE_engine) < 1e-10


def test_no_battery_coupling_no_work():
    s = ExchangerSetup(2.0, 1.0, 0.2, 3.0, g_w=0.0)
    assert cycle_energetics_strong("continuous", s, RHO_E).W == 0.0


def test_equivalence_orders():
    rows = equivalence_sweep(SETUP, np.logspace(-2.5, -0.5, 7), RHO_E)
    s = np.log([r.s_bar for r in rows])
    slope = lambda f: np.polyfit(s, np.log([getattr(r, f) for r in rows]), 1)[0]
    assert slope("dW_2st") == pytest.approx(4.0, abs=0.3)
    assert slope("offdiag_diff") == pytest.approx(3.0, abs=0.3)
    assert slope("diag_diff") >= 3.7


@pytest.mark.parametrize("kind", KINDS)
def test_limit_cycle_independent_of_start(kind):
    s = SETUP.with_tau(0.5)
    chan = engine_channel(kind, s)
    lc = limit_cycle_strong(kind, s)
    assert np.abs(chan @ vec(lc) - vec(lc)).max() < 1e-12
    for start in (np.diag([1.0, 0, 0]), np.diag([0, 0, 1.0]), np.eye(3) / 3):
        v = vec(start.astype(complex))
        for _ in range(3000):
            v = chan @ v
        assert np.abs(v - vec(lc)).max() < 1e-8


def test_limit_cycle_engine_efficiency():
    s = SETUP.with_tau(0.5)
    lc = limit_cycle_strong("two_stroke", s)
    r = cycle_energetics_strong("two_stroke", s, lc)
    assert abs(r.dE_engine) < 1e-12
    assert r.W > 0 and r.Q_h < 0
    assert r.W / -r.Q_h == pytest.approx(1 - s.omega_c / s.omega_h, rel=1e-9)
