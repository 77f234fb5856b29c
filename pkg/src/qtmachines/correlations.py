"""Heat exchange between two initially correlated bodies.

Two systems with thermal marginals interact through an energy-conserving joint
unitary, so every unit of energy lost by one is gained by the other and no work
is done. For an initial product state heat flows from hot to cold. Initial
correlations can reverse the flow; the reversal available from classical
correlations alone is capped by ``ln D / |beta_A - beta_B|``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, InvalidInputError
from .hilbert import BipartiteState, check_hermitian, partial_trace, thermal_state, von_neumann_entropy

ENERGY_CONSERVATION_ATOL = 1e-10
MARGINAL_ATOL = 1e-9


def _as_state(s, dims=None):
    if isinstance(s, BipartiteState):
        return s
    return BipartiteState(np.asarray(s, dtype=complex), tuple(dims))


def mutual_information(s, dims=None):
    """``S_A + S_B - S_AB``."""
    s = _as_state(s, dims)
    return (von_neumann_entropy(s.reduced("A")) + von_neumann_entropy(s.reduced("B"))
            - von_neumann_entropy(s.rho))


def perfectly_correlated_state(D, basis_A=None, basis_B=None):
    """``(1/D) sum_k |e_k><e_k| x |f_k><f_k|`` (columns of the bases are the vectors)."""
    basis_A = np.eye(D, dtype=complex) if basis_A is None else np.asarray(basis_A, dtype=complex)
    basis_B = np.eye(D, dtype=complex) if basis_B is None else np.asarray(basis_B, dtype=complex)
    for name, b in (("basis_A", basis_A), ("basis_B", basis_B)):
        if b.shape != (D, D) or np.abs(b.conj().T @ b - np.eye(D)).max() > 1e-10:
            raise InvalidInputError(f"{name} is not an orthonormal basis of dimension {D}")
    rho = sum(np.kron(np.outer(basis_A[:, k], basis_A[:, k].conj()), np.outer(basis_B[:, k], basis_B[:, k].conj()))
              for k in range(D)) / D
    return BipartiteState(rho, (D, D))


def classical_mutual_information(s, dims=None, atol=1e-12):
    """Shannon mutual information of a state diagonal in the local product basis.

    Such states have zero discord, so this equals the quantum mutual information.
    Measurement optimization for general states is not attempted.
    """
    s = _as_state(s, dims)
    if np.abs(s.rho - np.diag(np.diag(s.rho))).max() > atol:
        raise InvalidInputError("state is not diagonal in the product basis")
    p = np.real(np.diag(s.rho)).reshape(s.dims)

    def h(x):
        x = x[x > 1e-14]
        return float(-np.sum(x * np.log(x)))

    return h(p.sum(1)) + h(p.sum(0)) - h(p.ravel())


def _qubit(gap):
    return np.diag([0.0, gap]).astype(complex)


def partial_swap(theta, gap_A=1.0, gap_B=1.0, phi=0.0):
    """Rotation by ``theta`` inside the ``{|01>, |10>}`` doublet of two equal-gap qubits."""
    if abs(gap_A - gap_B) > 1e-12 * max(1.0, abs(gap_A)):
        raise InvalidInputError("partial swap needs equal qubit gaps")
    u = np.eye(4, dtype=complex)
    c, s = np.cos(theta), np.sin(theta)
    u[1, 1] = u[2, 2] = c
    u[1, 2] = -1j * np.exp(1j * phi) * s
    u[2, 1] = -1j * np.exp(-1j * phi) * s
    return u


def correlated_thermal_state(rho_A, rho_B, chi=0.0, c=0.0):
    """``rho_A x rho_B + c (|00><00| - |01><01| - |10><10| + |11><11|) + chi |01><10| + h.c.``

    Both terms leave the (diagonal) qubit marginals unchanged. ``c`` adds
    classical population correlations, ``chi`` doublet coherence.
    """
    rho = np.kron(rho_A, rho_B).astype(complex)
    rho += c * np.diag([1.0, -1.0, -1.0, 1.0])
    rho[1, 2] += chi
    rho[2, 1] += np.conj(chi)
    return rho


def chi_range(rho_A, rho_B, c=0.0):
    """Largest ``|chi|`` keeping :func:`correlated_thermal_state` positive."""
    p = np.real(np.diag(np.kron(rho_A, rho_B))) + c * np.array([1.0, -1.0, -1.0, 1.0])
    if p.min() < 0:
        raise InvalidInputError("population correlation c makes the state negative")
    return float(np.sqrt(p[1] * p[2]))


def c_range(rho_A, rho_B):
    p = np.real(np.diag(np.kron(rho_A, rho_B)))
    return -min(p[0], p[3]), min(p[1], p[2])


def is_entangled_two_qubit(rho, atol=1e-12):
    """Peres-Horodecki test (exact for two qubits)."""
    t = np.asarray(rho).reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)
    return bool(np.linalg.eigvalsh(0.5 * (t + t.conj().T)).min() < -atol)


@dataclass(frozen=True)
class ExchangeScenario:
    H_A: np.ndarray
    H_B: np.ndarray
    beta_A: float
    beta_B: float
    rho_AB: np.ndarray
    U: np.ndarray

    def __post_init__(self):
        h_a = check_hermitian(self.H_A, "H_A")
        h_b = check_hermitian(self.H_B, "H_B")
        dims = (h_a.shape[0], h_b.shape[0])
        state = BipartiteState(np.asarray(self.rho_AB, dtype=complex), dims)
        for keep, h, beta in (("A", h_a, self.beta_A), ("B", h_b, self.beta_B)):
            if np.abs(state.reduced(keep) - thermal_state(h, beta)).max() > MARGINAL_ATOL:
                raise InvalidInputError(f"marginal {keep} is not thermal at its stated temperature")
        h_tot = self.total_hamiltonian
        u = np.asarray(self.U, dtype=complex)
        if np.abs(u @ u.conj().T - np.eye(u.shape[0])).max() > 1e-10:
            raise InvalidInputError("U is not unitary")
        if np.abs(u @ h_tot - h_tot @ u).max() > ENERGY_CONSERVATION_ATOL:
            raise InvalidInputError("U does not conserve H_A + H_B")

    @property
    def dims(self):
        return (np.shape(self.H_A)[0], np.shape(self.H_B)[0])

    @property
    def total_hamiltonian(self):
        d_a, d_b = self.dims
        return np.kron(self.H_A, np.eye(d_b)) + np.kron(np.eye(d_a), self.H_B)


@dataclass(frozen=True)
class ExchangeResult:
    Q_A: float
    Q_B: float
    dS_A: float
    dS_B: float
    I_initial: float
    I_final: float

    @property
    def dI(self):
        return self.I_final - self.I_initial


def heat_exchange(s):
    """Energy and entropy changes of each body under ``U``."""
    rho0 = np.asarray(s.rho_AB, dtype=complex)
    rho1 = s.U @ rho0 @ s.U.conj().T
    dims = s.dims
    out = []
    for keep, h in (("A", s.H_A), ("B", s.H_B)):
        r0, r1 = partial_trace(rho0, dims, keep), partial_trace(rho1, dims, keep)
        out.append((np.trace((r1 - r0) @ h).real, von_neumann_entropy(r1) - von_neumann_entropy(r0)))
    (q_a, ds_a), (q_b, ds_b) = out
    return ExchangeResult(q_a, q_b, ds_a, ds_b, mutual_information(rho0, dims), mutual_information(rho1, dims))


def anomalous_heat(s, result=None):
    """Heat gained by the hotter body (zero when the flow is normal)."""
    r = heat_exchange(s) if result is None else result
    q_hot = r.Q_A if s.beta_A < s.beta_B else r.Q_B
    return max(q_hot, 0.0)


def q_clas_bound(D, beta_A, beta_B):
    """``ln D / |beta_A - beta_B|``."""
    if D < 2:
        raise InvalidInputError("D must be >= 2")
    if beta_A == beta_B:
        raise DivergenceError("the classical bound is undefined at equal temperatures")
    return float(np.log(D) / abs(beta_A - beta_B))


def entanglement_witness(measured_Q, D, beta_A, beta_B):
    """``"entangled"`` if the anomalous heat beats the classical bound, else ``"inconclusive"``."""
    return "entangled" if measured_Q > q_clas_bound(D, beta_A, beta_B) else "inconclusive"


def qubit_scenario(gap, beta_A, beta_B, theta, chi=0.0, c=0.0, phi=0.0):
    h = _qubit(gap)
    rho = correlated_thermal_state(thermal_state(h, beta_A), thermal_state(h, beta_B), chi, c)
    return ExchangeScenario(h, h, beta_A, beta_B, rho, partial_swap(theta, gap, gap, phi))


@dataclass(frozen=True)
class WitnessRow:
    theta: float
    chi: float
    c: float
    Q_A: float
    Q_anomalous: float
    I_q_initial: float
    Q_clas: float
    entangled: bool
    verdict: str


def witness_sweep(gap, beta_A, beta_B, thetas, chi_fracs, cs=(0.0,)):
    """Sweep the partial swap angle and the correlation amplitudes.

    ``chi_fracs`` are fractions of the positivity limit; ``chi`` is taken
    imaginary, which is the phase that turns the coherence into backward flow
    for the swap convention of :func:`partial_swap`.
    """
    h = _qubit(gap)
    ra, rb = thermal_state(h, beta_A), thermal_state(h, beta_B)
    q_clas = q_clas_bound(2, beta_A, beta_B)
    sign = 1.0 if beta_A < beta_B else -1.0
    rows = []
    for c in cs:
        lim = chi_range(ra, rb, c)
        for f in chi_fracs:
            chi = 1j * sign * f * lim
            rho = correlated_thermal_state(ra, rb, chi, c)
            ent = is_entangled_two_qubit(rho)
            for th in thetas:
                s = ExchangeScenario(h, h, beta_A, beta_B, rho, partial_swap(th, gap, gap))
                r = heat_exchange(s)
                q_an = anomalous_heat(s, r)
                rows.append(WitnessRow(float(th), float(abs(chi)), float(c), r.Q_A, q_an, r.I_initial, q_clas,
                                       ent, entanglement_witness(q_an, 2, beta_A, beta_B)))
    return rows


@dataclass(frozen=True)
class BestQ:
    Q: float
    theta: float
    chi: float
    c: float
    Q_clas: float


def best_anomalous_q(rows):
    """Largest backward heat in a sweep; no claim that it saturates any bound."""
    best = max(rows, key=lambda r: r.Q_anomalous)
    return BestQ(best.Q_anomalous, best.theta, best.chi, best.c, best.Q_clas)
