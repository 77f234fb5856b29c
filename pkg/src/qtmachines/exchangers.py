"""Strong-coupling engine: a three-level engine swapping energy with fresh qubits.

The composite space is ``engine(3) x hot(2) x cold(2) x battery(2)``. Each
cycle the engine meets a fresh thermal hot and cold exchanger qubit and a fresh
battery qubit. Interactions are resonant swaps,
``H_ok = g_k (a_k^dag a_ok + a_k a_ok^dag)``, with engine lowering operators
``|1><3|`` (hot), ``|2><3|`` (cold) and ``|1><2|`` (battery). Everything is
written in the frame rotating with the bare Hamiltonian, which commutes with
the interaction.

Energetics follow the particles: ``W`` is the energy gained by the battery and
``Q_h``, ``Q_c`` the energy gained by the exchangers, so
``W + Q_h + Q_c + dE_engine = 0``. An engine therefore has ``W > 0`` and
``Q_h < 0`` here.
"""
from dataclasses import dataclass, field, replace
from functools import reduce

import numpy as np
from scipy.linalg import expm

from .errors import AmbiguityError, InvalidInputError
from .hilbert import partial_trace, thermal_state
from .liouville import fixed_point, unvec, vec

RESONANCE_TOL = 1e-12
DIMS = (3, 2, 2, 2)
KINDS = ("continuous", "two_stroke", "four_stroke")


def _ketbra(i, j, n):
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1.0
    return m


def _embed(engine=None, hot=None, cold=None, battery=None):
    ops = [engine, hot, cold, battery]
    return reduce(np.kron, [np.eye(d) if o is None else o for o, d in zip(ops, DIMS)])


@dataclass(frozen=True)
class ExchangerSetup:
    omega_h: float
    omega_c: float
    beta_h: float
    beta_c: float
    g_h: float = 1.0
    g_c: float = 0.7
    g_w: float = 0.5
    tau_cyc: float = 1.0
    beta_w: float = np.inf  # battery starts in its ground state by default
    gap_h: float = None
    gap_c: float = None
    gap_w: float = None

    def __post_init__(self):
        if not self.omega_h > self.omega_c > 0:
            raise InvalidInputError("need omega_h > omega_c > 0")
        if self.tau_cyc < 0:
            raise InvalidInputError("tau_cyc must be >= 0")
        for name, ref in (("gap_h", self.omega_h), ("gap_c", self.omega_c), ("gap_w", self.omega)):
            val = getattr(self, name)
            if val is None:
                object.__setattr__(self, name, ref)
            elif abs(val - ref) > RESONANCE_TOL * max(1.0, abs(ref)):
                raise InvalidInputError(f"{name}={val} is off resonance with the engine gap {ref}")

    @property
    def omega(self):
        return self.omega_h - self.omega_c

    def with_tau(self, tau):
        return replace(self, tau_cyc=float(tau))


@dataclass(frozen=True)
class Interactions:
    H_oh: np.ndarray
    H_oc: np.ndarray
    H_ow: np.ndarray
    H_bare: np.ndarray  # engine plus particles
    H_o: np.ndarray
    H_h: np.ndarray
    H_c: np.ndarray
    H_w: np.ndarray


def _qubit(gap):
    return np.diag([0.0, gap]).astype(complex)


def build_interactions(s):
    """Swap interactions and local Hamiltonians on the 24-dimensional composite."""
    a = _ketbra(0, 1, 2)
    h_o = np.diag([0.0, s.omega, s.omega_h]).astype(complex)
    pairs = (
        (s.g_h, dict(hot=a.conj().T), dict(hot=a), _ketbra(0, 2, 3)),
        (s.g_c, dict(cold=a.conj().T), dict(cold=a), _ketbra(1, 2, 3)),
        (s.g_w, dict(battery=a.conj().T), dict(battery=a), _ketbra(0, 1, 3)),
    )
    hs = []
    for g, up, down, low in pairs:
        hs.append(g * (_embed(**up) @ _embed(engine=low) + _embed(**down) @ _embed(engine=low.conj().T)))
    locals_ = (_embed(engine=h_o), _embed(hot=_qubit(s.gap_h)), _embed(cold=_qubit(s.gap_c)),
               _embed(battery=_qubit(s.gap_w)))
    bare = sum(locals_)
    for h in hs:
        if np.abs(h @ bare - bare @ h).max() > RESONANCE_TOL * max(1.0, np.abs(bare).max()):
            raise InvalidInputError("interaction does not conserve the bare energy")
    return Interactions(*hs, bare, *locals_)


def doublet_pairs(s=None):
    """Composite indices of the three resonant doublets coupled by the interaction."""

    def idx(e, h, c, w):
        return ((e * 2 + h) * 2 + c) * 2 + w

    out = []
    for h in (0, 1):
        for c in (0, 1):
            for w in (0, 1):
                if w == 0:
                    out.append((idx(1, h, c, 0), idx(0, h, c, 1)))  # |0_w 2> <-> |1_w 1>
                if h == 0:
                    out.append((idx(2, 0, c, w), idx(0, 1, c, w)))  # |0_h 3> <-> |1_h 1>
                if c == 0:
                    out.append((idx(2, h, 0, w), idx(1, h, 1, w)))  # |0_c 3> <-> |1_c 2>
    return out


def _strokes(kind, tau):
    # (weights on H_oh, H_oc, H_ow), duration
    if kind == "continuous":
        return [((1.0, 1.0, 1.0), tau)]
    if kind == "two_stroke":
        w = ((0.0, 0.0, 1.5), tau / 3)
        return [w, ((3.0, 3.0, 0.0), tau / 3), w]
    if kind == "four_stroke":
        c, w = ((0.0, 3.0, 0.0), tau / 6), ((0.0, 0.0, 3.0), tau / 6)
        return [c, w, ((3.0, 0.0, 0.0), tau / 3), w, c]
    raise InvalidInputError(f"unknown machine kind {kind!r}")


def unitary_cycle(kind, s, inter=None):
    """One-cycle unitary on the composite (first factor acts first)."""
    inter = build_interactions(s) if inter is None else inter
    parts = (inter.H_oh, inter.H_oc, inter.H_ow)
    u = np.eye(24, dtype=complex)
    for coeffs, dt in _strokes(kind, s.tau_cyc):
        h = sum(c * p for c, p in zip(coeffs, parts))
        u = expm(-1j * h * dt) @ u
    return u


def action_of(s, inter=None):
    """``tau ||H_oh + H_oc + H_ow||``."""
    inter = build_interactions(s) if inter is None else inter
    return s.tau_cyc * np.linalg.norm(inter.H_oh + inter.H_oc + inter.H_ow, 2)


def particle_states(s):
    return (thermal_state(_qubit(s.gap_h), s.beta_h), thermal_state(_qubit(s.gap_c), s.beta_c),
            thermal_state(_qubit(s.gap_w), s.beta_w))


def initial_composite(s, rho_engine):
    return reduce(np.kron, (rho_engine, *particle_states(s)))


@dataclass(frozen=True)
class StrongReport:
    W: float
    Q_h: float
    Q_c: float
    dE_engine: float
    rho_engine: np.ndarray = field(repr=False)
    rho_total: np.ndarray = field(repr=False)


def cycle_energetics_strong(kind, s, rho_engine, inter=None, u=None):
    """Battery and exchanger energy changes over one cycle with fresh particles."""
    inter = build_interactions(s) if inter is None else inter
    u = unitary_cycle(kind, s, inter) if u is None else u
    rho0 = initial_composite(s, rho_engine)
    rho1 = u @ rho0 @ u.conj().T
    delta = rho1 - rho0
    e = [np.trace(delta @ h).real for h in (inter.H_w, inter.H_h, inter.H_c, inter.H_o)]
    rho_e = partial_trace(rho1, (3, 8), keep=0)
    return StrongReport(e[0], e[1], e[2], e[3], rho_e, rho1)


def engine_channel(kind, s, inter=None):
    """Superoperator of one cycle on the reduced engine state."""
    inter = build_interactions(s) if inter is None else inter
    u = unitary_cycle(kind, s, inter)
    parts = particle_states(s)
    cols = []
    for k in range(9):
        e = np.zeros(9, dtype=complex)
        e[k] = 1.0
        big = u @ reduce(np.kron, (unvec(e), *parts)) @ u.conj().T
        cols.append(vec(partial_trace(big, (3, 8), keep=0)))
    return np.array(cols).T


def limit_cycle_strong(kind, s, rho0=None, tol=1e-12, max_cycles=100_000):
    """Reduced engine state repeated by the cycle with fresh particles."""
    chan = engine_channel(kind, s)
    try:
        return fixed_point(chan)
    except AmbiguityError:
        rho = np.eye(3, dtype=complex) / 3 if rho0 is None else rho0
        v = vec(rho)
        for _ in range(max_cycles):
            nxt = chan @ v
            if np.abs(nxt - v).max() < tol:
                return unvec(nxt)
            v = nxt
        raise


@dataclass(frozen=True)
class EquivalenceRow:
    tau_cyc: float
    s_bar: float
    W_cont: float
    W_2st: float
    W_4st: float
    dW_2st: float
    offdiag_diff: float
    diag_diff: float


def equivalence_sweep(s, taus, rho_engine):
    """Per ``tau``: works of the three kinds and sector norms of the state difference."""
    inter = build_interactions(s)
    rows = []
    for tau in taus:
        st = s.with_tau(tau)
        reps = {k: cycle_energetics_strong(k, st, rho_engine, inter) for k in KINDS}
        d = reps["two_stroke"].rho_total - reps["continuous"].rho_total
        diag = np.diag(np.diag(d))
        rows.append(EquivalenceRow(
            float(tau), action_of(st, inter),
            reps["continuous"].W, reps["two_stroke"].W, reps["four_stroke"].W,
            abs(reps["two_stroke"].W - reps["continuous"].W),
            np.abs(d - diag).max(), np.abs(diag).max(),
        ))
    return rows
