"""Three-level Markovian heat engines in Liouville space.

Levels ``|1>, |2>, |3>`` are indices 0, 1, 2 with ``H_o = diag(0, w, w_h)`` and
``w = w_h - w_c``. The hot bath drives ``|1> <-> |3>``, the cold bath
``|2> <-> |3>`` and the (rotating-frame) drive ``|1> <-> |2>``.

``EngineConfig.epsilon`` and ``gamma_h``/``gamma_c`` are the values during
the stroke in which that coupling is on. The continuous machine runs all
couplings at once with the drive scaled by 1/3 and the baths by 2/3, so the
integrated couplings per cycle agree across the three machine types:

* continuous: ``exp(-i (L_h + L_c + H_w) tau)``
* two-stroke: bath ``tau/3`` (x3/2), work ``tau/3`` (x3), bath ``tau/3`` (x3/2)
* four-stroke: cold ``tau/6``, work ``tau/6``, hot ``tau/3``, work ``tau/6``,
  cold ``tau/6``, each at 3x the continuous generator

Generators follow the ``i d rho/dt = L rho`` convention of :mod:`liouville`.
All energies are measured with ``H_o`` in the rotating frame.
"""
from dataclasses import dataclass, replace

import numpy as np

from .errors import AmbiguityError, InvalidInputError
from .liouville import (
    action_norm,
    dissipator_superop,
    expect,
    fixed_point,
    hamiltonian_superop,
    integrated_propagator,
    propagate,
    stationary_state,
    unvec,
    vec,
)

CONT_DRIVE_FRACTION = 1.0 / 3.0
POP_INDEX = np.array([0, 4, 8])
KINDS = ("continuous", "two_stroke", "four_stroke")


def _ketbra(i, j, n=3):
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1.0
    return m


@dataclass(frozen=True)
class EngineConfig:
    omega_h: float
    omega_c: float
    epsilon: float
    gamma_h: float
    gamma_c: float
    beta_h: float
    beta_c: float
    tau_cyc: float = 1.0
    d: float = 1.0 / 3.0

    def __post_init__(self):
        if not self.omega_h > self.omega_c > 0:
            raise InvalidInputError("need omega_h > omega_c > 0")
        if self.gamma_h < 0 or self.gamma_c < 0:
            raise InvalidInputError("bath rates must be >= 0")
        if not 0 < self.d < 1:
            raise InvalidInputError("work-stroke fraction d must lie in (0, 1)")
        if not 0 <= self.beta_h < self.beta_c:
            raise InvalidInputError("need 0 <= beta_h < beta_c (T_h > T_c)")
        if self.tau_cyc < 0:
            raise InvalidInputError("tau_cyc must be >= 0")

    @property
    def omega(self):
        return self.omega_h - self.omega_c

    def with_tau(self, tau):
        return replace(self, tau_cyc=float(tau))


def nv_config(tau_cyc=1.0):
    """NV-centre-like parameters (time in microseconds, frequencies in rad/us).

    Drive 3.2 Mrad/s, total bath rate 0.41 MHz split evenly, transition
    2 pi x 2600 MHz. The bath gaps and temperatures are not fixed by the
    published parameters; we take ``w_c = w``, ``w_h = 2w``, ``w_h beta_h = 0.1``
    and ``w_c beta_c = 3``, which is deep in the inverted (engine) regime.
    """
    w = 2 * np.pi * 2600.0
    return EngineConfig(
        omega_h=2 * w,
        omega_c=w,
        epsilon=3.2,
        gamma_h=0.205,
        gamma_c=0.205,
        beta_h=0.1 / (2 * w),
        beta_c=3.0 / w,
        tau_cyc=tau_cyc,
    )


@dataclass(frozen=True)
class Generators:
    H_o: np.ndarray
    H_w: np.ndarray  # continuous-machine drive (1/3 of the stroke amplitude)
    L_h: np.ndarray
    L_c: np.ndarray
    Hw_super: np.ndarray

    @property
    def total(self):
        return self.L_h + self.L_c + self.Hw_super


def bath_operators(rate, gap, beta, lower, upper):
    """Lindblad pair driving ``lower <-> upper`` toward ratio ``exp(-gap beta)``."""
    return [
        np.sqrt(rate * np.exp(-gap * beta)) * _ketbra(upper, lower),
        np.sqrt(rate) * _ketbra(lower, upper),
    ]


def build_generators(cfg):
    """``(H_o, H_w, L_h, L_c)`` of the continuous machine in the rotating frame."""
    h_o = np.diag([0.0, cfg.omega, cfg.omega_h]).astype(complex)
    bath_scale = 1.0 - CONT_DRIVE_FRACTION
    l_h = dissipator_superop(bath_operators(bath_scale * cfg.gamma_h, cfg.omega_h, cfg.beta_h, 0, 2))
    l_c = dissipator_superop(bath_operators(bath_scale * cfg.gamma_c, cfg.omega_c, cfg.beta_c, 1, 2))
    h_w = CONT_DRIVE_FRACTION * cfg.epsilon * (_ketbra(0, 1) + _ketbra(1, 0))
    return Generators(h_o, h_w, l_h, l_c, hamiltonian_superop(h_w))


def dephase_superop(cfg=None):
    """Projector onto the population sector in the ``H_o`` eigenbasis."""
    d = np.zeros((9, 9), dtype=complex)
    d[POP_INDEX, POP_INDEX] = 1.0
    return d


@dataclass(frozen=True)
class Stroke:
    """One piecewise-constant segment: ``coeffs`` weight the parts (hot, cold, work)."""

    coeffs: tuple
    duration: float


@dataclass(frozen=True)
class CycleMachine:
    kind: str
    cfg: EngineConfig
    gens: Generators
    strokes: tuple
    dephased: bool
    lam: np.ndarray

    def parts(self):
        return (self.gens.L_h, self.gens.L_c, self.gens.Hw_super)

    def generator(self, stroke):
        return sum(c * p for c, p in zip(stroke.coeffs, self.parts()))

    def schedule(self):
        return [(self.generator(s), s.duration) for s in self.strokes]

    def stroke_map(self, stroke):
        lam = propagate(self.generator(stroke), stroke.duration)
        if self.dephased:
            d = dephase_superop()
            lam = d @ lam @ d
        return lam


def _strokes(kind, tau):
    if kind == "continuous":
        return (Stroke((1.0, 1.0, 1.0), tau),)
    if kind == "two_stroke":
        bath = Stroke((1.5, 1.5, 0.0), tau / 3)
        return (bath, Stroke((0.0, 0.0, 3.0), tau / 3), bath)
    if kind == "four_stroke":
        cold = Stroke((0.0, 3.0, 0.0), tau / 6)
        work = Stroke((0.0, 0.0, 3.0), tau / 6)
        return (cold, work, Stroke((3.0, 0.0, 0.0), tau / 3), work, cold)
    raise InvalidInputError(f"unknown machine kind {kind!r}")


def _machine(kind, cfg, dephased):
    gens = build_generators(cfg)
    strokes = _strokes(kind, cfg.tau_cyc)
    m = CycleMachine(kind, cfg, gens, strokes, dephased, np.eye(9, dtype=complex))
    if dephased and kind == "continuous":
        d = dephase_superop()
        lam = propagate(d @ gens.total @ d, cfg.tau_cyc)
        return replace(m, lam=lam)
    lam = np.eye(9, dtype=complex)
    for s in strokes:
        lam = m.stroke_map(s) @ lam
    return replace(m, lam=lam)


def continuous_map(cfg):
    return _machine("continuous", cfg, False)


def two_stroke_map(cfg):
    return _machine("two_stroke", cfg, False)


def four_stroke_map(cfg):
    return _machine("four_stroke", cfg, False)


def machine(kind, cfg):
    return _machine(kind, cfg, False)


def stochastic_machine(kind, cfg):
    """Dephased counterpart: populations only, before and after every stroke.

    For the continuous machine the generator itself is dephased, ``D L D``.
    """
    return _machine(kind, cfg, True)


def _fixed_point_by_squaring(lam, tol=1e-14, max_squarings=80):
    p = lam.copy()
    for _ in range(max_squarings):
        nxt = p @ p
        if np.abs(nxt - p).max() < tol:
            break
        p = nxt
    rho = unvec(p @ vec(np.eye(3) / 3))
    return 0.5 * (rho + rho.conj().T) / np.trace(rho).real


def limit_cycle(m):
    """State that the one-cycle map returns to itself."""
    if m.dephased:
        d = dephase_superop()
        gen = d @ m.gens.total @ d if m.kind == "continuous" else None
        # restrict to populations, where the dephased dynamics lives
        block = (gen if gen is not None else m.lam)[np.ix_(POP_INDEX, POP_INDEX)]
        if gen is not None:
            w, v = np.linalg.eig(block)
            p = v[:, np.argmin(np.abs(w))]
        else:
            w, v = np.linalg.eig(block)
            p = v[:, np.argmin(np.abs(w - 1))]
        p = np.real(p / p.sum())
        return np.diag(p).astype(complex)
    if m.kind == "continuous":
        return stationary_state(m.gens.total)
    try:
        return fixed_point(m.lam)
    except AmbiguityError:
        return _fixed_point_by_squaring(m.lam)


@dataclass(frozen=True)
class EngineReport:
    W: float
    Q_h: float
    Q_c: float
    P: float
    J_h: float
    J_c: float
    s_bar: float
    limit_cycle_state: np.ndarray
    first_law_residual: float


def cycle_energetics(m, rho=None):
    """Per-cycle work and heats at the limit cycle (or from ``rho``)."""
    rho = limit_cycle(m) if rho is None else rho
    h_o = m.gens.H_o
    parts = m.parts()
    d = dephase_superop()
    v = vec(rho)
    flows = np.zeros(3)
    start = v.copy()
    for s in m.strokes:
        gen = m.generator(s)
        if m.dephased:
            gen = d @ gen @ d if m.kind == "continuous" else gen
            v = d @ v
        lam, integral = integrated_propagator(gen, s.duration)
        acc = integral @ v
        for k, (c, part) in enumerate(zip(s.coeffs, parts)):
            if c:
                if m.dephased and m.kind == "continuous":
                    part = d @ part @ d
                flows[k] += c * (-1j * expect(h_o, part @ acc)).real
        v = lam @ v
        if m.dephased:
            v = d @ v
    q_h, q_c, w = flows
    d_e = (expect(h_o, v) - expect(h_o, start)).real
    tau = m.cfg.tau_cyc
    scale = max(abs(w), abs(q_h), abs(q_c), 1e-300)
    resid = (w + q_h + q_c - d_e) / scale
    return EngineReport(
        W=w, Q_h=q_h, Q_c=q_c,
        P=w / tau if tau else 0.0,
        J_h=q_h / tau if tau else 0.0,
        J_c=q_c / tau if tau else 0.0,
        s_bar=action_of(m.cfg),
        limit_cycle_state=rho,
        first_law_residual=resid,
    )


def action_of(cfg):
    """Normalized action ``[eps d / 2 + (gamma_h + gamma_c)(1 - d)] tau``."""
    return (0.5 * cfg.epsilon * cfg.d + (cfg.gamma_h + cfg.gamma_c) * (1 - cfg.d)) * cfg.tau_cyc


def schedule_action(m):
    """``sum ||L_i|| dt_i`` over the machine's strokes (spectral norm)."""
    return action_norm(m.schedule())


def stochastic_power_bound(cfg):
    """Largest power of any dephased engine: ``w eps^2 d^2 tau``."""
    return cfg.omega * cfg.epsilon**2 * cfg.d**2 * cfg.tau_cyc


def general_power_bound(cfg):
    """``(d^2 tau / 2) || <H_o| H_w^2 ||_inf`` with the stroke drive amplitude."""
    gens = build_generators(cfg)
    hw = gens.Hw_super / CONT_DRIVE_FRACTION
    row = vec(gens.H_o).conj() @ hw @ hw
    return 0.5 * cfg.d**2 * cfg.tau_cyc * np.abs(row).max()


@dataclass(frozen=True)
class SweepRow:
    tau_cyc: float
    s_bar: float
    P_cont: float
    P_2st: float
    P_4st: float
    P_stoch: float
    P_stoch_bound: float
    violation: bool


def _row(cfg, tau):
    c = cfg.with_tau(tau)
    p = {k: cycle_energetics(machine(k, c)).P for k in KINDS}
    p_st = cycle_energetics(stochastic_machine("two_stroke", c)).P
    bound = stochastic_power_bound(c)
    return SweepRow(tau, action_of(c), p["continuous"], p["two_stroke"], p["four_stroke"],
                    p_st, bound, bool(abs(p["two_stroke"]) > bound))


def equivalence_sweep(cfg, taus, workers=None):
    taus = [float(t) for t in taus]
    if workers and workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda t: _row(cfg, t), taus))
    return [_row(cfg, t) for t in taus]


@dataclass(frozen=True)
class SignatureReport:
    rows: list
    violations: list  # (tau, P_2st, bound) for the coherent two-stroke engine
    stochastic_violations: list


def signature_check(cfg, taus, workers=None):
    """Flag sweep points where the coherent two-stroke power beats the dephased bound."""
    rows = equivalence_sweep(cfg, taus, workers)
    viol = [(r.tau_cyc, r.P_2st, r.P_stoch_bound) for r in rows if abs(r.P_2st) > r.P_stoch_bound]
    st = [(r.tau_cyc, r.P_stoch, r.P_stoch_bound) for r in rows if abs(r.P_stoch) > r.P_stoch_bound]
    return SignatureReport(rows, viol, st)
