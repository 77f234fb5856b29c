"""Quantum friction of a driven, closed system.

A state thermal in ``H_i`` at ``beta_i`` is driven unitarily to ``rho_tau``
while ``H_i -> H_f``. The ideal reference is the thermal state of ``H_f`` at
``beta_f``, reachable adiabatically only if every gap scales by
``beta_i / beta_f``. The friction work is the energy excess of ``rho_tau``
over that reference; it equals ``S(rho_tau || rho_f) / beta_f``.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConvergenceError, DegeneracyError, InvalidInputError, UnsupportedError
from .hilbert import bures_length, check_hermitian, relative_entropy, thermal_state

BURES_COEFF = 8 / np.pi**2
PRINTED_BURES_COEFF = 8 / np.pi
COMPRESSION_RTOL = 1e-9
EVOLVE_TOL = 1e-8
MAX_STEPS = 2**16
DEGENERACY_RTOL = 1e-9


@dataclass(frozen=True)
class DriveProtocol:
    """``H(t)`` on ``[0, t_f]``; ``dH`` is the time derivative if known."""

    H: Callable
    t_f: float
    beta_i: float
    beta_f: float
    dH: Optional[Callable] = None
    n_steps: int = 16

    def __post_init__(self):
        if self.t_f < 0:
            raise InvalidInputError("t_f must be >= 0")
        if self.beta_i <= 0 or self.beta_f <= 0:
            raise InvalidInputError("inverse temperatures must be positive")
        if self.n_steps < 1:
            raise InvalidInputError("n_steps must be >= 1")

    @property
    def H_i(self):
        return check_hermitian(np.asarray(self.H(0.0), dtype=complex), "H(0)")

    @property
    def H_f(self):
        return check_hermitian(np.asarray(self.H(self.t_f), dtype=complex), "H(t_f)")

    def derivative(self, t, h=None):
        if self.dH is not None:
            return np.asarray(self.dH(t), dtype=complex)
        h = h if h is not None else 1e-5 * max(self.t_f, 1e-300)
        lo, hi = max(t - h, 0.0), min(t + h, self.t_f)
        return (np.asarray(self.H(hi)) - np.asarray(self.H(lo))) / (hi - lo)


def _step(h, dt):
    e, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * e * dt)) @ v.conj().T


# fourth-order commutator-free product on the two Gauss nodes of each step
_GAUSS = (0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6)
_CF_A = (0.25 - np.sqrt(3) / 6, 0.25 + np.sqrt(3) / 6)


def _cf4_step(p, t, dt):
    h1 = np.asarray(p.H(t + _GAUSS[0] * dt), dtype=complex)
    h2 = np.asarray(p.H(t + _GAUSS[1] * dt), dtype=complex)
    first = _step(_CF_A[1] * h1 + _CF_A[0] * h2, dt)
    second = _step(_CF_A[0] * h1 + _CF_A[1] * h2, dt)
    return second @ first


def _propagator(p, n):
    dt = p.t_f / n
    u = np.eye(p.H_i.shape[0], dtype=complex)
    for k in range(n):
        u = _cf4_step(p, k * dt, dt) @ u
    return u


def initial_state(p):
    return thermal_state(p.H_i, p.beta_i)


def reference_state(p):
    return thermal_state(p.H_f, p.beta_f)


def evolve_unitary(p, tol=EVOLVE_TOL, max_steps=MAX_STEPS):
    """``rho_tau`` by short-time products of exponentials, halving the step until converged."""
    rho_i = initial_state(p)
    if p.t_f == 0:
        return rho_i
    n = p.n_steps
    u = _propagator(p, n)
    prev = u @ rho_i @ u.conj().T
    while n < max_steps:
        n *= 2
        u = _propagator(p, n)
        rho = u @ rho_i @ u.conj().T
        if np.abs(rho - prev).max() < tol:
            return rho
        prev = rho
    raise ConvergenceError(f"time stepping not converged at {n} steps")


def trajectory(p, n):
    """States on the uniform grid ``t_k = k t_f / n``."""
    rho = initial_state(p)
    dt = p.t_f / n
    out = [rho]
    for k in range(n):
        u = _cf4_step(p, k * dt, dt)
        rho = u @ rho @ u.conj().T
        out.append(rho)
    return np.linspace(0.0, p.t_f, n + 1), out


def check_compression(p, rtol=COMPRESSION_RTOL):
    """Raise unless every gap of ``H_f`` is ``beta_i / beta_f`` times that of ``H_i``."""
    e_i = np.linalg.eigvalsh(p.H_i)
    e_f = np.linalg.eigvalsh(p.H_f)
    g_i, g_f = e_i - e_i[0], e_f - e_f[0]
    ratio = p.beta_i / p.beta_f
    scale = max(np.abs(g_f).max(), 1e-300)
    if np.abs(g_f - ratio * g_i).max() > rtol * scale:
        raise UnsupportedError("final spectrum is not the initial one compressed by beta_i/beta_f")


def friction_work(p, rho_tau=None):
    """``sum_n e_n^f (<n_f|rho_tau|n_f> - P_n^f)``."""
    check_compression(p)
    rho_tau = evolve_unitary(p) if rho_tau is None else rho_tau
    e_f, v_f = np.linalg.eigh(p.H_f)
    e_i = np.linalg.eigvalsh(p.H_i)
    # P_n^f = P_n^i once the compression condition holds
    w = np.exp(-p.beta_i * (e_i - e_i[0]))
    pops_ref = w / w.sum()
    pops_tau = np.real(np.einsum("in,ij,jn->n", v_f.conj(), rho_tau, v_f))
    return float(np.dot(e_f - e_f[0], pops_tau - pops_ref))


def friction_entropy(p, rho_tau=None):
    """``S(rho_tau || rho_f) / beta_f``."""
    rho_tau = evolve_unitary(p) if rho_tau is None else rho_tau
    return relative_entropy(rho_tau, reference_state(p)) / p.beta_f


def bures_bound(p, rho_tau=None, coefficient=BURES_COEFF):
    """Lower bound ``coefficient * L(rho_tau, rho_f)^2 / beta_f`` on the friction work."""
    rho_tau = evolve_unitary(p) if rho_tau is None else rho_tau
    return coefficient * bures_length(rho_tau, reference_state(p)) ** 2 / p.beta_f


def _eig_checked(h, t, rtol=DEGENERACY_RTOL):
    e, v = np.linalg.eigh(h)
    scale = max(np.abs(e).max(), 1.0)
    if e.size > 1 and np.diff(e).min() < rtol * scale:
        raise DegeneracyError(f"levels cross at t = {t:.6g}", time=t)
    return e, v


@dataclass(frozen=True)
class PowerSplit:
    t: np.ndarray
    P_clas: np.ndarray
    P_coh: np.ndarray


def power_split(p, times, states):
    """Classical and coherent parts of ``tr(dH/dt rho)`` in the instantaneous eigenbasis."""
    p_clas, p_coh = [], []
    for t, rho in zip(times, states):
        e, v = _eig_checked(np.asarray(p.H(t), dtype=complex), t)
        hdot = v.conj().T @ p.derivative(t) @ v
        r = v.conj().T @ rho @ v
        # d e_n/dt = <n|dH|n>; (e_n - e_l)<l|d n> = <l|dH|n> off the diagonal
        p_clas.append(np.real(np.diag(hdot) @ np.diag(r)))
        off = hdot - np.diag(np.diag(hdot))
        p_coh.append(np.real(np.sum(off * r.T)))
    return PowerSplit(np.asarray(times, dtype=float), np.array(p_clas), np.array(p_coh))


def eigvec_derivative_fd(p, t, h=1e-5):
    """``<e_l| d e_n/dt>`` by central differences of phase-aligned eigenvectors."""
    _, v0 = _eig_checked(np.asarray(p.H(t), dtype=complex), t)
    vs = []
    for s in (t - h, t + h):
        _, v = _eig_checked(np.asarray(p.H(s), dtype=complex), s)
        # align each column's phase to maximal overlap with the central frame
        ov = np.einsum("in,in->n", v0.conj(), v)
        v = v * (np.conj(ov) / np.abs(ov))
        vs.append(v)
    dv = (vs[1] - vs[0]) / (2 * h)
    return v0.conj().T @ dv


def eigvec_derivative_formula(p, t):
    """Off-diagonal ``<e_l|dH|e_n> / (e_n - e_l)``; zero on the diagonal."""
    e, v = _eig_checked(np.asarray(p.H(t), dtype=complex), t)
    hdot = v.conj().T @ p.derivative(t) @ v
    gap = e[None, :] - e[:, None]
    out = np.zeros_like(hdot)
    mask = ~np.eye(len(e), dtype=bool)
    out[mask] = hdot[mask] / gap[mask]
    return out


def random_protocol(dim, rng, beta_i=1.0, beta_f=1.5, t_f=1.0, mix=1.0):
    """Smooth interpolation from a random ``H_i`` to a rotated, compressed copy.

    ``mix`` scales the generator of the rotation; ``mix = 0`` commutes.
    """
    from .hilbert import random_hermitian

    h_i = random_hermitian(dim, rng)
    k = random_hermitian(dim, rng)
    e, v = np.linalg.eigh(k)
    rot = (v * np.exp(-1j * mix * e)) @ v.conj().T
    h_f = (beta_i / beta_f) * (rot @ h_i @ rot.conj().T)

    def s(t):
        return np.sin(0.5 * np.pi * t / t_f) ** 2 if t_f else 1.0

    def ds(t):
        return 0.5 * np.pi / t_f * np.sin(np.pi * t / t_f)

    return DriveProtocol(
        H=lambda t: (1 - s(t)) * h_i + s(t) * h_f,
        t_f=t_f,
        beta_i=beta_i,
        beta_f=beta_f,
        dH=lambda t: ds(t) * (h_f - h_i),
    )


def landau_zener(delta=1.0, sweep=4.0, t_f=2.0, beta=1.0):
    """Two-level sweep ``(delta sx + v (t - t_f/2) sz) / 2``; end spectra coincide."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sz = np.diag([1.0, -1.0]).astype(complex)
    v = sweep
    return DriveProtocol(
        H=lambda t: 0.5 * (delta * sx + v * (t - 0.5 * t_f) * sz),
        t_f=t_f,
        beta_i=beta,
        beta_f=beta,
        dH=lambda t: 0.5 * v * sz,
    )
