"""Semiclassical hbar^2 corrections to thermal energies and Otto-cycle work.

The position marginal of the thermal Wigner function is expanded as
``P = P_clas + hbar^2 P_2 + O(hbar^4)`` with ``P_clas = exp(-V/T)``
(unnormalized). ``e2_qc`` is the hbar^2 coefficient of the thermal energy,
so ``<H>_T = E_clas + hbar^2 * e2_qc + O(hbar^4)``.

Potentials carry analytic first and second derivatives (diagonal of the
Hessian). Integrals use adaptive quadrature over a finite box that is chosen
per temperature so the Boltzmann factor at the edges is negligible.
"""
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special
from scipy.linalg import eigh

from .errors import ConvergenceError, InvalidInputError

EDGE_DECAY = 1e-12
DOMAIN_EXPONENT = 40.0
QUAD_EPSREL = 1e-12


@dataclass(frozen=True)
class PotentialModel:
    """Potential ``V(x)`` on ``M <= 3`` coordinates.

    ``V``, ``dV`` and ``d2V`` take an array of shape ``(M,)``; the latter two
    return arrays of shape ``(M,)``. ``bounds(T)`` returns per-axis
    ``(lo, hi)`` pairs. ``hard_walls`` marks a physical box whose edges need
    not show Boltzmann decay.
    """

    V: Callable
    dV: Optional[Callable]
    d2V: Optional[Callable]
    masses: tuple
    bounds: Callable
    hard_walls: bool = False
    points: tuple = ()

    def __post_init__(self):
        if not 1 <= len(self.masses) <= 3:
            raise InvalidInputError("only 1 to 3 coordinates are supported")
        if any(m <= 0 for m in self.masses):
            raise InvalidInputError("masses must be positive")

    @property
    def dim(self):
        return len(self.masses)


def _as_point(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


def harmonic_potential(omega, mass=1.0):
    """``sum_k m_k w_k^2 x_k^2 / 2``; ``omega`` and ``mass`` may be sequences."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    mass = np.broadcast_to(np.asarray(mass, dtype=float), omega.shape).copy()
    k = mass * omega**2

    def bounds(T):
        half = np.sqrt(2 * DOMAIN_EXPONENT * T / k)
        return [(-h, h) for h in half]

    return PotentialModel(
        V=lambda x: 0.5 * float(np.dot(k, _as_point(x) ** 2)),
        dV=lambda x: k * _as_point(x),
        d2V=lambda x: k.copy(),
        masses=tuple(mass),
        bounds=bounds,
        points=(0.0,),
    )


def power_law_potential(a, n, mass=1.0):
    """One-dimensional ``a * x^(2n)``."""
    if a <= 0 or n < 1 or int(n) != n:
        raise InvalidInputError("need a > 0 and integer n >= 1")
    n = int(n)

    def bounds(T):
        half = (DOMAIN_EXPONENT * T / a) ** (1.0 / (2 * n))
        return [(-half, half)]

    return PotentialModel(
        V=lambda x: a * float(_as_point(x)[0]) ** (2 * n),
        dV=lambda x: np.array([2 * n * a * float(_as_point(x)[0]) ** (2 * n - 1)]),
        d2V=lambda x: np.array([2 * n * (2 * n - 1) * a * float(_as_point(x)[0]) ** (2 * n - 2)]),
        masses=(float(mass),),
        bounds=bounds,
        points=(0.0,),
    )


def flat_potential(length, value=0.0, mass=1.0):
    """Constant potential inside a hard-walled interval ``[0, length]``."""
    return PotentialModel(
        V=lambda x: float(value),
        dV=lambda x: np.zeros(1),
        d2V=lambda x: np.zeros(1),
        masses=(float(mass),),
        bounds=lambda T: [(0.0, float(length))],
        hard_walls=True,
    )


def finite_difference_potential(V, masses, bounds, scale=1.0, points=()):
    """Wrap a bare ``V`` with central-difference derivatives.

    The step is ``eps^(1/3) * scale``.
    """
    h = np.finfo(float).eps ** (1.0 / 3.0) * scale
    m = len(masses)

    def dV(x):
        x = _as_point(x)
        out = np.empty(m)
        for k in range(m):
            e = np.zeros(m)
            e[k] = h
            out[k] = (V(x + e) - V(x - e)) / (2 * h)
        return out

    def d2V(x):
        x = _as_point(x)
        out = np.empty(m)
        v0 = V(x)
        # second differences need a larger step to keep rounding below truncation error
        h2 = np.finfo(float).eps ** 0.25 * scale
        for k in range(m):
            e = np.zeros(m)
            e[k] = h2
            out[k] = (V(x + e) - 2 * v0 + V(x - e)) / h2**2
        return out

    return PotentialModel(V, dV, d2V, tuple(float(x) for x in masses), bounds, points=tuple(points))


def _check_integrable(pot, T):
    if T <= 0:
        raise InvalidInputError(f"T must be > 0, got {T!r}")
    if pot.hard_walls:
        return
    bounds = pot.bounds(T)
    centre = np.array([0.5 * (lo + hi) for lo, hi in bounds])
    v_ref = pot.V(centre)
    for p in pot.points:
        v_ref = min(v_ref, pot.V(np.full(pot.dim, p)))
    for k, (lo, hi) in enumerate(bounds):
        for edge in (lo, hi):
            x = centre.copy()
            x[k] = edge
            if np.exp(-(pot.V(x) - v_ref) / T) > EDGE_DECAY:
                raise InvalidInputError("exp(-V/T) does not decay at the integration box edge")


def _integrate(f, pot, T, epsrel=QUAD_EPSREL):
    bounds = pot.bounds(T)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        if pot.dim == 1:
            lo, hi = bounds[0]
            pts = [p for p in pot.points if lo < p < hi] or None
            val, _ = integrate.quad(lambda x: f(np.array([x])), lo, hi, epsabs=0, epsrel=epsrel,
                                    limit=400, points=pts)
        else:
            opts = {"epsabs": 0, "epsrel": max(epsrel, 1e-10), "limit": 200}
            val, _ = integrate.nquad(lambda *x: f(np.array(x)), bounds, opts=opts)
    # roundoff warnings on sign-changing integrands are benign; hitting the
    # subdivision cap is not
    for w in caught:
        if "subdivisions" in str(w.message):
            raise ConvergenceError(f"quadrature hit its refinement cap: {w.message}")
    return val


def _shift(pot):
    # reference energy keeps exp(-V/T) of order one at the minimum
    return min([pot.V(np.full(pot.dim, p)) for p in pot.points] or [0.0])


def p_classical(pot, T):
    """Unnormalized classical position density ``exp(-V/T)``."""
    _check_integrable(pot, T)
    return lambda x: float(np.exp(-pot.V(_as_point(x)) / T))


def p2_correction(pot, T):
    """hbar^2 coefficient of the thermal position density."""
    if pot.dV is None or pot.d2V is None:
        raise InvalidInputError("potential lacks derivative evaluators")
    inv_m = 1.0 / np.asarray(pot.masses)

    def p2(x):
        x = _as_point(x)
        lap = float(np.dot(inv_m, pot.d2V(x)))
        grad2 = float(np.dot(inv_m, pot.dV(x) ** 2))
        return float(np.exp(-pot.V(x) / T)) * (-lap / (12 * T**2) + grad2 / (24 * T**3))

    return p2


def _moments(pot, T):
    """Integrals entering the classical energy and its hbar^2 correction."""
    _check_integrable(pot, T)
    if pot.dV is None or pot.d2V is None:
        raise InvalidInputError("potential lacks derivative evaluators")
    v0 = _shift(pot)
    inv_m = 1.0 / np.asarray(pot.masses)

    def boltz(x):
        return np.exp(-(pot.V(x) - v0) / T)

    def p2(x):
        lap = float(np.dot(inv_m, pot.d2V(x)))
        grad2 = float(np.dot(inv_m, pot.dV(x) ** 2))
        return boltz(x) * (-lap / (12 * T**2) + grad2 / (24 * T**3))

    z = _integrate(boltz, pot, T)
    v_p = _integrate(lambda x: (pot.V(x) - v0) * boltz(x), pot, T)
    lap_p = _integrate(lambda x: float(np.dot(inv_m, pot.d2V(x))) * boltz(x), pot, T)
    int_p2 = _integrate(p2, pot, T)
    v_p2 = _integrate(lambda x: (pot.V(x) - v0) * p2(x), pot, T)
    return dict(z=z, v_p=v_p, lap_p=lap_p, p2=int_p2, v_p2=v_p2, v0=v0)


def e_classical(pot, T):
    """Classical thermal energy: ``M T / 2`` kinetic plus ``<V>``."""
    mom = _moments(pot, T)
    return 0.5 * pot.dim * T + mom["v_p"] / mom["z"] + mom["v0"]


def e2_qc(pot, T):
    """hbar^2 coefficient of the thermal energy."""
    mom = _moments(pot, T)
    z = mom["z"]
    # the constant shift v0 drops out of the bracket
    return (mom["lap_p"] / (24 * T) + mom["v_p2"] - mom["v_p"] * mom["p2"] / z) / z


@dataclass(frozen=True)
class CorrectedCycle:
    W_clas: float
    Q_h_clas: float
    W_corr: float
    Q_h_corr: float
    hbar: float

    @property
    def W(self):
        return self.W_clas + self.W_corr

    @property
    def Q_h(self):
        return self.Q_h_clas + self.Q_h_corr


def corrected_cycle(pot_h, pot_c, q, T_h, T_c, hbar=1.0):
    """Classical Otto work/heat and their hbar^2 corrections for homogeneous scaling ``q``.

    The state at the end of the cold isochore is thermal at ``T_c/q`` on the
    hot potential, and at the end of the hot isochore it is thermal at
    ``q T_h`` on the cold one.
    """
    if not (T_h > T_c > 0) or q <= 0:
        raise InvalidInputError("need T_h > T_c > 0 and q > 0")
    ec = {}
    e2 = {}
    for key, pot, T in (("hh", pot_h, T_h), ("hc", pot_h, T_c / q), ("cc", pot_c, T_c), ("ch", pot_c, q * T_h)):
        ec[key] = e_classical(pot, T)
        e2[key] = e2_qc(pot, T)
    q_h_clas = ec["hh"] - ec["hc"]
    q_c_clas = ec["cc"] - ec["ch"]
    q_h_corr = hbar**2 * (e2["hh"] - e2["hc"])
    w_corr = -hbar**2 * (e2["hh"] - e2["hc"] + e2["cc"] - e2["ch"])
    return CorrectedCycle(-q_h_clas - q_c_clas, q_h_clas, w_corr, q_h_corr, hbar)


def corrected_work(pot_h, pot_c, q, T_h, T_c, hbar=1.0):
    return corrected_cycle(pot_h, pot_c, q, T_h, T_c, hbar).W


def corrected_qh(pot_h, pot_c, q, T_h, T_c, hbar=1.0):
    return corrected_cycle(pot_h, pot_c, q, T_h, T_c, hbar).Q_h


@dataclass(frozen=True)
class PowerLawParams:
    n: int
    a_c: float
    a_h: float
    m: float = 1.0

    def __post_init__(self):
        if self.n < 1 or int(self.n) != self.n:
            raise InvalidInputError("n must be a positive integer")
        if self.a_c <= 0 or self.a_h <= 0 or self.m <= 0:
            raise InvalidInputError("a_c, a_h and m must be positive")

    @property
    def q(self):
        return (self.a_c / self.a_h) ** (1.0 / (1 + self.n))

    @classmethod
    def from_q(cls, n, a_c, q, m=1.0):
        return cls(n, a_c, a_c / q ** (n + 1), m)


def analytic_powerlaw_correction(p, T_h, T_c, hbar=1.0):
    """Closed-form hbar^2 work correction for ``V = a x^(2n)`` Otto cycles."""
    n, q = p.n, p.q
    pref = hbar**2 * np.pi * (2 * n * n + n - 1) / np.sin(np.pi / (2 * n))
    pref /= 12 * p.m * special.gamma(1.0 / (2 * n)) ** 2
    return -pref * (p.a_c / T_c) ** (1.0 / n) * (1 - 1 / q) * (1 - (T_c / (q * T_h)) ** (1.0 / n))


def numerical_powerlaw_correction(p, T_h, T_c, hbar=1.0):
    pot_h = power_law_potential(p.a_h, p.n, p.m)
    pot_c = power_law_potential(p.a_c, p.n, p.m)
    return corrected_cycle(pot_h, pot_c, p.q, T_h, T_c, hbar).W_corr


def harmonic_marginal_exact(x, omega, T, mass=1.0, hbar=1.0):
    """Exact thermal position marginal of an oscillator, normalized so hbar -> 0 gives ``exp(-V/T)``."""
    u = hbar * omega / T
    return np.sqrt(u / np.sinh(u)) * np.exp(-(mass * omega / hbar) * np.tanh(u / 2) * np.asarray(x) ** 2)


def dvr_levels(pot, hbar, n_grid=None, bounds=None):
    """Eigenvalues of ``p^2/2m + V`` on a sinc-DVR grid (1D)."""
    if pot.dim != 1:
        raise InvalidInputError("the grid eigensolver is one-dimensional")
    lo, hi = bounds
    x = np.linspace(lo, hi, n_grid)
    dx = x[1] - x[0]
    i = np.arange(n_grid)
    diff = i[:, None] - i[None, :]
    with np.errstate(divide="ignore"):
        kin = np.where(diff == 0, np.pi**2 / 3, 2.0 * (-1.0) ** diff / diff.astype(float) ** 2)
    kin *= hbar**2 / (2 * pot.masses[0] * dx**2)
    v = np.array([pot.V(np.array([xi])) for xi in x])
    return eigh(kin + np.diag(v), eigvals_only=True)


def quantum_mean_energy(pot, T, hbar, n_grid=None):
    """Thermal energy from the grid spectrum; the grid resolves the thermal de Broglie length."""
    lo, hi = pot.bounds(T)[0]
    # extend the box so the highest relevant eigenfunctions vanish at the edges
    span = hi - lo
    lo, hi = lo - 0.25 * span, hi + 0.25 * span
    if n_grid is None:
        p_max = np.sqrt(2 * pot.masses[0] * 2 * DOMAIN_EXPONENT * T)
        n_grid = int(np.ceil(1.2 * (hi - lo) * p_max / (np.pi * hbar))) + 40
    e = dvr_levels(pot, hbar, n_grid, (lo, hi))
    w = np.exp(-(e - e[0]) / T)
    return float(np.dot(w, e) / w.sum())
