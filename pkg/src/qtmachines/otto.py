"""Quantized Otto cycles from level sums.

Energies are in units with hbar = k_B = 1 unless a spectrum carries its own
``hbar`` (used for classical-limit sweeps). The working medium stays thermal on
the isochores and keeps its level populations on the adiabats. Sign
convention: energy flowing into the working medium is positive.

Two ways of carrying populations across the adiabats are supported:

* ``pairing="energy"`` (default): the n-th lowest level of the hot spectrum
  maps to the n-th lowest level of the cold one. This is the slow limit when
  level crossings are avoided.
* ``pairing="labels"``: levels keep their quantum numbers, so crossings are
  diabatic. For separable spectra (box2d) each axis is then an independent
  degree of freedom.

The two coincide for one-dimensional families and for homogeneous scaling.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import InvalidInputError, TruncationError, UnsupportedError

TAIL_TOL = 1e-10
N_MAX = 10_000
SCALING_RTOL = 1e-9
MODES = ("engine", "refrigerator", "heater", "accelerator")


@dataclass(frozen=True)
class SpectrumFamily:
    """Level generator for one working medium.

    Use the constructors :func:`harmonic`, :func:`box1d`, :func:`box2d` and
    :func:`explicit`. ``multiplicity`` counts identical independent copies
    (e.g. ``N`` oscillators); extensive outputs are multiplied by it.
    """

    kind: str
    params: tuple
    hbar: float = 1.0
    multiplicity: int = 1

    def __post_init__(self):
        if self.kind not in ("harmonic", "box1d", "box2d", "explicit"):
            raise InvalidInputError(f"unknown spectrum kind {self.kind!r}")
        if self.hbar <= 0 or self.multiplicity < 1:
            raise InvalidInputError("hbar must be > 0 and multiplicity >= 1")
        if self.kind != "explicit" and any(p <= 0 for p in self.params):
            raise InvalidInputError(f"{self.kind} parameters must be positive, got {self.params}")
        if self.kind == "explicit" and np.any(np.diff(self.params) < 0):
            raise InvalidInputError("explicit levels must be nondecreasing")

    def energy(self, labels):
        """Energies of integer ``labels`` (shape ``(n,)`` or ``(n, 2)`` for box2d)."""
        labels = np.asarray(labels)
        if self.kind == "harmonic":
            (omega,) = self.params
            return self.hbar * omega * (labels + 0.5)
        if self.kind == "box1d":
            length, mass = self.params
            return (self.hbar * np.pi) ** 2 / (2 * mass) * (labels / length) ** 2
        if self.kind == "box2d":
            lx, ly, mass = self.params
            c = (self.hbar * np.pi) ** 2 / (2 * mass)
            return c * ((labels[:, 0] / lx) ** 2 + (labels[:, 1] / ly) ** 2)
        return np.asarray(self.params, dtype=float)[labels]

    def ground_energy(self):
        return float(self.energy(self._first_label())[0])

    def _first_label(self):
        if self.kind == "box2d":
            return np.array([[1, 1]])
        return np.array([1 if self.kind == "box1d" else 0])

    def labels_below(self, e_cut):
        """All labels with energy <= ``e_cut``, sorted by (energy, label)."""
        if self.kind == "harmonic":
            (omega,) = self.params
            n = int(np.floor(e_cut / (self.hbar * omega) - 0.5))
            labels = np.arange(0, max(n, -1) + 1)
        elif self.kind == "box1d":
            length, mass = self.params
            n = int(np.floor(length * np.sqrt(2 * mass * max(e_cut, 0.0)) / (np.pi * self.hbar)))
            labels = np.arange(1, n + 1)
        elif self.kind == "box2d":
            lx, ly, mass = self.params
            c = (self.hbar * np.pi) ** 2 / (2 * mass)
            nx_max = int(np.floor(lx * np.sqrt(max(e_cut, 0.0) / c)))
            nx = np.arange(1, nx_max + 1)
            ny_max = np.floor(ly * np.sqrt(np.clip(e_cut / c - (nx / lx) ** 2, 0, None))).astype(int)
            nxs = np.repeat(nx, ny_max)
            start = np.repeat(np.cumsum(ny_max) - ny_max, ny_max)
            nys = np.arange(nxs.size) - start + 1
            labels = np.column_stack([nxs, nys])
        else:
            levels = np.asarray(self.params, dtype=float)
            labels = np.arange(int(np.searchsorted(levels, e_cut, side="right")))
        return self.sort_labels(labels)

    def sort_labels(self, labels):
        if len(labels) == 0:
            return labels
        # 12 significant digits so float noise does not break lexicographic ties
        key = np.round(self.energy(labels), 12 - int(np.ceil(np.log10(abs(self.ground_energy()) + 1e-300))))
        if self.kind == "box2d":
            order = np.lexsort((labels[:, 1], labels[:, 0], key))
        else:
            order = np.lexsort((labels, key))
        return labels[order]

    def lowest_labels(self, n, n_max=N_MAX):
        """The ``n`` lowest labels, sorted."""
        if n > n_max:
            raise TruncationError(f"{n} levels requested, cap is {n_max}")
        if self.kind == "explicit":
            if n > len(self.params):
                raise TruncationError(f"explicit spectrum has only {len(self.params)} levels")
            return np.arange(n)
        e0 = self.ground_energy()
        span = max(abs(e0), 1e-300)
        e_cut = e0 + span
        while True:
            labels = self.labels_below(e_cut)
            if len(labels) >= n:
                return labels[:n]
            e_cut = e0 + 2 * (e_cut - e0)


def harmonic(omega, n_osc=1, hbar=1.0):
    return SpectrumFamily("harmonic", (float(omega),), hbar=hbar, multiplicity=int(n_osc))


def box1d(length, mass=1.0, hbar=1.0):
    return SpectrumFamily("box1d", (float(length), float(mass)), hbar=hbar)


def box2d(lx, ly, mass=1.0, hbar=1.0):
    return SpectrumFamily("box2d", (float(lx), float(ly), float(mass)), hbar=hbar)


def explicit(levels):
    return SpectrumFamily("explicit", tuple(float(e) for e in levels))


@dataclass(frozen=True)
class OttoCycleSpec:
    spec_h: SpectrumFamily
    spec_c: SpectrumFamily
    T_h: float
    T_c: float

    def __post_init__(self):
        if not (self.T_h > self.T_c > 0):
            raise InvalidInputError(f"need T_h > T_c > 0, got T_h={self.T_h}, T_c={self.T_c}")
        if self.spec_h.kind != self.spec_c.kind or self.spec_h.multiplicity != self.spec_c.multiplicity:
            raise InvalidInputError("hot and cold spectra must be of the same family")
        if self.spec_h.kind == "explicit" and len(self.spec_h.params) != len(self.spec_c.params):
            raise InvalidInputError("explicit spectra must have equal length")


@dataclass(frozen=True)
class CycleReport:
    W: float
    Q_h: float
    Q_c: float
    mode: str
    eta_or_cop: float
    n_levels: int = 0

    @property
    def eta(self):
        return self.eta_or_cop if self.mode == "engine" else float("nan")


def classify(W, Q_h, Q_c):
    """Operating mode and efficiency (engine) or COP (refrigerator)."""
    if W < 0 and Q_h > 0:
        return "engine", -W / Q_h
    if W > 0 and Q_c > 0:
        return "refrigerator", Q_c / W
    if Q_h > 0:
        return "accelerator", float("nan")
    return "heater", float("nan")


def _boltzmann(e_rel, T):
    w = np.exp(-e_rel / T)
    return w / w.sum()


def tail_cut(tail_tol):
    """Boltzmann exponent beyond which levels are dropped.

    Twice ``ln(1/tol)`` leaves room for the polynomial growth of the level
    density in two dimensions.
    """
    return 2.0 * np.log(1.0 / tail_tol)


def _pair_levels(cycle, pairing, tail_tol, n_max):
    sh, sc = cycle.spec_h, cycle.spec_c
    if sh.kind == "explicit":
        labels = np.arange(len(sh.params))
        return sh.energy(labels), sc.energy(labels)
    x = tail_cut(tail_tol)
    lab_h = sh.labels_below(sh.ground_energy() + x * cycle.T_h)
    lab_c = sc.labels_below(sc.ground_energy() + x * cycle.T_c)
    if pairing == "energy":
        n = max(len(lab_h), len(lab_c))
        if n > n_max:
            raise TruncationError(f"tail criterion needs {n} levels, cap is {n_max}")
        lab_h = sh.lowest_labels(n, n_max) if len(lab_h) < n else lab_h
        lab_c = sc.lowest_labels(n, n_max) if len(lab_c) < n else lab_c
        return sh.energy(lab_h), sc.energy(lab_c)
    if pairing == "labels":
        if sh.kind == "box2d":
            union = np.unique(np.vstack([lab_h, lab_c]), axis=0)
        else:
            union = np.union1d(lab_h, lab_c)
        if len(union) > n_max:
            raise TruncationError(f"tail criterion needs {len(union)} levels, cap is {n_max}")
        return sh.energy(union), sc.energy(union)
    raise InvalidInputError(f"unknown pairing {pairing!r}")


def cycle_heats(cycle, pairing="energy", tail_tol=TAIL_TOL, n_max=N_MAX):
    """Heats and work of one quantum Otto cycle by direct Boltzmann sums."""
    e_h, e_c = _pair_levels(cycle, pairing, tail_tol, n_max)
    # ground-referenced energies avoid cancellation against large zero-point terms
    rel_h = e_h - e_h.min()
    rel_c = e_c - e_c.min()
    p_a = _boltzmann(rel_h, cycle.T_h)
    p_c = _boltzmann(rel_c, cycle.T_c)
    mult = cycle.spec_h.multiplicity
    dp = p_a - p_c
    q_h = mult * float(np.dot(dp, rel_h))
    q_c = -mult * float(np.dot(dp, rel_c))
    w = -q_h - q_c
    mode, val = classify(w, q_h, q_c)
    return CycleReport(w, q_h, q_c, mode, val, n_levels=len(e_h))


def scaling_factor(spec_h, spec_c, n_levels=200, rtol=SCALING_RTOL):
    """Common ground-referenced level ratio ``q = E^c/E^h``, or ``None``."""
    if spec_h.kind != spec_c.kind:
        return None
    if spec_h.kind == "explicit":
        n_levels = min(len(spec_h.params), len(spec_c.params))
    e_h = spec_h.energy(spec_h.lowest_labels(n_levels, n_max=max(n_levels, N_MAX)))
    e_c = spec_c.energy(spec_c.lowest_labels(n_levels, n_max=max(n_levels, N_MAX)))
    d_h = e_h[1:] - e_h[0]
    d_c = e_c[1:] - e_c[0]
    if np.any(d_h <= 0):
        mask = d_h > 0
        if np.any(np.abs(d_c[~mask]) > rtol * np.abs(d_c).max(initial=1.0)):
            return None
        d_h, d_c = d_h[mask], d_c[mask]
    if d_h.size == 0:
        return None
    ratios = d_c / d_h
    q = float(np.median(ratios))
    if np.max(np.abs(ratios - q)) < rtol * max(q, 1e-300):
        return q
    return None


def _thermal_moments(spec, T, tail_tol=TAIL_TOL, n_max=N_MAX):
    e0 = spec.ground_energy()
    labels = spec.labels_below(e0 + tail_cut(tail_tol) * T)
    if len(labels) > n_max:
        raise TruncationError(f"tail criterion needs {len(labels)} levels, cap is {n_max}")
    if len(labels) == 0:
        labels = spec.lowest_labels(1)
    rel = spec.energy(labels) - e0
    p = _boltzmann(rel, T)
    mean = float(np.dot(p, rel))
    var = float(np.dot(p, (rel - mean) ** 2))
    return mean + e0, var


def mean_energy(spec, T, tail_tol=TAIL_TOL, n_max=N_MAX):
    """Thermal energy ``<H>`` at temperature ``T`` (times multiplicity)."""
    if T <= 0:
        raise InvalidInputError(f"T must be > 0, got {T!r}")
    return spec.multiplicity * _thermal_moments(spec, T, tail_tol, n_max)[0]


def cv_quantum(spec, T, tail_tol=TAIL_TOL, n_max=N_MAX):
    """Heat capacity ``Var(E)/T^2`` of the thermal state (k_B = 1)."""
    if T <= 0:
        raise InvalidInputError(f"T must be > 0, got {T!r}")
    if spec.kind == "explicit":
        rel = np.asarray(spec.params) - spec.params[0]
        p = _boltzmann(rel, T)
        mean = np.dot(p, rel)
        return float(np.dot(p, (rel - mean) ** 2)) / T**2
    return spec.multiplicity * _thermal_moments(spec, T, tail_tol, n_max)[1] / T**2


def cv_harmonic_closed_form(omega, T, n_osc=1, hbar=1.0):
    x = hbar * omega / (2 * T)
    return n_osc * (x / np.sinh(x)) ** 2


def work_via_cv(cycle, epsrel=1e-11):
    """``(W, Q_h, Q_c)`` from the heat-capacity integral over ``[T_c/q, T_h]``."""
    q = scaling_factor(cycle.spec_h, cycle.spec_c)
    if q is None:
        raise UnsupportedError("heat-capacity form needs homogeneous level scaling")
    lo, hi = cycle.T_c / q, cycle.T_h
    q_h, _ = quad(lambda t: cv_quantum(cycle.spec_h, t), lo, hi, epsrel=epsrel, epsabs=0, limit=200)
    return (q - 1) * q_h, q_h, -q * q_h


def efficiency_homogeneous(q, T_h=None, T_c=None):
    """Efficiency and COP of a homogeneously scaled cycle: ``1 - q`` and ``q/(1-q)``."""
    if not 0 < q < 1:
        raise InvalidInputError(f"q must lie in (0, 1), got {q!r}")
    eta = 1.0 - q
    if T_h is not None and T_c is not None and eta > 1.0 - T_c / T_h + 1e-12:
        raise InvalidInputError(f"q={q} < T_c/T_h: the cycle is not an engine")
    return eta, q / (1.0 - q)


@dataclass(frozen=True)
class IdealGasReport:
    mode: str
    eta_or_cop: float
    r_car: float


def ideal_gas_otto(gamma, r, T_h, T_c):
    """Classical ideal-gas Otto cycle with compression ratio ``r = Vol_c/Vol_h``."""
    if gamma <= 1 or r < 1:
        raise InvalidInputError("need gamma > 1 and r >= 1")
    if not T_h > T_c > 0:
        raise InvalidInputError("need T_h > T_c > 0")
    r_car = (T_h / T_c) ** (1.0 / (gamma - 1.0))
    eta = 1.0 - r ** (1.0 - gamma)
    if r == 1:
        return IdealGasReport("accelerator", 0.0, r_car)
    if r <= r_car * (1 + 1e-12):
        return IdealGasReport("engine", eta, r_car)
    return IdealGasReport("refrigerator", 1.0 / (r ** (gamma - 1.0) - 1.0), r_car)


def classical_adiabatic_invariant_2d(m, E, A):
    if m <= 0 or E <= 0 or A <= 0:
        raise InvalidInputError("mass, energy and area must be positive")
    return 2 * np.pi * m * E * A


def area_preserving_line(lx_c, ly_c, js):
    """Hot-side box lengths ``(lx_c/j, ly_c*j)`` with the cold-side area."""
    js = np.asarray(js, dtype=float)
    return np.column_stack([lx_c / js, ly_c * js])


@dataclass(frozen=True)
class EfficiencyMap:
    lx_h: np.ndarray
    ly_h: np.ndarray
    ratio: np.ndarray  # eta/eta_Car, NaN where not an engine; rows follow ly_h
    modes: np.ndarray
    W: np.ndarray

    def to_csv(self):
        head = "Ly_h\\Lx_h," + ",".join(f"{x:.17g}" for x in self.lx_h)
        rows = [head]
        for i, y in enumerate(self.ly_h):
            cells = ("NA" if np.isnan(v) else f"{v:.17g}" for v in self.ratio[i])
            rows.append(f"{y:.17g}," + ",".join(cells))
        return "\n".join(rows) + "\n"


def box2d_point(lx_h, ly_h, lx_c, ly_c, T_h, T_c, mass=1.0, hbar=1.0, pairing="energy", n_max=N_MAX):
    cycle = OttoCycleSpec(box2d(lx_h, ly_h, mass, hbar), box2d(lx_c, ly_c, mass, hbar), T_h, T_c)
    return cycle_heats(cycle, pairing=pairing, n_max=n_max)


def efficiency_map_2dbox(lx_h, ly_h, lx_c, ly_c, T_h, T_c, mass=1.0, hbar=1.0, pairing="energy",
                         n_max=N_MAX, workers=None):
    """Map of ``eta/eta_Car`` over hot-side box lengths."""
    lx_h = np.asarray(lx_h, dtype=float)
    ly_h = np.asarray(ly_h, dtype=float)
    if np.any(lx_h <= 0) or np.any(ly_h <= 0):
        raise InvalidInputError("grid lengths must be positive")
    eta_car = 1.0 - T_c / T_h
    points = [(x, y) for y in ly_h for x in lx_h]

    def one(pt):
        return box2d_point(pt[0], pt[1], lx_c, ly_c, T_h, T_c, mass, hbar, pairing, n_max)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(one, points))
    else:
        reports = [one(p) for p in points]
    shape = (ly_h.size, lx_h.size)
    ratio = np.array([r.eta_or_cop / eta_car if r.mode == "engine" else np.nan for r in reports])
    modes = np.array([r.mode for r in reports])
    work = np.array([r.W for r in reports])
    return EfficiencyMap(lx_h, ly_h, ratio.reshape(shape), modes.reshape(shape), work.reshape(shape))


def classical_box2d_work(lx_h, ly_h, lx_c, ly_c, T_h, T_c):
    """hbar -> 0 work when each axis keeps its own action (``labels`` pairing)."""
    w = 0.0
    for l_h, l_c in ((lx_h, lx_c), (ly_h, ly_c)):
        q = (l_h / l_c) ** 2
        w += 0.5 * (q - 1.0) * (T_h - T_c / q)
    return w
