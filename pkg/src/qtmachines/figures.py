"""Plot-ready data for the standard figures.

Each builder returns ``(columns, rows, notes)`` where ``columns`` is a list of
``(name, unit)`` pairs, ``rows`` a list of tuples and ``notes`` free-text
header lines. Writing is left to :mod:`cli`.
"""
import numpy as np

from . import engines, otto, wigner

FIGURES = ("fig1", "fig3", "fig4-hc", "fig5a", "fig5b")


def fig1(omega=1.0, temperatures=(0.1, 10.0), n=401):
    """Classical and quantum thermal position densities of an oscillator."""
    rows = []
    for T in temperatures:
        # wide enough for both the quantum ground-state width and the thermal width
        half = 6 * np.sqrt(max(T, 0.5 * omega)) / omega
        x = np.linspace(-half, half, n)
        clas = np.exp(-(omega**2) * x**2 / (2 * T))
        quan = wigner.harmonic_marginal_exact(x, omega, T)
        clas /= np.trapezoid(clas, x)
        quan /= np.trapezoid(quan, x)
        rows.extend(zip([T] * n, x, clas, quan))
    cols = [("T", "hbar*omega"), ("x", "sqrt(hbar/m omega)"), ("P_clas", "1/length"), ("P_quan", "1/length")]
    return cols, rows, [f"harmonic oscillator, omega={omega}, hbar=m=k_B=1"]


def fig3(n=50, lx_c=1.0, ly_c=0.25, T_h=10.0, T_c=5.0, g_min=0.25, g_max=4.0, hbar=1.0, workers=None):
    """``eta/eta_Car`` over hot-side box lengths: ideal gas, hbar -> 0 limit and quantum box."""
    g = np.geomspace(g_min, g_max, n)
    lx_h, ly_h = lx_c * g, ly_c * g
    qmap = otto.efficiency_map_2dbox(lx_h, ly_h, lx_c, ly_c, T_h, T_c, hbar=hbar, workers=workers)
    eta_car = 1 - T_c / T_h
    rows = []
    for i, y in enumerate(ly_h):
        for j, x in enumerate(lx_h):
            area_ratio = (lx_c * ly_c) / (x * y)  # compression ratio Vol_c / Vol_h
            gas = np.nan
            if area_ratio > 1:
                rep = otto.ideal_gas_otto(2.0, area_ratio, T_h, T_c)
                gas = rep.eta_or_cop / eta_car if rep.mode == "engine" else np.nan
            # with energy-ordered levels the hbar -> 0 spectrum scales with the area alone
            q = 1 / area_ratio
            clas = (1 - q) / eta_car if T_c / T_h < q < 1 else np.nan
            rows.append((x, y, gas, clas, qmap.ratio[i, j]))
    cols = [("Lx_h", "length"), ("Ly_h", "length"), ("ratio_ideal_gas", "1"), ("ratio_classical_limit", "1"),
            ("ratio_quantum", "1")]
    notes = [f"Lx_c={lx_c}, Ly_c={ly_c}, T_h={T_h}, T_c={T_c}, hbar={hbar}, m=1",
             "nan marks points that do not operate as an engine"]
    return cols, rows, notes


def fig4_hc(n=200, t_min=0.05, t_max=20.0):
    """Heat capacities vs temperature in units of the ground-state energy."""
    ho, box = otto.harmonic(1.0), otto.box1d(1.0)
    e_ho, e_box = 0.5, np.pi**2 / 2
    rows = []
    for t in np.geomspace(t_min, t_max, n):
        rows.append((t, 1.0, otto.cv_quantum(ho, t * e_ho), 0.5, otto.cv_quantum(box, t * e_box)))
    cols = [("T_over_E0", "1"), ("Cv_HO_clas", "k_B"), ("Cv_HO_quan", "k_B"), ("Cv_box_clas", "k_B"),
            ("Cv_box_quan", "k_B")]
    return cols, rows, ["harmonic omega=1 and 1D box L=1, hbar=m=k_B=1"]


def _nv_sweep(n, s_min, s_max, workers):
    cfg = engines.nv_config(1.0)
    s = np.geomspace(s_min, s_max, n)
    return engines.equivalence_sweep(cfg, s / engines.action_of(cfg), workers)


def fig5a(n=40, s_min=1e-3, s_max=1.0, workers=None):
    """Coherent and dephased two-stroke power against the dephased-engine bound."""
    rows = [(r.s_bar, r.tau_cyc, r.P_2st, r.P_stoch, r.P_stoch_bound, int(r.violation))
            for r in _nv_sweep(n, s_min, s_max, workers)]
    cols = [("s_bar", "1"), ("tau_cyc", "us"), ("P_2st", "rad/us^2"), ("P_stoch", "rad/us^2"),
            ("P_stoch_bound", "rad/us^2"), ("violation", "bool")]
    return cols, rows, ["NV-like parameters; power in hbar=1 units (energy in rad/us, per us)"]


def fig5b(n=40, s_min=1e-3, s_max=1.0, workers=None):
    """Two-stroke and continuous power; they coincide at small action."""
    rows = [(r.s_bar, r.tau_cyc, r.P_2st, r.P_cont) for r in _nv_sweep(n, s_min, s_max, workers)]
    cols = [("s_bar", "1"), ("tau_cyc", "us"), ("P_2st", "rad/us^2"), ("P_cont", "rad/us^2")]
    return cols, rows, ["NV-like parameters; power in hbar=1 units (energy in rad/us, per us)"]


BUILDERS = {"fig1": fig1, "fig3": fig3, "fig4-hc": fig4_hc, "fig5a": fig5a, "fig5b": fig5b}
