"""Timing harness for the expensive kernels.

Each case is timed with a monotonic clock after one warm-up call. The report
carries median, p95 and interquartile range per case; when a baseline report
is supplied, any median more than ``SLACK`` above its baseline is flagged.
Benchmarks never check physics.
"""
import json
import platform
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidInputError

SLACK = 0.20
MIN_REPS = 5


@dataclass(frozen=True)
class BenchCase:
    name: str
    setup: Callable  # returns the zero-argument callable to time
    size: str
    repetitions: int = MIN_REPS
    slow: bool = False

    def __post_init__(self):
        if self.repetitions < MIN_REPS:
            raise InvalidInputError(f"{self.name}: need at least {MIN_REPS} repetitions")


def _expm_case(dim):
    def setup():
        from .liouville import dissipator_superop, hamiltonian_superop, propagate

        rng = np.random.default_rng(0)
        h = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h = h + h.conj().T
        s = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        gen = hamiltonian_superop(h) + dissipator_superop([s])
        return lambda: propagate(gen, 0.3)

    return setup


def _engine_sweep():
    from . import engines

    cfg = engines.nv_config(1.0)
    taus = np.geomspace(1e-3, 1e-1, 20) / engines.action_of(cfg)
    return lambda: engines.equivalence_sweep(cfg, taus)


def _fig3(n):
    def setup():
        from . import otto

        g = np.geomspace(0.25, 4.0, n)
        return lambda: otto.efficiency_map_2dbox(g, 0.25 * g, 1.0, 0.25, 10.0, 5.0)

    return setup


def _exchanger_cycle():
    from . import exchangers

    s = exchangers.ExchangerSetup(2.0, 1.0, 0.2, 3.0, tau_cyc=0.3)
    rho = np.diag([0.5, 0.3, 0.2]).astype(complex)
    return lambda: [exchangers.cycle_energetics_strong(k, s, rho) for k in exchangers.KINDS]


SCALING_DIMS = (4, 6, 8, 12, 16)
# dense expm of an N^2 x N^2 generator costs O(N^6); a fitted exponent within a factor 2 of 6 is consistent
SCALING_EXPONENT_RANGE = (3.0, 12.0)


def default_cases():
    cases = [BenchCase("expm_liouville_3level", _expm_case(3), "N=3 (9x9)")]
    cases += [BenchCase(f"expm_scaling_N{n}", _expm_case(n), f"N={n} ({n * n}x{n * n})") for n in SCALING_DIMS]
    cases += [
        BenchCase("engine_sweep_20", _engine_sweep, "20 tau points x 4 machines"),
        BenchCase("exchanger_cycle", _exchanger_cycle, "24-dim composite, 3 kinds"),
        BenchCase("fig3_grid_50", _fig3(50), "50x50"),
        BenchCase("fig3_grid_200", _fig3(200), "200x200", slow=True),
    ]
    return cases


def time_case(case):
    fn = case.setup()
    fn()  # warm-up
    ts = []
    for _ in range(case.repetitions):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    ts = np.array(ts)
    q1, q3 = np.percentile(ts, [25, 75])
    return {
        "size": case.size,
        "repetitions": case.repetitions,
        "median_s": float(np.median(ts)),
        "p95_s": float(np.percentile(ts, 95)),
        "iqr_s": float(q3 - q1),
    }


def scaling_exponent(results):
    """Log-log slope of expm time against Hilbert dimension, if the cases ran."""
    pts = [(n, results[f"expm_scaling_N{n}"]["median_s"]) for n in SCALING_DIMS if f"expm_scaling_N{n}" in results]
    if len(pts) < 3:
        return None
    n, t = np.array(pts).T
    return float(np.polyfit(np.log(n), np.log(t), 1)[0])


def compare(results, baseline, slack=SLACK):
    regressions = []
    for name, r in results.items():
        ref = baseline.get("cases", {}).get(name)
        if ref and r["median_s"] > (1 + slack) * ref["median_s"]:
            regressions.append({"case": name, "median_s": r["median_s"], "baseline_s": ref["median_s"]})
    return regressions


def run_suite(filter=None, include_slow=False, baseline=None, cases=None):
    """Time the selected cases; ``filter`` is a substring of the case name."""
    cases = default_cases() if cases is None else cases
    selected = [c for c in cases if (filter is None or filter in c.name) and (include_slow or not c.slow
                                                                            or filter == c.name)]
    results = {c.name: time_case(c) for c in selected}
    exponent = scaling_exponent(results)
    report = {
        "platform": platform.platform(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "cases": results,
        "expm_scaling_exponent": exponent,
        "expm_scaling_consistent": None if exponent is None else bool(
            SCALING_EXPONENT_RANGE[0] <= exponent <= SCALING_EXPONENT_RANGE[1]),
    }
    if baseline is None:
        report["mode"] = "report-only"
        report["regressions"] = []
    else:
        report["mode"] = "gated"
        report["slack"] = SLACK
        report["regressions"] = compare(results, baseline)
    return report


def save_report(report, path):
    with open(path, "w", newline="\n") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_baseline(path):
    """Baseline report or ``None`` when the file does not exist."""
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        return None
