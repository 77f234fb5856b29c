"""Command-line front end.

``qtmachines <command> [--config FILE] [--set key=value ...] [--out PATH]
[--format csv|json] [--threads N]`` runs one scenario. ``qtmachines run
--config FILE`` takes the command from the file. ``qtmachines figure ID`` emits
plot data and ``qtmachines bench`` times the kernels.

Config files are TOML::

    command = "otto"
    [otto]
    spectrum = "harmonic"
    omega_c = 0.5

Exit codes: 0 success, 1 benchmark regression, 2 parse error, 3 validation
error, 4 numerical non-convergence.
"""
import argparse
import csv
import hashlib
import inspect
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import bench, correlations, engines, exchangers, figures, friction, otto, wigner
from .errors import ConvergenceError, QTMError, TruncationError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_REGRESSION, EXIT_PARSE, EXIT_VALIDATION, EXIT_CONVERGENCE = 1, 2, 3, 4


class ParseError(Exception):
    pass


class ValidationError(Exception):
    pass


_NV = engines.nv_config()


def cmd_otto(spectrum="harmonic", omega_h=1.0, omega_c=0.6, L_h=1.0, L_c=1.25, Lx_h=0.8, Ly_h=0.2,
             Lx_c=1.0, Ly_c=0.25, T_h=1.0, T_c=0.5, mass=1.0, hbar=1.0, pairing="energy"):
    if spectrum == "harmonic":
        pair = otto.harmonic(omega_h, hbar=hbar), otto.harmonic(omega_c, hbar=hbar)
    elif spectrum == "box1d":
        pair = otto.box1d(L_h, mass, hbar), otto.box1d(L_c, mass, hbar)
    elif spectrum == "box2d":
        pair = otto.box2d(Lx_h, Ly_h, mass, hbar), otto.box2d(Lx_c, Ly_c, mass, hbar)
    else:
        raise ValidationError(f"spectrum: unknown family {spectrum!r}")
    r = otto.cycle_heats(otto.OttoCycleSpec(*pair, T_h, T_c), pairing=pairing)
    cols = [("W", "energy"), ("Q_h", "energy"), ("Q_c", "energy"), ("mode", ""), ("eta_or_cop", "1"),
            ("eta_carnot", "1")]
    return cols, [(r.W, r.Q_h, r.Q_c, r.mode, r.eta_or_cop, 1 - T_c / T_h)], []


def cmd_map2d(n=50, lx_c=1.0, ly_c=0.25, T_h=10.0, T_c=5.0, g_min=0.25, g_max=4.0, hbar=1.0, mass=1.0,
              pairing="energy", workers=None):
    g = np.geomspace(g_min, g_max, n)
    m = otto.efficiency_map_2dbox(lx_c * g, ly_c * g, lx_c, ly_c, T_h, T_c, mass, hbar, pairing, workers=workers)
    rows = [(x, y, m.modes[i, j], m.W[i, j], m.ratio[i, j])
            for i, y in enumerate(m.ly_h) for j, x in enumerate(m.lx_h)]
    cols = [("Lx_h", "length"), ("Ly_h", "length"), ("mode", ""), ("W", "energy"), ("eta_over_eta_car", "1")]
    return cols, rows, ["nan marks points that do not operate as an engine"]


def cmd_wigner(n=2, a_c=1.0, q=0.8, T_h=1.0, T_c=0.5, m=1.0, hbar=1.0):
    p = wigner.PowerLawParams.from_q(n, a_c, q, m)
    c = wigner.corrected_cycle(wigner.power_law_potential(p.a_h, n, m), wigner.power_law_potential(p.a_c, n, m),
                               p.q, T_h, T_c, hbar)
    analytic = wigner.analytic_powerlaw_correction(p, T_h, T_c, hbar)
    cols = [("n", ""), ("q", "1"), ("W_clas", "energy"), ("W_corr_analytic", "energy"),
            ("W_corr_quadrature", "energy"), ("W", "energy")]
    return cols, [(n, p.q, c.W_clas, analytic, c.W_corr, c.W)], []


def _engine_cfg(omega_h, omega_c, epsilon, gamma_h, gamma_c, beta_h, beta_c, tau_cyc, d):
    return engines.EngineConfig(omega_h, omega_c, epsilon, gamma_h, gamma_c, beta_h, beta_c, tau_cyc, d)


def cmd_engine(omega_h=_NV.omega_h, omega_c=_NV.omega_c, epsilon=_NV.epsilon, gamma_h=_NV.gamma_h,
               gamma_c=_NV.gamma_c, beta_h=_NV.beta_h, beta_c=_NV.beta_c, tau_cyc=0.01, d=_NV.d, dephased=False):
    cfg = _engine_cfg(omega_h, omega_c, epsilon, gamma_h, gamma_c, beta_h, beta_c, tau_cyc, d)
    build = engines.stochastic_machine if dephased else engines.machine
    rows = []
    for kind in engines.KINDS:
        r = engines.cycle_energetics(build(kind, cfg))
        eta = -r.W / r.Q_h if r.Q_h > 0 and r.W < 0 else math.nan
        rows.append((kind, tau_cyc, r.s_bar, r.W, r.Q_h, r.Q_c, r.P, eta))
    cols = [("kind", ""), ("tau_cyc", "time"), ("s_bar", "1"), ("W", "energy"), ("Q_h", "energy"),
            ("Q_c", "energy"), ("P", "energy/time"), ("eta", "1")]
    return cols, rows, []


def cmd_signature(omega_h=_NV.omega_h, omega_c=_NV.omega_c, epsilon=_NV.epsilon, gamma_h=_NV.gamma_h,
                  gamma_c=_NV.gamma_c, beta_h=_NV.beta_h, beta_c=_NV.beta_c, d=_NV.d, s_min=1e-3, s_max=1e-1,
                  n=21, workers=None):
    cfg = _engine_cfg(omega_h, omega_c, epsilon, gamma_h, gamma_c, beta_h, beta_c, 1.0, d)
    taus = np.geomspace(s_min, s_max, n) / engines.action_of(cfg)
    rep = engines.signature_check(cfg, taus, workers)
    rows = [(r.tau_cyc, r.s_bar, r.P_cont, r.P_2st, r.P_4st, r.P_stoch, r.P_stoch_bound, r.violation)
            for r in rep.rows]
    cols = [("tau_cyc", "time"), ("s_bar", "1"), ("P_cont", "energy/time"), ("P_2st", "energy/time"),
            ("P_4st", "energy/time"), ("P_stoch", "energy/time"), ("P_stoch_bound", "energy/time"),
            ("violation", "bool")]
    return cols, rows, []


def cmd_exchanger(omega_h=2.0, omega_c=1.0, beta_h=0.2, beta_c=3.0, g_h=1.0, g_c=0.7, g_w=0.5,
                  tau_min=10**-2.5, tau_max=10**-0.5, n=7, engine_populations=(0.5, 0.3, 0.2)):
    s = exchangers.ExchangerSetup(omega_h, omega_c, beta_h, beta_c, g_h, g_c, g_w)
    pops = np.asarray(engine_populations, dtype=float)
    if pops.shape != (3,) or pops.min() < 0 or abs(pops.sum() - 1) > 1e-12:
        raise ValidationError("engine_populations: need three non-negative numbers summing to one")
    rows = exchangers.equivalence_sweep(s, np.geomspace(tau_min, tau_max, n), np.diag(pops).astype(complex))
    cols = [("tau_cyc", "time"), ("s_bar", "1"), ("W_cont", "energy"), ("W_2st", "energy"), ("W_4st", "energy"),
            ("dW_2st", "energy"), ("offdiag_diff", "1"), ("diag_diff", "1")]
    return cols, [(r.tau_cyc, r.s_bar, r.W_cont, r.W_2st, r.W_4st, r.dW_2st, r.offdiag_diff, r.diag_diff)
                  for r in rows], []


def cmd_friction(dims=(2, 3), n_protocols=50, seed=0, beta_i=1.0, beta_f=1.5, t_f_min=0.2, t_f_max=3.0,
                 mix_max=2.0):
    rng = np.random.default_rng(seed)
    rows = []
    for k in range(n_protocols):
        dim = int(dims[k % len(dims)])
        p = friction.random_protocol(dim, rng, beta_i, beta_f, rng.uniform(t_f_min, t_f_max),
                                     rng.uniform(0, mix_max))
        rho = friction.evolve_unitary(p)
        rows.append((k, dim, p.t_f, friction.friction_work(p, rho), friction.friction_entropy(p, rho),
                     friction.bures_bound(p, rho), friction.bures_bound(p, rho, friction.PRINTED_BURES_COEFF)))
    cols = [("index", ""), ("dim", ""), ("t_f", "time"), ("W_fric", "energy"), ("S_over_beta_f", "energy"),
            ("bures_bound", "energy"), ("bures_bound_8_over_pi", "energy")]
    return cols, rows, ["bures_bound uses 8/pi^2; the 8/pi column is reported for comparison"]


def cmd_corr(gap=1.0, beta_A=0.5, beta_B=2.0, n_theta=31, n_chi=11, n_c=8):
    h = np.diag([0.0, gap])
    from .hilbert import thermal_state

    lo, hi = correlations.c_range(thermal_state(h, beta_A), thermal_state(h, beta_B))
    cs = np.linspace(lo, hi, n_c + 1)[:-1] * (1 - 1e-9)
    rows = correlations.witness_sweep(gap, beta_A, beta_B, np.linspace(0, np.pi / 2, n_theta),
                                      np.linspace(0, 1, n_chi), cs)
    cols = [("theta", "rad"), ("chi", "1"), ("c", "1"), ("Q_A", "energy"), ("Q_anomalous", "energy"),
            ("I_q_initial", "nat"), ("Q_clas", "energy"), ("entangled", "bool"), ("witness_verdict", "")]
    return cols, [(r.theta, r.chi, r.c, r.Q_A, r.Q_anomalous, r.I_q_initial, r.Q_clas, r.entangled, r.verdict)
                  for r in rows], []


COMMANDS = {
    "otto": cmd_otto,
    "map2d": cmd_map2d,
    "wigner": cmd_wigner,
    "engine": cmd_engine,
    "signature": cmd_signature,
    "exchanger": cmd_exchanger,
    "friction": cmd_friction,
    "corr": cmd_corr,
}


def schema(fn):
    return {k: p.default for k, p in inspect.signature(fn).parameters.items() if k != "workers"}


def _coerce(key, value, default):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ValidationError(f"{key}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"{key}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ValidationError(f"{key}: expected a string, got {value!r}")
        return value
    if isinstance(default, tuple):
        if not isinstance(value, list):
            raise ValidationError(f"{key}: expected a list, got {value!r}")
        return [_coerce(f"{key}[]", v, default[0]) for v in value]
    return value


def resolve_params(fn, given):
    sch = schema(fn)
    out = {k: (list(v) if isinstance(v, tuple) else v) for k, v in sch.items()}
    for key, value in given.items():
        if key not in sch:
            raise ValidationError(f"{key}: unknown parameter")
        out[key] = _coerce(key, value, sch[key])
    return out


def parse_override(text):
    if "=" not in text:
        raise ParseError(f"--set expects key=value, got {text!r}")
    key, raw = text.split("=", 1)
    key = key.strip()
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    return key, value


def load_config(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"malformed config {path}: {exc}") from exc


TOP_LEVEL_KEYS = {"command", "out", "format", "threads"}


def build_scenario(command, config, overrides):
    """Merge file and overrides into ``(command, params, output options)``."""
    config = dict(config or {})
    file_cmd = config.get("command")
    command = command or file_cmd
    if command is None:
        raise ValidationError("command: not given on the command line or in the config")
    if file_cmd is not None and file_cmd != command:
        raise ValidationError(f"command: config says {file_cmd!r}, command line says {command!r}")
    table = COMMANDS.get(command) or figures.BUILDERS.get(command)
    if table is None:
        raise ValidationError(f"command: unknown command {command!r}")
    for key in config:
        if key not in TOP_LEVEL_KEYS and key != command:
            raise ValidationError(f"{key}: unknown top-level key")
    params = dict(config.get(command, {}))
    for key, value in overrides:
        key = key[len(command) + 1:] if key.startswith(command + ".") else key
        params[key] = value
    return command, table, params, {k: config[k] for k in TOP_LEVEL_KEYS - {"command"} if k in config}


def canonical(command, params):
    return json.dumps({"command": command, "params": params}, sort_keys=True, separators=(",", ":"))


def config_hash(command, params):
    return "sha256:" + hashlib.sha256(canonical(command, params).encode()).hexdigest()


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def render_csv(command, params, cols, rows, notes):
    buf = io.StringIO()
    buf.write(f"# qtmachines {command}\n")
    buf.write(f"# config: {canonical(command, params)}\n")
    buf.write(f"# config_hash: {config_hash(command, params)}\n")
    buf.write("# units: " + ", ".join(f"{n}[{u}]" for n, u in cols) + "\n")
    for note in notes:
        buf.write(f"# {note}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([n for n, _ in cols])
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return str(v)


def render_json(command, params, cols, rows, notes):
    doc = {
        "command": command,
        "config": {"command": command, "params": params},
        "config_hash": config_hash(command, params),
        "columns": [{"name": n, "unit": u} for n, u in cols],
        "notes": list(notes),
        "rows": [[_json_value(v) for v in row] for row in rows],
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def read_csv(text):
    """Parse emitted CSV: ``(header dict, column names, rows as strings)``."""
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# ") and ": " in line:
            k, v = line[2:].split(": ", 1)
            meta[k] = v
        elif not line.startswith("#"):
            body.append(line)
    reader = list(csv.reader(body))
    return meta, reader[0], reader[1:]


def write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".qtm-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def execute(command, fn, params, threads=None):
    kwargs = {k: (tuple(v) if isinstance(v, list) else v) for k, v in params.items()}
    if "workers" in inspect.signature(fn).parameters:
        kwargs["workers"] = threads
    return fn(**kwargs)


def _add_common(p):
    p.add_argument("--config", help="TOML scenario file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a parameter")
    p.add_argument("--out", help="output path (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    p.add_argument("--threads", type=int, help="worker threads for sweeps")


def make_parser():
    parser = argparse.ArgumentParser(prog="qtmachines", description="Quantum thermal machine toolkit")
    sub = parser.add_subparsers(dest="cmd", required=True)
    for name, fn in COMMANDS.items():
        _add_common(sub.add_parser(name, help=(fn.__doc__ or name).strip().splitlines()[0] if fn.__doc__ else name))
    _add_common(sub.add_parser("run", help="run the command named in --config"))
    fig = sub.add_parser("figure", help="emit plot data for a figure")
    fig.add_argument("figure_id", help="one of " + ", ".join(figures.FIGURES))
    _add_common(fig)
    b = sub.add_parser("bench", help="time the numerical kernels")
    b.add_argument("--filter", help="substring of case names")
    b.add_argument("--slow", action="store_true", help="include slow cases")
    b.add_argument("--baseline", help="baseline report for the regression gate; recorded there if missing")
    b.add_argument("--out", help="JSON report path (stdout if omitted)")
    return parser


def _emit(text, out):
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _run_bench(args):
    baseline = bench.load_baseline(args.baseline) if args.baseline else None
    report = bench.run_suite(args.filter, args.slow, baseline)
    if args.baseline and baseline is None:
        bench.save_report(report, args.baseline)
    _emit(json.dumps(report, indent=1, sort_keys=True) + "\n", args.out)
    return EXIT_REGRESSION if report["regressions"] else 0


def main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    if args.cmd == "bench":
        return _run_bench(args)
    try:
        config = load_config(args.config) if args.config else {}
        overrides = [parse_override(s) for s in args.set]
        command = {"run": None, "figure": getattr(args, "figure_id", None)}.get(args.cmd, args.cmd)
        if args.cmd == "figure" and command not in figures.BUILDERS:
            raise ValidationError(f"figure: unknown figure id {command!r}")
        command, fn, given, opts = build_scenario(command, config, overrides)
        params = resolve_params(fn, given)
        fmt = args.format or opts.get("format", "csv")
        if fmt not in ("csv", "json"):
            raise ValidationError(f"format: expected csv or json, got {fmt!r}")
        out = args.out or opts.get("out")
        threads = args.threads or opts.get("threads")
        cols, rows, notes = execute(command, fn, params, threads)
        render = render_csv if fmt == "csv" else render_json
        _emit(render(command, params, cols, rows, notes), out)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ConvergenceError, TruncationError) as exc:
        print(f"error: numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ValidationError, QTMError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return 0


if __name__ == "__main__":
    sys.exit(main())
