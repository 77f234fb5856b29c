import json

import pytest

from qtmachines import cli


def _run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_otto_harmonic_row(tmp_path, capsys):
    out = tmp_path / "otto.csv"
    code, _, _ = _run(["otto", "--set", "omega_c=0.6", "--out", str(out)], capsys)
    assert code == 0
    meta, cols, rows = cli.read_csv(out.read_text())
    assert cols[:5] == ["W", "Q_h", "Q_c", "mode", "eta_or_cop"]
    w, q_h, q_c, mode, eta = rows[0][:5]
    assert mode == "engine"
    assert float(eta) == pytest.approx(0.4, abs=1e-12)
    assert abs(float(w) + float(q_h) + float(q_c)) < 1e-12
    assert out.read_text().startswith("# qtmachines otto\n")


def test_config_file_and_override_precedence(tmp_path, capsys):
    cfg = tmp_path / "s.toml"
    cfg.write_text('command = "otto"\n[otto]\nomega_c = 0.7\nT_h = 2.0\n')
    code, text, _ = _run(["run", "--config", str(cfg), "--set", "otto.omega_c=0.6"], capsys)
    assert code == 0
    meta, _, rows = cli.read_csv(text)
    params = json.loads(meta["config"])["params"]
    assert params["omega_c"] == 0.6 and params["T_h"] == 2.0
    assert float(rows[0][4]) == pytest.approx(0.4, abs=1e-12)


def test_malformed_config_exits_2_without_output(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('command = "otto"\n[otto\n')
    out = tmp_path / "never.csv"
    code, _, err = _run(["run", "--config", str(cfg), "--out", str(out)], capsys)
    assert code == 2
    assert "malformed" in err
    assert not out.exists()
    assert list(tmp_path.iterdir()) == [cfg]


def test_bad_override_syntax_exits_2(capsys):
    assert _run(["otto", "--set", "omega_c"], capsys)[0] == 2


def test_unknown_key_exits_3_naming_key(tmp_path, capsys):
    cfg = tmp_path / "u.toml"
    cfg.write_text('command = "otto"\n[otto]\nomgea_c = 0.6\n')
    code, _, err = _run(["run", "--config", str(cfg)], capsys)
    assert code == 3 and "omgea_c" in err
    code, _, err = _run(["otto", "--set", "nonsense=1"], capsys)
    assert code == 3 and "nonsense" in err


def test_unknown_top_level_key_and_command_mismatch(tmp_path, capsys):
    cfg = tmp_path / "t.toml"
    cfg.write_text('command = "otto"\nextra = 1\n')
    assert _run(["run", "--config", str(cfg)], capsys)[0] == 3
    cfg.write_text('command = "otto"\n')
    assert _run(["wigner", "--config", str(cfg)], capsys)[0] == 3


def test_type_and_physics_validation_exit_3(capsys):
    assert _run(["otto", "--set", "T_h=hot"], capsys)[0] == 3
    assert _run(["otto", "--set", "T_c=2"], capsys)[0] == 3
    assert _run(["otto", "--set", "spectrum=cubic"], capsys)[0] == 3


def test_convergence_failure_exits_4(monkeypatch, capsys):
    from qtmachines.errors import ConvergenceError

    def boom(**kw):
        raise ConvergenceError("did not converge")

    monkeypatch.setitem(cli.COMMANDS, "otto", boom)
    assert _run(["otto"], capsys)[0] == 4


def test_output_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert _run(["friction", "--set", "n_protocols=4", "--out", str(path)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert b"\r" not in a.read_bytes()


def test_header_hash_round_trips(capsys):
    _, text, _ = _run(["wigner", "--set", "n=3"], capsys)
    meta, cols, rows = cli.read_csv(text)
    cfg = json.loads(meta["config"])
    assert meta["config_hash"] == cli.config_hash(cfg["command"], cfg["params"])
    assert "W_corr_analytic[energy]" in meta["units"]
    # re-running from the recorded config reproduces the output
    params = {k: v for k, v in cfg["params"].items()}
    sets = [arg for k, v in params.items() for arg in ("--set", f"{k}={json.dumps(v)}")]
    assert _run(["wigner", *sets], capsys)[1] == text


def test_float_format_round_trips(capsys):
    _, text, _ = _run(["otto"], capsys)
    _, _, rows = cli.read_csv(text)
    w = float(rows[0][0])
    assert "%.17g" % w == rows[0][0]


def test_json_format(capsys):
    code, text, _ = _run(["otto", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(text)
    assert doc["columns"][0] == {"name": "W", "unit": "energy"}
    assert doc["config_hash"] == cli.config_hash("otto", doc["config"]["params"])


def test_signature_csv_flags(capsys):
    code, text, _ = _run(["signature", "--set", "n=4", "--set", "s_max=0.1"], capsys)
    assert code == 0
    _, cols, rows = cli.read_csv(text)
    assert cols[:5] == ["tau_cyc", "s_bar", "P_cont", "P_2st", "P_4st"]
    assert "P_stoch_bound" in cols
    flag = cols.index("violation")
    assert rows[0][flag] == "1"
    assert rows[-1][flag] == "0"


def test_corr_csv_columns(capsys):
    code, text, _ = _run(["corr", "--set", "n_theta=3", "--set", "n_chi=2", "--set", "n_c=1"], capsys)
    assert code == 0
    _, cols, rows = cli.read_csv(text)
    for name in ("theta", "chi", "Q_A", "I_q_initial", "Q_clas", "witness_verdict"):
        assert name in cols
    assert len(rows) == 6
    assert {r[cols.index("witness_verdict")] for r in rows} <= {"entangled", "inconclusive"}


def test_figure_command(tmp_path, capsys):
    out = tmp_path / "f.csv"
    assert _run(["figure", "fig4-hc", "--set", "n=5", "--out", str(out)], capsys)[0] == 0
    meta, cols, rows = cli.read_csv(out.read_text())
    assert cols[0] == "T_over_E0" and len(rows) == 5


def test_list_parameters_for_every_command():
    for fn in cli.COMMANDS.values():
        schema = cli.schema(fn)
        assert schema and all(v is not None for v in schema.values())


def test_unknown_figure_id_exits_3(capsys):
    code, _, err = _run(["figure", "fig9"], capsys)
    assert code == 3 and "fig9" in err
