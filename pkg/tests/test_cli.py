import csv
import json
import subprocess
import sys

import pytest

from critpurcell.cli import main


def run(*args, stdin=None):
    return subprocess.run(
        [sys.executable, "-m", "critpurcell", *args], input=stdin, capture_output=True
    )


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_help():
    proc = run("--help")
    assert proc.returncode == 0
    for name in ("simulate", "dos", "oracle-check", "fit"):
        assert name.encode() in proc.stdout


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--bogus"])
    assert exc.value.code == 2


def test_simulate_broken_csv(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["simulate", "--beta", "0.125", "--x0", "0.8", "--grid", "0.01:0.99:99", "--out", str(out)]) == 0
    table = rows(out)
    assert table[0] == ["t", "gamma_ratio"]
    r = [float(v) for _, v in table[1:]]
    assert len(r) == 99
    assert all(a >= b for a, b in zip(r, r[1:]))


def test_simulate_noise_byte_identical(tmp_path):
    args = ["simulate", "--beta", "0.25", "--sigma", "0.01", "--seed", "5"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(args + ["--out", str(a)])
    main(args + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_simulate_fig2_preset(tmp_path):
    assert main(["simulate", "--preset", "fig2", "--out", str(tmp_path)]) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["fig2_beta_1-2.csv", "fig2_beta_1-4.csv", "fig2_beta_1-8.csv"]


def test_simulate_fig2_needs_directory(capsys):
    assert main(["simulate", "--preset", "fig2"]) == 2


def test_simulate_fig4_preset(tmp_path):
    out = tmp_path / "f.json"
    assert main(["simulate", "--preset", "fig4", "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["metadata"]["preset"] == "fig4"
    assert "x0_choice" in doc["metadata"]
    ratio = [r for _, r in doc["samples"]]
    assert max(ratio) > 1 and min(ratio) == 0


def test_simulate_pole_window_exit_3(tmp_path, capsys):
    code = main(["simulate", "--grid=-0.003:0.5:50", "--out", str(tmp_path / "x.csv")])
    assert code == 3
    assert "pole window" in capsys.readouterr().err


def test_simulate_summary_on_stderr_when_stdout_is_data():
    proc = run("simulate", "--grid", "0.1:0.9:5")
    assert proc.returncode == 0
    assert proc.stdout.startswith(b"t,gamma_ratio\n")
    assert json.loads(proc.stderr)["points"] == 5


def test_pipe_into_fit():
    sim = run("simulate", "--beta", "0.125", "--x0", "0.8", "--grid", "0.05:0.95:50", "--sigma", "0.01", "--seed", "2")
    proc = run("fit", "-", stdin=sim.stdout)
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    beta, se = doc["params"]["beta"], doc["param_stderr"]["beta"]
    assert abs(beta - 0.125) < 3 * se


def test_fit_classify(tmp_path):
    curve = tmp_path / "c.json"
    main(["simulate", "--beta", "0.25", "--x0", "0.8", "--grid", "0.05:0.95:50", "--format", "json", "--out", str(curve)])
    out = tmp_path / "cls.json"
    assert main(["fit", str(curve), "--classify", "--candidates", "0.125,0.25,0.5", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["best"] == "1/4"


def test_fit_symmetric(tmp_path):
    curve = tmp_path / "s.csv"
    main(["simulate", "--grid=-1:-0.01:40", "--delta", "10", "--out", str(curve)])
    out = tmp_path / "fit.json"
    assert main(["fit", str(curve), "--symmetric", "exponential", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["params"]["delta"] == pytest.approx(10.0, abs=1e-8)


def test_fit_empty_csv_exit_2(tmp_path):
    empty = tmp_path / "e.csv"
    empty.write_text("t,gamma_ratio\n")
    assert main(["fit", str(empty)]) == 2


def test_fit_malformed_exit_2(tmp_path):
    bad = tmp_path / "b.csv"
    bad.write_text("t,gamma_ratio\n0.1,oops\n")
    assert main(["fit", str(bad)]) == 2
    assert main(["fit", str(tmp_path / "missing.csv")]) == 2


def test_fit_plateau_exit_5(tmp_path):
    curve = tmp_path / "p.csv"
    main(["simulate", "--x0", "3", "--grid", "0.5:0.9:20", "--out", str(curve)])
    assert main(["fit", str(curve)]) == 5


def test_fit_budget_exhausted_exit_5(tmp_path):
    curve = tmp_path / "c.csv"
    main(["simulate", "--beta", "0.25", "--x0", "0.8", "--out", str(curve)])
    code = main(["fit", str(curve), "--init-beta", "0.9", "--init-x0", "0.2", "--max-iter", "1", "--out", str(tmp_path / "f.json")])
    assert code == 5


def test_oracle_check_default_passes(tmp_path):
    out = tmp_path / "o.csv"
    assert main(["oracle-check", "--x", "0,0.5,0.9,1.2", "--out", str(out)]) == 0
    table = rows(out)
    assert table[0] == ["x", "closed_form", "oracle", "abs_diff", "eta_error_bar"]
    assert len(table) == 5


def test_oracle_check_vacuum_only(tmp_path):
    out = tmp_path / "o.csv"
    assert main(["oracle-check", "--x", "0", "--out", str(out)]) == 0
    assert float(rows(out)[1][3]) < 1e-6


def test_oracle_check_small_cutoff_exit_4(tmp_path):
    assert main(["oracle-check", "--x", "0", "--k-max", "1.5", "--out", str(tmp_path / "o.csv")]) == 4


def test_oracle_check_tight_tolerance_exit_1(tmp_path):
    assert main(["oracle-check", "--x", "0.5", "--tolerance", "1e-12", "--out", str(tmp_path / "o.csv")]) == 1


def test_oracle_check_workers_env(tmp_path, monkeypatch):
    monkeypatch.setenv("CRITPURCELL_MAX_WORKERS", "1")
    assert main(["oracle-check", "--x", "0.2,0.4", "--out", str(tmp_path / "o.csv")]) == 0
    monkeypatch.setenv("CRITPURCELL_MAX_WORKERS", "many")
    assert main(["oracle-check", "--x", "0.2", "--out", str(tmp_path / "o.csv")]) == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"beta": 0.5, "x0": 0.9, "grid": "0.1:0.9:9"}))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["simulate", "--config", str(cfg), "--beta", "0.125", "--out", str(b)]) == 0
    ra, rb = rows(a), rows(b)
    assert len(ra) == len(rb) == 10
    assert float(rb[1][1]) < float(ra[1][1])


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"betta": 0.5}))
    assert main(["simulate", "--config", str(cfg)]) == 2
    cfg.write_text("[1, 2]")
    assert main(["simulate", "--config", str(cfg)]) == 2


def test_dos_table(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["dos", "--x", "0.5", "--omega", "0:2:21", "--out", str(out)]) == 0
    table = rows(out)
    assert table[0] == ["omega", "dos", "vacuum_dos"]
    body = [[float(v) for v in r] for r in table[1:]]
    assert len(body) == 21
    assert all(r[1] == 0.0 for r in body if r[0] <= 0.5)
    assert all(0 < r[1] <= r[2] for r in body if r[0] > 0.5)


def test_dos_quadrature_columns(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["dos", "--x", "0.5", "--omega", "0.2:2:4", "--quadrature", "--out", str(out)]) == 0
    assert rows(out)[0][-2:] == ["dos_quadrature", "dos_quadrature_error"]


def test_bad_range_exit_2():
    assert main(["dos", "--omega", "0:3"]) == 2
