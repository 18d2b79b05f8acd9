import json
import subprocess
import sys

import numpy as np
import pytest

from spincd.cli import main, resolve_config


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_dry_run_prints_resolved_defaults(capsys):
    code, out, _ = run_cli(["anneal", "--dry-run"], capsys)
    assert code == 0
    cfg = json.loads(out)
    assert cfg["subcommand"] == "anneal"
    assert cfg["J"] == 1.0
    assert cfg["h"] == 1e-3
    assert cfg["N"] == 1000
    assert cfg["tf"] == 1.0
    assert cfg["schedule"] == "quintic"
    assert cfg["assist"] == "mean-field"
    assert cfg["n_outputs"] == 201


def test_config_file_layering(tmp_path, capsys):
    cfg_file = tmp_path / "run.json"
    cfg_file.write_text(json.dumps({"N": 30, "steps": 200, "tf": 0.5}))
    code, out, _ = run_cli(["anneal", "--config", str(cfg_file),
                            "--steps", "400", "--dry-run"], capsys)
    assert code == 0
    cfg = json.loads(out)
    # CLI beats config file beats defaults
    assert cfg["steps"] == 400
    assert cfg["N"] == 30
    assert cfg["tf"] == 0.5
    assert cfg["J"] == 1.0


def test_unknown_config_key_rejected(tmp_path, capsys):
    cfg_file = tmp_path / "run.json"
    cfg_file.write_text(json.dumps({"coupling": 2.0}))
    code, _, err = run_cli(["anneal", "--config", str(cfg_file)], capsys)
    assert code == 2
    assert "unknown config key" in err


def test_malformed_config_rejected(tmp_path, capsys):
    cfg_file = tmp_path / "run.json"
    cfg_file.write_text("not json")
    code, _, err = run_cli(["anneal", "--config", str(cfg_file)], capsys)
    assert code == 2
    cfg_file.write_text("[1, 2]")
    code, _, err = run_cli(["anneal", "--config", str(cfg_file)], capsys)
    assert code == 2


def test_empty_values_is_usage_error(capsys):
    code, _, err = run_cli(["sweep-n", "--values", ""], capsys)
    assert code == 2
    assert "non-empty" in err


def test_bad_flag_value_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["anneal", "--schedule", "hexic"])
    assert exc.value.code == 2


def test_resolve_config_casts_types():
    cfg = resolve_config("anneal", {"N": "25", "steps": "100"})
    assert cfg["N"] == 25 and cfg["steps"] == 100
    cfg = resolve_config("sweep-n", {"values": "10,20,30"})
    assert cfg["values"] == [10, 20, 30]
    cfg = resolve_config("sweep-tf", {"values": "0.1,1"})
    assert cfg["values"] == [0.1, 1.0]


def _read_csv(path):
    text = path.read_text()
    lines = text.split("\n")
    assert lines[-1] == ""  # trailing LF
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:-1]]
    return text, header, rows


def test_anneal_writes_contract_files(tmp_path, capsys):
    out = tmp_path / "run.csv"
    args = ["anneal", "--N", "24", "--steps", "400", "--n-outputs", "21",
            "--output", str(out), "--plot-script", str(tmp_path / "p.gp")]
    code, stdout, _ = run_cli(args, capsys)
    assert code == 0

    text, header, rows = _read_csv(out)
    assert header == ["s", "gamma", "theta_dot", "mx", "my", "mz",
                      "fidelity", "norm_defect"]
    assert len(rows) == 21
    assert "\r" not in text
    assert rows[0][0] == "0" and rows[-1][0] == "1"

    summary = json.loads((tmp_path / "run.json").read_text())
    for key in ("final_mz", "final_fidelity", "min_fidelity", "wall_time_s",
                "parameters", "steps"):
        assert key in summary
    assert summary["parameters"]["N"] == 24
    assert summary["final_mz"] == pytest.approx(float(rows[-1][5]), rel=1e-12)
    assert json.loads(stdout)["final_mz"] == summary["final_mz"]

    plot = (tmp_path / "p.gp").read_text()
    assert str(out) in plot and "plot" in plot


def test_anneal_output_is_deterministic(tmp_path, capsys):
    texts = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        code, _, _ = run_cli(["anneal", "--N", "16", "--steps", "200",
                              "--n-outputs", "11", "--output", str(out)],
                             capsys)
        assert code == 0
        texts.append(out.read_text())
    assert texts[0] == texts[1]


def test_numbers_use_twelve_significant_digits(tmp_path, capsys):
    out = tmp_path / "run.csv"
    run_cli(["anneal", "--N", "16", "--steps", "200", "--n-outputs", "5",
             "--output", str(out)], capsys)
    _, _, rows = _read_csv(out)
    for row in rows:
        for cell in row:
            assert cell == format(float(cell), ".12g")


def test_sweep_n_rows_in_input_order(tmp_path, capsys):
    out = tmp_path / "sn.csv"
    code, _, _ = run_cli(["sweep-n", "--values", "20,10", "--steps", "200",
                          "--n-outputs", "5", "--output", str(out)], capsys)
    assert code == 0
    _, header, rows = _read_csv(out)
    assert header == ["N", "final_mz", "final_fidelity", "min_fidelity"]
    assert [r[0] for r in rows] == ["20", "10"]


def test_sweep_n_matches_single_runs(tmp_path, capsys):
    # aggregated rows must agree with individually launched trajectories
    sweep = tmp_path / "sn.csv"
    run_cli(["sweep-n", "--values", "10,14", "--steps", "300",
             "--n-outputs", "9", "--theta-mode", "analytic",
             "--output", str(sweep)], capsys)
    _, _, rows = _read_csv(sweep)
    for n, row in zip((10, 14), rows):
        single = tmp_path / f"single{n}.csv"
        run_cli(["anneal", "--N", str(n), "--steps", "300",
                 "--n-outputs", "9", "--output", str(single)], capsys)
        summary = json.loads(
            (tmp_path / f"single{n}.json").read_text())
        assert float(row[2]) == pytest.approx(summary["final_fidelity"],
                                              abs=1e-12)


def test_sweep_tf_axis_column(tmp_path, capsys):
    out = tmp_path / "st.csv"
    code, _, _ = run_cli(["sweep-tf", "--N", "12", "--values", "0.2,0.4",
                          "--steps", "300", "--n-outputs", "5",
                          "--output", str(out)], capsys)
    assert code == 0
    _, header, rows = _read_csv(out)
    assert header[0] == "tf"
    assert [r[0] for r in rows] == ["0.2", "0.4"]


def test_meanfield_trace_columns(tmp_path, capsys):
    out = tmp_path / "mf.csv"
    code, _, _ = run_cli(["meanfield-trace", "--n-outputs", "41",
                          "--output", str(out)], capsys)
    assert code == 0
    _, header, rows = _read_csv(out)
    assert header == ["s", "gamma", "gamma_dot", "mz", "mz_dot", "theta_dot",
                      "residual"]
    assert len(rows) == 41
    assert max(float(r[6]) for r in rows) < 1e-10


def test_variational_compare_columns(tmp_path, capsys):
    out = tmp_path / "vc.csv"
    code, _, _ = run_cli(["variational-compare", "--N", "8",
                          "--n-outputs", "9", "--output", str(out)], capsys)
    assert code == 0
    _, header, rows = _read_csv(out)
    assert header == ["s", "alpha", "theta_dot", "ratio"]
    assert rows[0][3] == "nan"


def test_twolevel_demo(tmp_path, capsys):
    out = tmp_path / "tl.csv"
    code, stdout, _ = run_cli(["twolevel-demo", "--seed", "3",
                               "--output", str(out)], capsys)
    assert code == 0
    _, header, rows = _read_csv(out)
    assert header == ["s", "gamma", "h", "theta_dot", "fidelity"]
    assert len(rows) == 101
    assert json.loads(stdout)["min_fidelity"] > 1 - 1e-9


def test_twolevel_demo_unassisted(tmp_path, capsys):
    out = tmp_path / "tl.csv"
    code, stdout, _ = run_cli(["twolevel-demo", "--seed", "3", "--tf", "0.05",
                               "--assist", "none", "--output", str(out)],
                              capsys)
    assert code == 0
    assert json.loads(stdout)["min_fidelity"] < 0.999


def test_diagnostics_json_report(tmp_path, capsys):
    report_file = tmp_path / "report.json"
    code, stdout, _ = run_cli(["diagnostics", "--output", str(report_file)],
                              capsys)
    assert code == 0
    report = json.loads(stdout)
    assert report["passed"] is True
    assert {c["name"] for c in report["checks"]} >= {
        "spin_commutators", "casimir_identity", "meanfield_root_residual",
        "gauge_trace_formula", "critical_exponent",
        "variational_substitution_identity"}
    for check in report["checks"]:
        assert set(check) == {"name", "passed", "measured", "tolerance",
                              "detail"}
    assert json.loads(report_file.read_text()) == report


def test_numerical_failure_exit_code(tmp_path, capsys):
    # h = 0 cannot support the mean-field assist: numerical failure, not
    # a usage error
    code, _, err = run_cli(["anneal", "--h", "0", "--N", "8",
                            "--steps", "50",
                            "--output", str(tmp_path / "x.csv")], capsys)
    assert code == 1
    assert "numerical failure" in err


def test_console_script_version():
    out = subprocess.run([sys.executable, "-m", "spincd.cli", "--version"],
                         capture_output=True, text=True, check=True)
    assert "spincd" in out.stdout
