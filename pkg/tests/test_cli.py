import csv

import pytest

from afs_pacbf.cli import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, EXIT_SAFETY, main


def test_run_no_filter_exit_safety(tmp_path, capsys):
    assert main(["run", "--no-filter", "--out", str(tmp_path), "--formats", "csv,json"]) == EXIT_SAFETY
    assert (tmp_path / "trajectory.csv").exists() and (tmp_path / "summary.json").exists()


def test_run_short_ok(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[sim]\nt_max = 1.0\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--formats", "json"]) == EXIT_OK


def test_run_infeasible_exit(tmp_path):
    # bounds too tight for a vehicle driving straight at an obstacle at speed
    cfg = tmp_path / "c.toml"
    cfg.write_text(
        "[start]\nx_f = 0\ny_f = 0\ntheta_f = 0\nbeta = 0\nv_f = 1\nu_betadot = 0\n"
        "[goal]\nx = 9\ny = 0\n"
        "[bounds]\nv_min = 0.99\nv_max = 1.0\nbetadot_min_deg = -0.1\nbetadot_max_deg = 0.1\n"
        "[sim]\nt_max = 6.0\n"
        "[[obstacles]]\nx_o = 5\ny_o = 0\nR_o = 1\n"
    )
    code = main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--formats", "json"])
    assert code in (EXIT_INFEASIBLE, EXIT_SAFETY)


def test_config_error_exit(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[nope]\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err
    assert main(["locus", "--config", str(tmp_path / "missing.toml")]) == EXIT_CONFIG


def test_locus_cli(tmp_path):
    out = tmp_path / "locus.csv"
    assert main(["locus", "--samples", "3", "--out", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 3
    assert float(rows[1]["d_h2"]) == pytest.approx(2.46554, abs=1e-4)
    assert float(rows[0]["d_h1"]) == pytest.approx(1.0, abs=1e-12)
    assert main(["locus", "--samples", "2"]) == EXIT_CONFIG


def test_selftests_cli(capsys):
    assert main(["validate", "--trials", "50"]) == EXIT_OK
    assert main(["qp-selftest", "--trials", "10"]) == EXIT_OK
    assert "PASS" in capsys.readouterr().out


def test_bad_format():
    with pytest.raises(SystemExit):
        main(["run", "--formats", "pdf"])
