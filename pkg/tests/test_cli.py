"""End-to-end command tests: files, exit codes, determinism, config handling."""

import json
import math

import numpy as np
import pytest

from magflow import MagneticConfig, alpha_radial, cli, density_cover, radius
from magflow.halfplane import from_disk

STD = MagneticConfig(1.0, 0.25)


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def read_csv(path):
    lines = path.read_text().strip().splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


class TestFlowCommand:
    def test_subcritical_summary(self, tmp_path):
        rc = cli.main(["flow", "--B", "1", "--E", "0.25",
                       "--grid", "201", "--out", str(tmp_path)])
        assert rc == 0
        for name in ("flow_exact.csv", "flow_numeric.csv", "flow_summary.json"):
            assert (tmp_path / name).exists()
        summary = read_json(tmp_path / "flow_summary.json")
        assert summary["regime"] == "Subcritical"
        assert summary["period"] == pytest.approx(8.885766, abs=1e-6)
        assert summary["return_residual"] < 1e-9
        assert summary["max_divergence"] < 1e-8
        assert summary["step_warning"] is False
        header, rows = read_csv(tmp_path / "flow_exact.csv")
        assert header == ["t", "re_z", "im_z", "re_v", "im_v"]
        assert len(rows) == 201

    def test_critical_has_no_period(self, tmp_path):
        rc = cli.main(["flow", "--B", "1", "--E", "0.5",
                       "--grid", "101", "--out", str(tmp_path)])
        assert rc == 0
        summary = read_json(tmp_path / "flow_summary.json")
        assert summary["regime"] == "Critical"
        assert "period" not in summary
        assert "return_residual" not in summary

    def test_supercritical_lyapunov(self, tmp_path):
        rc = cli.main(["flow", "--B", "1", "--E", "1",
                       "--grid", "101", "--out", str(tmp_path)])
        assert rc == 0
        summary = read_json(tmp_path / "flow_summary.json")
        assert summary["regime"] == "Supercritical"
        assert summary["lyapunov"] == pytest.approx(0.5, abs=1e-3)


class TestDensityCommand:
    def test_cover_grid(self, tmp_path):
        rc = cli.main(["density", "--B", "1", "--E", "0.25",
                       "--grid", "64", "--out", str(tmp_path)])
        assert rc == 0
        sidecar = read_json(tmp_path / "density_summary.json")
        assert sidecar["surface"] == "cover"
        assert sidecar["R_E"] == pytest.approx(math.acosh(3.0), rel=1e-12)
        assert sidecar["mass_rel_err"] < 0.01
        assert sidecar["mass_normalized"] == pytest.approx(1.0, rel=0.01)
        assert sidecar["center_slope"] == pytest.approx(-1.0, abs=0.05)
        assert sidecar["boundary_slope"] == pytest.approx(-0.5, abs=0.05)
        assert sidecar["center_constant"] == pytest.approx(
            sidecar["center_constant_expected"], rel=1e-2)
        assert sidecar["boundary_constant"] == pytest.approx(
            sidecar["boundary_constant_expected"], rel=1e-2)
        header, rows = read_csv(tmp_path / "density_grid.csv")
        assert header == ["x", "y", "d_to_center", "alpha_raw",
                          "alpha_normalized", "n_preimages", "flag"]
        assert len(rows) == 64 * 64

    def test_cover_rows_match_pointwise_density(self, tmp_path):
        cli.main(["density", "--grid", "32", "--out", str(tmp_path)])
        _, rows = read_csv(tmp_path / "density_grid.csv")
        R = radius(STD)
        checked = 0
        for row in rows[::17]:
            x, y, d, araw = (float(v) for v in row[:4])
            if row[6] != "Regular" or d > 0.95 * R:
                continue
            s = density_cover(STD, complex(from_disk(complex(x, y))))
            assert araw == pytest.approx(s.alpha_raw, rel=1e-8)
            assert int(row[5]) == len(s.preimages)
            checked += 1
        assert checked > 20

    def test_bolza_grid(self, tmp_path):
        rc = cli.main(["density", "--surface", "bolza", "--B", "1", "--E", "0.25",
                       "--grid", "48", "--out", str(tmp_path)])
        assert rc == 0
        sidecar = read_json(tmp_path / "density_summary.json")
        assert sidecar["translates"] == 9
        assert sidecar["enumeration_cap_exceeded"] is False

    def test_bolza_single_translate_regime_matches_cover(self, tmp_path):
        cfg = MagneticConfig(1.0, 0.15)
        cli.main(["density", "--surface", "bolza", "--B", "1", "--E", "0.15",
                  "--grid", "40", "--out", str(tmp_path)])
        _, rows = read_csv(tmp_path / "density_grid.csv")
        R = radius(cfg)
        inside = outside = 0
        for row in rows:
            if row[6] == "Regular":
                d, araw = float(row[2]), float(row[3])
                assert araw == pytest.approx(float(alpha_radial(cfg, d)), rel=1e-8)
                inside += 1
            elif row[6] == "Outside" and row[2] != "inf":
                assert float(row[2]) > R - 1e-9
                assert float(row[3]) == 0.0
                outside += 1
        assert inside > 100 and outside > 100

    def test_chern_violation_fails(self, tmp_path, capsys):
        rc = cli.main(["density", "--surface", "bolza", "--B", "0.7", "--E", "0.1",
                       "--out", str(tmp_path)])
        assert rc == 2
        assert "Chern constraint violated" in capsys.readouterr().err

    def test_enumeration_cap(self, tmp_path, capsys):
        rc = cli.main(["density", "--surface", "bolza", "--B", "1", "--E", "0.497",
                       "--out", str(tmp_path)])
        assert rc == 2
        sidecar = read_json(tmp_path / "density_summary.json")
        assert sidecar["enumeration_cap_exceeded"] is True
        assert "enumeration cap" in capsys.readouterr().err

    def test_unknown_surface_from_config(self, tmp_path, capsys):
        ini = tmp_path / "run.ini"
        ini.write_text("[magflow]\nsurface = weird\n")
        rc = cli.main(["density", "--config", str(ini), "--out", str(tmp_path)])
        assert rc == 2
        assert "unknown surface" in capsys.readouterr().err


class TestSpectrumCommand:
    def test_resonant_ladder(self, tmp_path):
        rc = cli.main(["spectrum", "--k", "10", "--B", "1", "--out", str(tmp_path)])
        assert rc == 0
        header, rows = read_csv(tmp_path / "spectrum.csv")
        assert header == ["k", "m", "lambda", "scaled"]
        assert len(rows) == 10
        summary = read_json(tmp_path / "spectrum_summary.json")
        assert summary["top_scaled"] == 0.5
        assert summary["gap_top"] == 0.0
        assert summary["gap_beyond"] == 0.0

    def test_level_selection(self, tmp_path):
        rc = cli.main(["spectrum", "--k", "100", "--B", "1", "--E", "0.25",
                       "--out", str(tmp_path)])
        assert rc == 0
        sel = read_json(tmp_path / "spectrum_summary.json")["selected"]
        assert sel["m"] == 29
        assert sel["lambda"] == 2515.0
        assert sel["scaled"] == pytest.approx(0.2515, abs=1e-12)

    def test_empty_ladder_fails(self, tmp_path, capsys):
        rc = cli.main(["spectrum", "--k", "1", "--B", "0.5", "--out", str(tmp_path)])
        assert rc == 2
        assert "empty ladder: kB < 1" in capsys.readouterr().err


class TestSampleCommand:
    def test_golden_rerun_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            rc = cli.main(["sample", "--n", "50000", "--seed", "99", "--out", str(out)])
            assert rc == 0
        assert (a / "histogram.csv").read_bytes() == (b / "histogram.csv").read_bytes()
        assert (a / "sample_report.json").read_bytes() == (b / "sample_report.json").read_bytes()

    def test_thread_env_does_not_change_output(self, tmp_path, monkeypatch):
        a, b = tmp_path / "t1", tmp_path / "t4"
        monkeypatch.setenv("MAGFLOW_THREADS", "1")
        cli.main(["sample", "--n", "2500000", "--seed", "5", "--out", str(a)])
        monkeypatch.setenv("MAGFLOW_THREADS", "4")
        cli.main(["sample", "--n", "2500000", "--seed", "5", "--out", str(b)])
        assert (a / "histogram.csv").read_bytes() == (b / "histogram.csv").read_bytes()

    def test_report_contents(self, tmp_path):
        cli.main(["sample", "--n", "200000", "--seed", "11", "--out", str(tmp_path)])
        report = read_json(tmp_path / "sample_report.json")
        assert report["n"] == 200000
        assert report["rings"] == 256
        assert report["center_slope"] == pytest.approx(-1.0, abs=0.3)
        header, rows = read_csv(tmp_path / "histogram.csv")
        assert header == ["r_lo", "r_hi", "count", "est_density",
                          "exact_ring_avg", "rel_err"]
        assert sum(int(r[2]) for r in rows) == 200000

    def test_small_n_fails(self, tmp_path, capsys):
        rc = cli.main(["sample", "--n", "5000", "--out", str(tmp_path)])
        assert rc == 2
        assert "need at least 10^4 samples" in capsys.readouterr().err


class TestEquidistCommand:
    def test_short_run_writes_reports(self, tmp_path):
        rc = cli.main(["equidist", "--T", "5", "--n", "2000", "--grid", "120",
                       "--seed", "7", "--out", str(tmp_path)])
        assert rc == 0
        report = read_json(tmp_path / "equidist.json")
        assert report["E"] == 0.5  # defaults to the critical energy
        assert report["space_average"] > 0.0
        assert len(report["orbit_averages"]) == 3
        assert len(report["initial_conditions"]) == 3
        group = read_json(tmp_path / "group.json")
        assert group["genus"] == 2
        assert len(group["generators"]) == 8
        assert group["relation_residual"] < 1e-9
        assert group["area"] == pytest.approx(4.0 * math.pi, abs=1e-6)

    def test_off_critical_energy_fails(self, tmp_path, capsys):
        rc = cli.main(["equidist", "--E", "0.3", "--out", str(tmp_path)])
        assert rc == 2
        assert "equidistribution test requires critical energy" in capsys.readouterr().err


class TestVerifyCommand:
    def test_single_check_passes(self, tmp_path):
        rc = cli.main(["verify", "--only", "periodicity", "--out", str(tmp_path)])
        assert rc == 0
        report = read_json(tmp_path / "verify_report.json")
        assert report["j_sign"] == 1.0
        assert report["passed"] is True
        assert report["checks"][0]["name"] == "periodicity"
        assert report["checks"][0]["passed"] is True

    def test_flipped_orientation_is_caught(self, tmp_path):
        rc = cli.main(["verify", "--only", "flow-oracle", "--flip-j",
                       "--out", str(tmp_path)])
        assert rc == 3
        report = read_json(tmp_path / "verify_report.json")
        assert report["j_sign"] == -1.0
        assert report["passed"] is False
        assert report["checks"][0]["name"] == "flow-oracle"
        assert report["checks"][0]["passed"] is False

    def test_unknown_check_fails(self, tmp_path, capsys):
        rc = cli.main(["verify", "--only", "bogus", "--out", str(tmp_path)])
        assert rc == 2
        assert "unknown check" in capsys.readouterr().err


class TestConfigHandling:
    def test_config_supplies_defaults_and_flags_win(self, tmp_path):
        ini = tmp_path / "run.ini"
        ini.write_text("[magflow]\nB = 0.5\n\n[spectrum]\nk = 20\n")
        out1 = tmp_path / "from_config"
        rc = cli.main(["spectrum", "--config", str(ini), "--out", str(out1)])
        assert rc == 0
        summary = read_json(out1 / "spectrum_summary.json")
        assert summary["k"] == 20 and summary["B"] == 0.5
        assert summary["n_levels"] == 10
        out2 = tmp_path / "flag_wins"
        rc = cli.main(["spectrum", "--config", str(ini), "--B", "1.0",
                       "--out", str(out2)])
        assert rc == 0
        summary = read_json(out2 / "spectrum_summary.json")
        assert summary["B"] == 1.0
        assert summary["n_levels"] == 20

    def test_missing_config_fails(self, tmp_path, capsys):
        rc = cli.main(["spectrum", "--config", str(tmp_path / "nope.ini"),
                       "--out", str(tmp_path)])
        assert rc == 2
        assert "config file not found" in capsys.readouterr().err

    def test_out_directory_is_created(self, tmp_path):
        nested = tmp_path / "deep" / "nested" / "dir"
        rc = cli.main(["spectrum", "--k", "3", "--B", "1", "--out", str(nested)])
        assert rc == 0
        assert (nested / "spectrum.csv").exists()
