"""Tests for the scenario layer and the command line interface."""

import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from simopo.cli import main
from simopo.errors import ConfigError
from simopo.scenarios import SCENARIOS, list_scenarios, parse_sweep, run


def read_csv(path):
    lines = path.read_text(encoding="utf-8").split("\n")
    assert lines[-1] == ""
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:-1]]
    return header, rows


class TestRegistry:
    def test_eight_scenarios(self):
        assert len(SCENARIOS) == 8

    def test_schema_names_figures(self):
        schema = list_scenarios()
        figures = {info["figure"] for info in schema.values()}
        assert {"fig2a", "fig4", "fig5", "fig6cd", "fig8"} <= figures
        for info in schema.values():
            assert "parameters" in info and "description" in info

    def test_unknown_scenario(self):
        with pytest.raises(ConfigError, match="valid scenarios"):
            run("does-not-exist", "x.csv")

    def test_unknown_parameter(self):
        with pytest.raises(ConfigError, match="unknown parameter"):
            run("mode-spectrum", "x.csv", waist_ratio=2.0)

    def test_parse_sweep(self):
        assert parse_sweep("0:3:61") == (0.0, 3.0, 61)
        with pytest.raises(ConfigError):
            parse_sweep("0:3")
        with pytest.raises(ConfigError):
            parse_sweep("0:3:1")


class TestDatasets:
    def test_mode_spectrum_reference_row(self, tmp_path):
        result = run("mode-spectrum", tmp_path / "spectrum.csv", nmax=10)
        header, rows = read_csv(result.csv_path)
        assert rows[0][header.index("squeezing_db")].startswith("9.54")
        assert len(rows) == 11

    def test_determinism(self, tmp_path):
        first = run("mode-spectrum", tmp_path / "a.csv", nmax=8)
        second = run("mode-spectrum", tmp_path / "b.csv", nmax=8)
        assert first.csv_path.read_bytes() == second.csv_path.read_bytes()
        a = json.loads(first.manifest_path.read_text())
        b = json.loads(second.manifest_path.read_text())
        a.pop("columns")
        b.pop("columns")
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_csv_format(self, tmp_path):
        result = run("mode-spectrum", tmp_path / "spectrum.csv", nmax=6)
        raw = result.csv_path.read_bytes()
        assert b"\r" not in raw
        header, rows = read_csv(result.csv_path)
        # shortest round-trip decimals: parsing back reproduces the value
        for row, original in zip(rows, result.rows):
            for cell, value in zip(row[1:], original[1:]):
                assert float(cell) == float(value)

    def test_manifest_records_parameters(self, tmp_path):
        result = run("mismatch-sweep", tmp_path / "m.csv", nmax=6, sweep=(0, 2, 5))
        manifest = json.loads(result.manifest_path.read_text())
        assert manifest["scenario"] == "mismatch-sweep"
        assert manifest["parameters"]["nmax"] == 6
        assert manifest["parameters"]["sweep"] == [0, 2, 5]
        assert manifest["library_version"]
        assert manifest["row_count"] == len(result.rows)

    def test_mismatch_sweep_dominance(self, tmp_path):
        result = run("mismatch-sweep", tmp_path / "m.csv", nmax=12, sweep=(0.0, 2.0, 9))
        cols = result.columns
        for row in result.rows:
            assert row[cols.index("db_multimode")] >= row[cols.index("db_single_mode")] - 1e-9

    def test_gouy_sweep_shape(self, tmp_path):
        result = run("gouy-sweep", tmp_path / "g.csv", nmax=6, sweep=(0, 0.01, 5), max_order=3)
        assert len(result.rows) == 5 * 4
        orders = {row[1] for row in result.rows}
        assert orders == {0, 1, 2, 3}

    def test_sideband_sweep_fundamental_monotone(self, tmp_path):
        result = run("sideband-sweep", tmp_path / "s.csv", nmax=4, sweep=(0, 2, 9), max_order=0)
        sx = [row[2] for row in result.rows]
        assert all(b >= a - 1e-12 for a, b in zip(sx, sx[1:]))

    def test_loss_sweep_triple(self, tmp_path):
        result = run("loss-sweep", tmp_path / "l.csv", nmax=8, sweep=(0.0, 2.0, 5))
        etas = sorted({row[0] for row in result.rows})
        assert etas == [0.9, 0.95, 1.0]
        cols = result.columns
        by_eta = {eta: [r for r in result.rows if r[0] == eta] for eta in etas}
        for rows_a, rows_b in [(by_eta[1.0], by_eta[0.95]), (by_eta[0.95], by_eta[0.9])]:
            for better, worse in zip(rows_a, rows_b):
                assert better[cols.index("var_multimode")] <= worse[cols.index("var_multimode")]

    def test_waist_mismatch_matched_column(self, tmp_path):
        result = run("waist-mismatch", tmp_path / "w.csv", nmax=8, sweep=(0.0, 2.0, 5))
        direct = run("mismatch-sweep", tmp_path / "d.csv", nmax=8, sweep=(0.0, 2.0, 5))
        cols_w, cols_d = result.columns, direct.columns
        for mixed_row, direct_row in zip(result.rows, direct.rows):
            assert mixed_row[cols_w.index("var_matched")] == pytest.approx(
                direct_row[cols_d.index("var_multimode")], abs=1e-12
            )

    def test_sinc_compare_plumbing(self, tmp_path):
        # pinned alpha and pump waist: no fitting, just the projection pipeline
        result = run(
            "sinc-compare",
            tmp_path / "sc.csv",
            nmax=6,
            sweep=(0.0, 1.5, 4),
            alpha=0.46,
            pump_waist=2.12,
        )
        manifest = json.loads(result.manifest_path.read_text())
        assert manifest["fitted_alpha"] == 0.46
        cols = result.columns
        for row in result.rows:
            assert 0 < row[cols.index("var_sinc")] <= 1.5

    def test_gouy_map_sentinels(self, tmp_path):
        result = run("gouy-map", tmp_path / "map.csv", nmax=6, sweep=(-0.004, 0.004, 5))
        header, rows = read_csv(result.csv_path)
        status = header.index("status")
        unstable = [row for row in rows if row[status] == "unstable"]
        stable = [row for row in rows if row[status] == "ok"]
        assert unstable and stable
        for row in unstable:
            assert row[header.index("theta_gouy")] == ""
            assert row[header.index("enhancement_db")] == ""
        for row in stable:
            float(row[header.index("theta_gouy")])
        origin = [r for r in rows if float(r[0]) == 0.0 and float(r[1]) == 0.0]
        assert origin[0][status] == "ok"
        assert float(origin[0][header.index("theta_gouy")]) == 0.0

    def test_convergence_column(self, tmp_path):
        result = run(
            "mismatch-sweep",
            tmp_path / "conv.csv",
            nmax=10,
            sweep=(0.0, 1.5, 4),
            check_convergence=True,
        )
        assert result.columns[-1] == "conv_delta_db"
        manifest = json.loads(result.manifest_path.read_text())
        assert manifest["convergence_max_delta_db"] >= 0.0


class TestCli:
    def run_cli(self, *args):
        return CliRunner().invoke(main, list(args))

    def test_list(self):
        result = self.run_cli("list")
        assert result.exit_code == 0
        assert "mode-spectrum" in result.output

    def test_list_json(self):
        result = self.run_cli("list", "--json")
        schema = json.loads(result.output)
        assert len(schema) == 8

    def test_run_writes_files(self, tmp_path):
        out = tmp_path / "spectrum.csv"
        result = self.run_cli("run", "mode-spectrum", "--nmax", "6", "--out", str(out))
        assert result.exit_code == 0, result.output
        assert out.exists() and out.with_suffix(".csv.manifest.json").exists()

    def test_unknown_scenario_exit_code(self):
        result = self.run_cli("run", "nope")
        assert result.exit_code == 2
        assert "valid scenarios" in result.output

    def test_bad_sweep_exit_code(self, tmp_path):
        result = self.run_cli(
            "run", "mode-spectrum", "--sweep", "oops", "--out", str(tmp_path / "x.csv")
        )
        assert result.exit_code == 2

    def test_over_threshold_exit_code(self, tmp_path):
        result = self.run_cli(
            "run", "mode-spectrum", "--g00", "1.5", "--out", str(tmp_path / "x.csv")
        )
        assert result.exit_code == 3

    def test_config_file_and_flag_override(self, tmp_path):
        config = tmp_path / "run.conf"
        config.write_text("nmax = 5\nxi = 0.5\n# comment\n\ng00 = 0.25\n", encoding="utf-8")
        out = tmp_path / "out.csv"
        result = self.run_cli(
            "run", "mode-spectrum", "--config", str(config), "--xi", "0.25",
            "--out", str(out),
        )
        assert result.exit_code == 0, result.output
        manifest = json.loads((tmp_path / "out.csv.manifest.json").read_text())
        assert manifest["parameters"]["nmax"] == 5  # from file
        assert manifest["parameters"]["xi"] == 0.25  # flag wins
        assert manifest["parameters"]["g00"] == 0.25  # from file

    def test_config_file_bad_key(self, tmp_path):
        config = tmp_path / "run.conf"
        config.write_text("bogus = 1\n", encoding="utf-8")
        result = self.run_cli("run", "mode-spectrum", "--config", str(config))
        assert result.exit_code == 2
        assert "bogus" in result.output

    def test_out_from_config_file(self, tmp_path):
        config = tmp_path / "run.conf"
        out = tmp_path / "from_config.csv"
        config.write_text(f"out = {out}\nnmax = 4\n", encoding="utf-8")
        result = self.run_cli("run", "mode-spectrum", "--config", str(config))
        assert result.exit_code == 0, result.output
        assert out.exists()
