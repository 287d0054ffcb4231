import dataclasses
import json
import math
import subprocess
import sys

import numpy as np
import pytest

import su2qpt.thermo as thermo_module
from su2qpt import cli, validation
from su2qpt.model import analytic_spectrum
from su2qpt.spin_algebra import Multiplet
from su2qpt.thermo import observables


def run(argv, capsys):
    rc = cli.main(argv)
    cap = capsys.readouterr()
    return rc, cap.out, cap.err


class TestParseGrid:
    def test_count_form_hits_endpoints_exactly(self):
        g = cli.parse_grid("0:1:5")
        assert np.array_equal(g, [0.0, 0.25, 0.5, 0.75, 1.0])
        assert cli.parse_grid("0.02:1.4:1000").shape == (1000,)
        assert cli.parse_grid("0.02:1.4:1000")[0] == 0.02
        assert cli.parse_grid("0.02:1.4:1000")[-1] == 1.4

    def test_count_form_is_uniform(self):
        # Spacing variation relative to the spacing itself would demand
        # 2e-18 here, below float64 resolution near 1.7; the meaningful
        # statement is deviation from the ideal affine grid, span-relative.
        g = cli.parse_grid("0.1:1.7:777")
        span = float(g[-1] - g[0])
        ideal = g[0] + np.arange(g.size) * (span / (g.size - 1))
        assert float(np.abs(g - ideal).max()) <= 1e-15 * span
        d = np.diff(g)
        assert float(d.max() - d.min()) <= 1e-15 * span

    def test_comma_list_and_single_value(self):
        assert np.array_equal(cli.parse_grid("70,90,110"), [70.0, 90.0, 110.0])
        assert np.array_equal(cli.parse_grid("2.5"), [2.5])
        assert np.array_equal(cli.parse_grid("1:1:1"), [1.0])

    @pytest.mark.parametrize(
        "bad",
        [
            "",
            "1:0:5",
            "0:1:0",
            "0:1",
            "1:2:3:4",
            "1:2:1",
            "a,b",
            "3,2,1",
            "inf",
            "0:inf:5",
            "1,1,2",
        ],
    )
    def test_rejects_malformed_specs(self, bad):
        with pytest.raises(ValueError):
            cli.parse_grid(bad)


def test_help_exits_zero(capsys):
    rc, out, _ = run(["--help"], capsys)
    assert rc == 0
    assert "spectrum" in out and "validate" in out


def test_missing_subcommand_is_usage_error(capsys):
    rc, _, err = run([], capsys)
    assert rc == 1
    assert "error" in err


def test_unknown_subcommand_is_usage_error(capsys):
    rc, _, err = run(["frobnicate"], capsys)
    assert rc == 1
    assert "invalid choice" in err


class TestSpectrum:
    def test_frozen_csv_n4(self, capsys):
        rc, out, _ = run(["spectrum", "--n", "4", "--lambda", "0.0,0.5,1.0"], capsys)
        assert rc == 0
        assert out == (
            "m,intercept,slope,energy_at_0,energy_at_0.5,energy_at_1\n"
            "-2,-2,0,-2,-2,-2\n"
            "-1,-1,-3,-1,-2.5,-4\n"
            "0,0,-4,0,-2,-4\n"
            "1,1,-3,1,-0.5,-2\n"
            "2,2,0,2,2,2\n"
            "# critical_couplings,0.33333333333333331,1\n"
        )

    def test_n2_rows(self, capsys):
        rc, out, _ = run(["spectrum", "--n", "2"], capsys)
        assert rc == 0
        body = [ln for ln in out.strip().split("\n") if not ln.startswith(("m,", "#"))]
        # intercept/slope pairs for levels {-1, -xi, +1}
        assert body == ["-1,-1,0", "0,0,-1", "1,1,0"]

    def test_json_variant(self, capsys):
        rc, out, _ = run(
            ["spectrum", "--n", "4", "--lambda", "0:1:3", "--format", "json"], capsys
        )
        assert rc == 0
        doc = json.loads(out)
        assert doc["n_particles"] == 4
        assert doc["critical_couplings"] == [1 / 3, 1.0]
        assert doc["lambda"] == [0.0, 0.5, 1.0]
        assert [lv["slope"] for lv in doc["levels"]] == [0.0, -3.0, -4.0, -3.0, 0.0]
        assert doc["levels"][1]["energies"] == [-1.0, -2.5, -4.0]

    def test_rejects_zero_particles(self, capsys):
        rc, _, err = run(["spectrum", "--n", "0"], capsys)
        assert rc == 1
        assert "error" in err

    def test_rejects_fractional_n(self, capsys):
        rc, _, err = run(["spectrum", "--n", "2.5"], capsys)
        assert rc == 1
        assert "error" in err


class TestSweep:
    def test_csv_to_file(self, tmp_path, capsys):
        out_path = tmp_path / "sweep.csv"
        rc, _, _ = run(
            ["sweep", "--n", "4", "--beta", "110", "--lambda-grid", "0.3:0.4:3", "--out", str(out_path)],
            capsys,
        )
        assert rc == 0
        text = out_path.read_text()
        lines = text.strip().split("\n")
        assert lines[0] == (
            "beta,lambda,log_z,mean_energy,entropy,c_star_beta,c_star_lambda,specific_heat"
        )
        assert len(lines) == 4
        assert text.endswith("\n") and "\r" not in text

    def test_infinite_temperature_value(self, capsys):
        rc, out, _ = run(["sweep", "--n", "4", "--beta", "0", "--lambda-grid", "0.5"], capsys)
        assert rc == 0
        row = out.strip().split("\n")[1].split(",")
        assert row[2] == format(math.log(5.0), ".17g")

    def test_json_rows_match_engine(self, capsys):
        rc, out, _ = run(
            ["sweep", "--n", "8", "--beta", "5,10", "--lambda-grid", "0.1,0.9", "--format", "json"],
            capsys,
        )
        assert rc == 0
        rows = json.loads(out)
        assert [(r["beta"], r["lambda"]) for r in rows] == [
            (5.0, 0.1),
            (5.0, 0.9),
            (10.0, 0.1),
            (10.0, 0.9),
        ]
        s8 = analytic_spectrum(Multiplet(8))
        want = observables(s8, 10.0, 0.9)
        assert rows[3]["log_z"] == want.log_z
        assert rows[3]["specific_heat"] == want.specific_heat

    def test_missing_grids_are_usage_errors(self, capsys):
        rc, _, err = run(["sweep", "--n", "4", "--lambda-grid", "0:1:5"], capsys)
        assert rc == 1
        assert "beta" in err
        rc, _, err = run(["sweep", "--n", "4", "--beta", "5"], capsys)
        assert rc == 1
        assert "lambda-grid" in err

    def test_runs_twice_byte_identical(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        args = ["sweep", "--n", "4", "--beta", "70,90,110", "--lambda-grid", "0.9:1.1:50"]
        assert cli.main(args + ["--out", str(a)]) == 0
        assert cli.main(args + ["--out", str(b)]) == 0
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()
        assert len(a.read_bytes()) > 0

    def test_unwritable_out_path(self, capsys):
        rc, _, err = run(
            ["sweep", "--n", "4", "--beta", "1", "--lambda-grid", "0:1:4",
             "--out", "/nonexistent-dir/x.csv"],
            capsys,
        )
        assert rc == 1
        assert "error" in err

    def test_closed_pipe_exits_quietly(self):
        # the sweep is ~160 KB, larger than the OS pipe buffer, so closing
        # the read end mid-stream forces an EPIPE inside the child
        proc = subprocess.Popen(
            [sys.executable, "-m", "su2qpt.cli", "sweep", "--n", "4",
             "--beta", "110", "--lambda-grid", "0.02:1.4:1000"],
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
        )
        header = proc.stdout.readline()
        proc.stdout.close()
        err = proc.stderr.read()
        proc.stderr.close()
        assert proc.wait() == 1
        assert header.startswith(b"beta,lambda,")
        assert err == b""


class TestZeroT:
    def test_frozen_staircase_n2(self, capsys):
        rc, out, _ = run(["zero-t", "--n", "2", "--lambda-grid", "0:2:9"], capsys)
        assert rc == 0
        assert out == (
            "lambda,c_star_lambda_zero_t,ground_energy,degeneracy\n"
            "0,0,-1,1\n"
            "0.25,0,-1,1\n"
            "0.5,0,-1,1\n"
            "0.75,0,-1,1\n"
            "1,-0.5,-1,2\n"
            "1.25,-1,-1.25,1\n"
            "1.5,-1,-1.5,1\n"
            "1.75,-1,-1.75,1\n"
            "2,-1,-2,1\n"
        )

    def test_staircase_values_n8(self, capsys):
        rc, out, _ = run(["zero-t", "--n", "8", "--lambda-grid", "0:1.4:500", "--format", "json"], capsys)
        assert rc == 0
        rows = json.loads(out)
        values = sorted({r["c_star_lambda_zero_t"] for r in rows}, reverse=True)
        # plateau levels plus possible on-crossing midpoints
        for v in (0.0, -7.0, -12.0, -15.0, -16.0):
            assert v in values

    def test_requires_lambda_grid(self, capsys):
        rc, _, err = run(["zero-t", "--n", "4"], capsys)
        assert rc == 1
        assert "lambda-grid" in err


class TestCritical:
    def test_default_report_n8(self, capsys):
        rc, out, _ = run(["critical", "--n", "8"], capsys)
        assert rc == 0
        doc = json.loads(out)
        assert [cp["lambda_c"] for cp in doc["analytic"]] == [1 / 7, 1 / 5, 1 / 3, 1.0]
        assert doc["peaks"]["warnings"] == []
        assert doc["peaks"]["max_offset_at_beta_max"] < 0.05
        want = [1 / 7, 1 / 5, 1 / 3, 1.0]
        got = [j["lambda"] for j in doc["jumps"]["jumps"]]
        assert len(got) == 4
        assert all(abs(a - b) <= 1e-9 for a, b in zip(got, want))
        assert doc["jumps"]["plateaus"] == [0.0, -7.0, -12.0, -15.0, -16.0]
        assert "ceq" not in doc

    def test_jumps_only_n4(self, capsys):
        rc, out, _ = run(["critical", "--n", "4", "--method", "jumps"], capsys)
        assert rc == 0
        doc = json.loads(out)
        assert set(doc) == {"n_particles", "e_gap", "analytic", "jumps"}
        got = [j["lambda"] for j in doc["jumps"]["jumps"]]
        assert abs(got[0] - 1 / 3) <= 1e-9 and abs(got[1] - 1.0) <= 1e-9
        assert doc["jumps"]["plateaus"] == [0.0, -3.0, -4.0]

    def test_ceq_n2(self, capsys):
        rc, out, _ = run(["critical", "--n", "2", "--method", "ceq", "--beta", "200"], capsys)
        assert rc == 0
        doc = json.loads(out)
        assert doc["ceq"]["converged"] is True
        assert abs(doc["ceq"]["xi_star"] - 1.0) <= 1e-6
        assert doc["ceq"]["zero_t_limit"] == 1.0

    def test_all_methods_for_n2_include_ceq(self, capsys):
        rc, out, _ = run(["critical", "--n", "2"], capsys)
        assert rc == 0
        doc = json.loads(out)
        assert {"analytic", "peaks", "jumps", "ceq"} <= set(doc)

    def test_ceq_rejected_above_two_particles(self, capsys):
        rc, _, err = run(["critical", "--n", "4", "--method", "ceq"], capsys)
        assert rc == 1
        assert "n = 2" in err

    def test_unconverged_ceq_exits_two(self, capsys):
        rc, out, _ = run(["critical", "--n", "2", "--method", "ceq", "--beta", "0.1"], capsys)
        assert rc == 2
        doc = json.loads(out)
        assert doc["ceq"]["converged"] is False

    def test_short_peak_schedule_is_usage_error(self, capsys):
        rc, _, err = run(["critical", "--n", "4", "--method", "peaks", "--beta", "200"], capsys)
        assert rc == 1
        assert "schedule" in err

    def test_lambda_grid_override(self, capsys):
        rc, out, _ = run(
            ["critical", "--n", "4", "--method", "jumps", "--lambda-grid", "0:1.2:256"], capsys
        )
        assert rc == 0
        doc = json.loads(out)
        assert doc["jumps"]["window"] == [0.0, 1.2]
        assert len(doc["jumps"]["jumps"]) == 2

    def test_csv_format_rejected(self, capsys):
        rc, _, err = run(["critical", "--n", "4", "--format", "csv"], capsys)
        assert rc == 1
        assert "JSON" in err


class TestConfigFile:
    def test_config_supplies_defaults(self, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"n": 4, "beta": "110", "lambda_grid": "0.3:0.4:3"}))
        rc, out, _ = run(["sweep", "--config", str(cfg)], capsys)
        assert rc == 0
        assert out.strip().split("\n")[1].startswith("110,")

    def test_flags_override_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"n": 4, "beta": 110, "lambda_grid": [0.3, 0.4]}))
        rc, out, _ = run(["sweep", "--config", str(cfg), "--beta", "5"], capsys)
        assert rc == 0
        rows = out.strip().split("\n")[1:]
        assert all(r.startswith("5,") for r in rows)

    def test_config_for_spectrum_lambda(self, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"n": 2, "lambda": [0.0, 1.0], "format": "json"}))
        rc, out, _ = run(["spectrum", "--config", str(cfg)], capsys)
        assert rc == 0
        doc = json.loads(out)
        assert doc["levels"][1]["energies"] == [0.0, -1.0]

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"n": 4, "betas": "110"}))
        rc, _, err = run(["sweep", "--config", str(cfg), "--lambda-grid", "0:1:4"], capsys)
        assert rc == 1
        assert "betas" in err

    def test_non_object_config_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        cfg.write_text("[1, 2]")
        rc, _, err = run(["sweep", "--config", str(cfg)], capsys)
        assert rc == 1
        assert "object" in err

    def test_missing_config_file(self, capsys):
        rc, _, err = run(["sweep", "--config", "/no/such/file.json"], capsys)
        assert rc == 1
        assert "error" in err


class TestValidate:
    def test_quick_suite_passes(self, capsys):
        rc, out, _ = run(["validate", "--quick"], capsys)
        assert rc == 0
        assert "PASS" in out
        assert "FAIL" not in out
        assert "checks passed" in out

    def test_quick_skips_the_slow_check(self):
        names = [r.name for r in validation.run_all(quick=True)]
        assert not any("remnant" in n for n in names)
        assert len(names) == 7

    def test_sign_flip_mutation_is_caught(self, monkeypatch, capsys):
        real = thermo_module.observables

        def flipped(s, beta, lam):
            o = real(s, beta, lam)
            return dataclasses.replace(o, c_star_beta=-o.c_star_beta)

        monkeypatch.setattr(thermo_module, "observables", flipped)
        result = validation.check_thermo_properties()
        assert not result.passed
        rc, out, _ = run(["validate", "--quick"], capsys)
        assert rc == 1
        assert "FAIL" in out
