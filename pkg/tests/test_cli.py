import json
import subprocess
import sys

import pytest

from spherekern.cli import build_parser, resolve_config
from spherekern.errors import ConfigurationError


def run_cli(*args, **kwargs):
    # Bytes capture keeps the CRLF row endings that text mode would fold.
    res = subprocess.run(
        [sys.executable, "-m", "spherekern", *map(str, args)],
        capture_output=True, **kwargs,
    )
    return subprocess.CompletedProcess(
        res.args, res.returncode, res.stdout.decode(), res.stderr.decode()
    )


SMALL_ERROR_RATE = (
    "error-rate", "--family", "nt", "--s", "1", "--d", "3",
    "--reps", "2", "--max-exp", "5", "--eval-sample", "500",
)


def payload_of(text):
    return json.loads(text)["payload"]


class TestExitCodes:
    def test_success_is_zero(self):
        res = run_cli("kernel-eval", "--family", "nt", "--s", "1", "--u", "0")
        assert res.returncode == 0

    def test_unsupported_smoothness_is_two(self):
        """s outside the closed-form range is a configuration error."""
        res = run_cli("kernel-eval", "--family", "rf", "--s", "5", "--u", "0")
        assert res.returncode == 2
        assert "unsupported" in res.stderr.lower()

    def test_missing_required_parameter_is_two(self):
        res = run_cli("kernel-eval", "--family", "nt", "--u", "0.5")
        assert res.returncode == 2
        assert "--s" in res.stderr

    def test_bad_flag_value_is_two(self):
        res = run_cli("spectrum", "--family", "nt", "--s", "1", "--format", "xml")
        assert res.returncode == 2

    def test_numerical_failure_is_three(self):
        """A fit over a fully suppressed parity class fails numerically."""
        res = run_cli("eigendecay", "--family", "nt", "--s", "1", "--d", "3",
                      "--max-degree", "24", "--parity", "odd",
                      "--degree-min", "9", "--degree-max", "23")
        assert res.returncode == 3
        assert "FitError" in res.stderr

    def test_error_message_is_single_line(self):
        res = run_cli("kernel-eval", "--family", "rf", "--s", "5", "--u", "0")
        assert res.stderr.strip().count("\n") == 0


class TestKernelEval:
    def test_orthogonal_nt_value_in_json(self):
        """kappa_NT,1(0) = 1/pi shows up verbatim in the JSON payload."""
        res = run_cli("kernel-eval", "--family", "nt", "--s", "1", "--u", "0")
        assert res.returncode == 0
        assert "0.3183098861837907" in res.stdout

    def test_csv_rows_and_float_width(self):
        res = run_cli("kernel-eval", "--family", "nt", "--s", "1", "--u", "0",
                      "--format", "csv")
        lines = res.stdout.split("\r\n")
        assert lines[0] == "u,value"
        assert lines[1] == "0,0.31830988618379069"

    def test_rf_at_one_prints_one(self):
        res = run_cli("kernel-eval", "--family", "rf", "--s", "2", "--u", "1",
                      "--format", "csv")
        assert res.stdout.split("\r\n")[1] == "1,1"

    def test_repeatable_u_flag(self):
        res = run_cli("kernel-eval", "--family", "rf", "--s", "1",
                      "--u", "-1", "--u", "0", "--u", "1", "--format", "csv")
        rows = [ln for ln in res.stdout.split("\r\n") if ln][1:]
        assert len(rows) == 3
        assert rows[0].startswith("-1,")
        assert rows[2] == "1,1"

    def test_pair_file_input(self, tmp_path):
        pair = tmp_path / "pairs.csv"
        pair.write_text("1,0,0,0,1,0\n1,0,0,1,0,0\n")
        res = run_cli("kernel-eval", "--family", "nt", "--s", "1",
                      "--pair-file", pair, "--format", "csv")
        rows = [ln for ln in res.stdout.split("\r\n") if ln][1:]
        assert rows[0] == "0,0.31830988618379069"
        assert rows[1] == "1,2"

    def test_pair_file_rejects_non_unit(self, tmp_path):
        pair = tmp_path / "pairs.csv"
        pair.write_text("2,0,0,0,1,0\n")
        res = run_cli("kernel-eval", "--family", "nt", "--s", "1",
                      "--pair-file", pair)
        assert res.returncode == 2

    def test_needs_some_input(self):
        res = run_cli("kernel-eval", "--family", "nt", "--s", "1")
        assert res.returncode == 2
        assert "pair-file" in res.stderr


class TestConfigResolution:
    def _resolve(self, argv, config=None, tmp_path=None):
        if config is not None:
            path = tmp_path / "cfg.json"
            path.write_text(json.dumps(config))
            argv = argv + ["--config", str(path)]
        parser = build_parser()
        return resolve_config(argv[0], parser.parse_args(argv))

    def test_defaults_fill_in(self):
        cfg = self._resolve(["spectrum", "--family", "nt", "--s", "1"])
        assert cfg["d"] == 3 and cfg["max_degree"] == 60 and cfg["l"] == 2
        assert cfg["seed"] == 0 and cfg["format"] == "json"

    def test_file_supplies_values(self, tmp_path):
        cfg = self._resolve(["spectrum"], {"family": "rf", "s": 2, "d": 4},
                            tmp_path=tmp_path)
        assert cfg["family"] == "rf" and cfg["s"] == 2 and cfg["d"] == 4

    def test_flags_override_file(self, tmp_path):
        """Explicit flags beat config-file values."""
        cfg = self._resolve(["spectrum", "--s", "3"],
                            {"family": "rf", "s": 2}, tmp_path=tmp_path)
        assert cfg["s"] == 3

    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(ConfigurationError, match="unknown config keys"):
            self._resolve(["spectrum", "--family", "nt", "--s", "1"],
                          {"bogus": 1}, tmp_path=tmp_path)

    def test_subcommand_mismatch_rejected(self, tmp_path):
        with pytest.raises(ConfigurationError, match="subcommand"):
            self._resolve(["spectrum", "--family", "nt", "--s", "1"],
                          {"subcommand": "eigendecay"}, tmp_path=tmp_path)

    def test_missing_required_raises(self):
        with pytest.raises(ConfigurationError, match="--family"):
            self._resolve(["spectrum", "--s", "1"])

    def test_full_scale_bumps_experiment_size(self):
        cfg = self._resolve(["error-rate", "--family", "nt", "--s", "1",
                             "--d", "3", "--full-scale"])
        assert cfg["reps"] == 20 and cfg["max_exp"] == 13

    def test_full_scale_respects_explicit_values(self):
        """An explicit flag survives --full-scale."""
        cfg = self._resolve(["error-rate", "--family", "nt", "--s", "1",
                             "--d", "3", "--full-scale", "--reps", "3"])
        assert cfg["reps"] == 3 and cfg["max_exp"] == 13

    def test_output_paths_never_echoed(self, tmp_path):
        cfg = self._resolve(["spectrum", "--family", "nt", "--s", "1"],
                            {"out": "x.json"}, tmp_path=tmp_path)
        assert "out" not in cfg and "emit_plot_data" not in cfg

    def test_every_subcommand_parses(self):
        parser = build_parser()
        for command in ("kernel-eval", "spectrum", "eigendecay", "matern-compare",
                        "infogain", "sample-greedy", "error-rate", "mig-growth"):
            args = parser.parse_args([command, "--seed", "7"])
            assert args.command == command and args.seed == 7

    def test_unknown_subcommand_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args(["not-a-command"])
        assert exc.value.code == 2


class TestDeterminism:
    def test_error_rate_csv_bytes_identical(self):
        """Same seed, same bytes."""
        first = run_cli(*SMALL_ERROR_RATE, "--seed", "42", "--format", "csv")
        second = run_cli(*SMALL_ERROR_RATE, "--seed", "42", "--format", "csv")
        assert first.stdout == second.stdout
        assert first.stdout.startswith("n,rep,sup_error\r\n")

    def test_json_identical_modulo_timestamp(self):
        first = json.loads(run_cli(*SMALL_ERROR_RATE, "--seed", "42").stdout)
        second = json.loads(run_cli(*SMALL_ERROR_RATE, "--seed", "42").stdout)
        for doc in (first, second):
            assert doc["meta"].pop("timestamp")
        assert first == second

    def test_worker_count_does_not_change_payload(self):
        one = run_cli(*SMALL_ERROR_RATE, "--seed", "3", "--workers", "1",
                      "--format", "csv")
        two = run_cli(*SMALL_ERROR_RATE, "--seed", "3", "--workers", "2",
                      "--format", "csv")
        assert one.stdout == two.stdout

    def test_seed_changes_payload(self):
        a = run_cli(*SMALL_ERROR_RATE, "--seed", "1", "--format", "csv")
        b = run_cli(*SMALL_ERROR_RATE, "--seed", "2", "--format", "csv")
        assert a.stdout != b.stdout

    def test_sample_greedy_deterministic(self):
        args = ("sample-greedy", "--family", "rf", "--s", "1", "--n", "6",
                "--grid-size", "128", "--seed", "11", "--format", "csv")
        assert run_cli(*args).stdout == run_cli(*args).stdout


class TestRoundTrip:
    def test_embedded_config_reproduces_payload(self, tmp_path):
        """Feeding the echoed config back yields the identical payload."""
        doc = json.loads(run_cli(*SMALL_ERROR_RATE, "--seed", "9").stdout)
        cfg_path = tmp_path / "echo.json"
        cfg_path.write_text(json.dumps(doc["config"]))
        redone = json.loads(run_cli("error-rate", "--config", cfg_path).stdout)
        assert redone["payload"] == doc["payload"]
        assert redone["config"] == doc["config"]

    def test_round_trip_mig_growth(self, tmp_path):
        base = run_cli("mig-growth", "--family", "nt", "--s", "1",
                       "--grid-size", "128", "--max-exp", "6", "--seed", "5")
        doc = json.loads(base.stdout)
        cfg_path = tmp_path / "echo.json"
        cfg_path.write_text(json.dumps(doc["config"]))
        redone = json.loads(run_cli("mig-growth", "--config", cfg_path).stdout)
        assert redone["payload"] == doc["payload"]


class TestReports:
    def test_json_report_embeds_version_and_config(self):
        doc = json.loads(run_cli("infogain", "--family", "nt", "--s", "1",
                                 "--n", "8").stdout)
        assert doc["meta"]["version"]
        assert doc["config"]["subcommand"] == "infogain"
        assert doc["config"]["n"] == 8

    def test_out_writes_file_and_keeps_stdout_quiet(self, tmp_path):
        out = tmp_path / "report.json"
        res = run_cli("kernel-eval", "--family", "rf", "--s", "1", "--u", "0.5",
                      "--out", out)
        assert res.returncode == 0 and res.stdout == ""
        assert json.loads(out.read_text())["payload"]["u"] == [0.5]

    def test_emit_plot_data_writes_csv_sidecar(self, tmp_path):
        """--emit-plot-data produces the CSV payload even in JSON mode."""
        side = tmp_path / "plot.csv"
        res = run_cli("mig-growth", "--family", "nt", "--s", "1",
                      "--grid-size", "64", "--max-exp", "5",
                      "--emit-plot-data", side)
        assert res.returncode == 0
        assert side.read_bytes().startswith(b"n,info_gain\r\n")
        json.loads(res.stdout)

    def test_spectrum_csv_layout(self):
        res = run_cli("spectrum", "--family", "rf", "--s", "2",
                      "--max-degree", "6", "--format", "csv")
        lines = [ln for ln in res.stdout.split("\r\n") if ln]
        assert lines[0] == "degree,eigenvalue,multiplicity"
        assert len(lines) == 8

    def test_eigendecay_example_slope(self):
        """The two-layer NT decay fit lands on the cubic law."""
        res = run_cli("eigendecay", "--family", "nt", "--s", "1", "--d", "3",
                      "--max-degree", "60")
        slope = json.loads(res.stdout)["payload"]["slope"]
        assert -3.3 <= slope <= -2.7

    def test_matern_compare_reports_bounded_spread(self):
        res = run_cli("matern-compare", "--s", "1", "--d", "3", "--nu", "0.5",
                      "--degree-min", "6", "--degree-max", "58",
                      "--parity", "even")
        payload = json.loads(res.stdout)["payload"]
        assert 0 < payload["min_ratio"] <= payload["max_ratio"]
        assert payload["ratio_spread"] < 20
