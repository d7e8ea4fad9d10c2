"""End-to-end command line runs against temporary directories."""

import csv
import json
import math

import pytest

from trigzeros import expected_zeros
from trigzeros.cli import (EXIT_HYPOTHESIS, EXIT_NUMERICAL, EXIT_OK,
                           EXIT_USAGE, RunManifest, main)
from trigzeros.correlation import CorrelationModel


def read_csv(path):
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    return rows[0], rows[1:]


def read_manifest(path):
    with open(str(path) + ".manifest.json") as handle:
        return json.load(handle)


class TestValidate:
    def test_passing_model(self, tmp_path):
        out = tmp_path / "report.json"
        code = main(["validate", "--model", "fgn", "--params", '{"H": 0.75}',
                     "--out", str(out)])
        assert code == EXIT_OK
        report = json.loads(out.read_text())
        assert report["passes"] is True
        assert report["l1_norm"] == pytest.approx(1.0, abs=1e-8)
        assert report["infimum"] == pytest.approx(0.47472348, abs=1e-7)
        assert report["config"] == {"kind": "fgn", "params": {"H": 0.75}}

    def test_failing_model_exits_two(self, tmp_path):
        out = tmp_path / "report.json"
        code = main(["validate", "--model", "tabulated",
                     "--params", '{"0": 1.0, "1": -0.6}', "--out", str(out)])
        assert code == EXIT_HYPOTHESIS
        assert json.loads(out.read_text())["passes"] is False


class TestSpectral:
    def test_default_models_and_grid(self, tmp_path):
        out = tmp_path / "spec.csv"
        assert main(["spectral", "--out", str(out), "--points", "64"]) == EXIT_OK
        header, rows = read_csv(out)
        assert header[0] == "x"
        assert header[1:] == ["fgn(H=0.6)", "fgn(H=0.75)", "fgn(H=0.9)"]
        assert len(rows) == 64
        assert float(rows[0][0]) == pytest.approx(1e-3, rel=1e-12)
        assert float(rows[-1][0]) == pytest.approx(2 * math.pi - 1e-3, rel=1e-12)
        # steeper blowup at small x for larger Hurst index
        assert float(rows[0][3]) > float(rows[0][1])

    def test_iid_column_is_flat(self, tmp_path):
        out = tmp_path / "spec.csv"
        main(["spectral", "--model", "iid", "--out", str(out), "--points", "16"])
        _, rows = read_csv(out)
        assert all(float(row[1]) == 1.0 for row in rows)


class TestKernels:
    def test_columns_and_peaks(self, tmp_path):
        out = tmp_path / "kern.csv"
        code = main(["kernels", "--n", "1", "--n", "4", "--out", str(out),
                     "--points", "32"])
        assert code == EXIT_OK
        header, rows = read_csv(out)
        assert header == ["x", "second_moment_n1", "second_moment_n4"]
        assert all(float(row[1]) == pytest.approx(1.0, rel=1e-10)
                   for row in rows)

    def test_fejer_columns_optional(self, tmp_path):
        out = tmp_path / "kern.csv"
        main(["kernels", "--n", "3", "--with-fejer", "--out", str(out),
              "--points", "8"])
        header, _ = read_csv(out)
        assert header == ["x", "second_moment_n3", "fejer_n3", "fejer_deriv_n3"]


class TestCovariance:
    def test_iid_table(self, tmp_path):
        out = tmp_path / "cov.csv"
        code = main(["covariance", "--model", "iid", "--n", "16",
                     "--out", str(out), "--points", "10"])
        assert code == EXIT_OK
        header, rows = read_csv(out)
        assert header == ["t", "var_f", "var_fprime", "cov_cross"]
        for row in rows:
            assert float(row[1]) == 1.0
            assert float(row[2]) == 17.0 * 33.0 / 6.0


class TestKacrice:
    def test_value_round_trips_at_full_precision(self, tmp_path):
        out = tmp_path / "kr.csv"
        code = main(["kacrice", "--model", "geometric", "--params",
                     '{"r": 0.5}', "--n", "16", "--out", str(out)])
        assert code == EXIT_OK
        _, rows = read_csv(out)
        model = CorrelationModel.geometric(0.5)
        exact = expected_zeros(model, 16, (0.0, 2.0 * math.pi)).value
        # 17 significant digits reproduce the double exactly
        assert float(rows[0][2]) == exact

    def test_degenerate_model_exits_three(self, tmp_path):
        code = main(["kacrice", "--model", "tabulated",
                     "--params", '{"0": 1.0, "1": -0.99}', "--n", "4",
                     "--out", str(tmp_path / "kr.csv")])
        assert code == EXIT_NUMERICAL

    def test_interval_flag(self, tmp_path):
        out = tmp_path / "kr.csv"
        main(["kacrice", "--model", "iid", "--n", "8", "--interval", "0:1.5",
              "--out", str(out)])
        _, rows = read_csv(out)
        assert rows[0][1] == "0:1.5"
        expect = 2.0 * math.sqrt(9.0 * 17.0 / 6.0) * 1.5 / (2.0 * math.pi)
        assert float(rows[0][2]) == pytest.approx(expect, rel=1e-10)


class TestTheorem1:
    def test_deviation_column(self, tmp_path):
        out = tmp_path / "limit.csv"
        code = main(["theorem1", "--model", "iid", "--n", "10", "--n", "100",
                     "--out", str(out)])
        assert code == EXIT_OK
        header, rows = read_csv(out)
        assert header == ["n", "value", "error_estimate", "ratio", "deviation"]
        assert float(rows[1][4]) < float(rows[0][4])

    def test_monte_carlo_column(self, tmp_path):
        out = tmp_path / "limit.csv"
        main(["theorem1", "--model", "iid", "--n", "8", "--montecarlo",
              "--trials", "64", "--seed", "4", "--out", str(out)])
        header, rows = read_csv(out)
        assert header[-2:] == ["mc_mean", "mc_std_error"]
        mean = float(rows[0][5])
        assert abs(mean - float(rows[0][1])) < 5.0 * float(rows[0][6])


class TestMonteCarlo:
    def test_compare_row(self, tmp_path):
        out = tmp_path / "mc.csv"
        code = main(["montecarlo", "--model", "geometric", "--params",
                     '{"r": 0.5}', "--n", "12", "--trials", "80",
                     "--seed", "7", "--compare", "--out", str(out)])
        assert code == EXIT_OK
        header, rows = read_csv(out)
        assert header == ["model", "n", "trials", "mean", "std_error",
                          "kacrice_value", "kacrice_error_estimate",
                          "sigma_distance"]
        assert rows[0][0] == "geometric(r=0.5)"
        assert float(rows[0][7]) < 4.0

    def test_json_format(self, tmp_path):
        out = tmp_path / "mc.json"
        main(["montecarlo", "--model", "iid", "--n", "4", "--trials", "32",
              "--format", "json", "--out", str(out)])
        payload = json.loads(out.read_text())
        assert payload[0]["n"] == 4
        assert payload[0]["trials"] == 32

    def test_oversampling_flag_accepted(self, tmp_path):
        code = main(["montecarlo", "--model", "iid", "--n", "4",
                     "--trials", "16", "--oversampling", "8",
                     "--out", str(tmp_path / "mc.csv")])
        assert code == EXIT_OK


class TestPlumbing:
    def test_manifest_round_trip(self, tmp_path):
        out = tmp_path / "mc.csv"
        main(["montecarlo", "--model", "iid", "--n", "4", "--trials", "16",
              "--seed", "5", "--out", str(out)])
        record = read_manifest(out)
        manifest = RunManifest.from_dict(record)
        assert manifest.to_dict() == record
        assert manifest.command == "montecarlo"
        assert manifest.seed == 5
        assert manifest.outputs == (str(out),)

    def test_identical_runs_are_byte_identical(self, tmp_path):
        args = ["montecarlo", "--model", "geometric", "--params",
                '{"r": 0.5}', "--n", "8", "--trials", "40", "--seed", "2"]
        first = tmp_path / "one.csv"
        second = tmp_path / "two.csv"
        main(args + ["--out", str(first)])
        main(args + ["--out", str(second)])
        assert first.read_bytes() == second.read_bytes()

    def test_stdout_output(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code = main(["covariance", "--model", "iid", "--n", "2",
                     "--points", "3", "--out", "-"])
        assert code == EXIT_OK
        captured = capsys.readouterr().out
        assert captured.splitlines()[0] == "t,var_f,var_fprime,cov_cross"
        assert list(tmp_path.iterdir()) == []   # nothing written to disk

    def test_config_file_supplies_defaults(self, tmp_path):
        conf = tmp_path / "conf.json"
        conf.write_text(json.dumps({"seed": 9, "trials": 24}))
        out = tmp_path / "mc.csv"
        main(["montecarlo", "--model", "iid", "--n", "4",
              "--config", str(conf), "--out", str(out)])
        assert read_manifest(out)["seed"] == 9
        _, rows = read_csv(out)
        assert rows[0][2] == "24"

    def test_command_line_beats_config(self, tmp_path):
        conf = tmp_path / "conf.json"
        conf.write_text(json.dumps({"seed": 9}))
        out = tmp_path / "mc.csv"
        main(["montecarlo", "--model", "iid", "--n", "4", "--trials", "16",
              "--seed", "3", "--config", str(conf), "--out", str(out)])
        assert read_manifest(out)["seed"] == 3

    def test_plot_writes_figure(self, tmp_path):
        out = tmp_path / "kern.csv"
        code = main(["kernels", "--n", "5", "--points", "64", "--plot",
                     "--out", str(out)])
        assert code == EXIT_OK
        figure = tmp_path / "kern.png"
        assert figure.exists() and figure.stat().st_size > 0
        assert str(figure) in read_manifest(out)["outputs"]


class TestFailureModes:
    def test_no_command_prints_help(self, capsys):
        assert main([]) == EXIT_USAGE

    def test_unknown_command(self):
        assert main(["frobnicate"]) == EXIT_USAGE

    def test_bad_params_json(self, tmp_path):
        code = main(["validate", "--model", "geometric", "--params",
                     "not json", "--out", str(tmp_path / "r.json")])
        assert code == EXIT_USAGE

    def test_out_of_range_parameter(self, tmp_path):
        code = main(["validate", "--model", "geometric", "--params",
                     '{"r": 1.5}', "--out", str(tmp_path / "r.json")])
        assert code == EXIT_USAGE

    def test_bad_interval(self, tmp_path):
        code = main(["kacrice", "--model", "iid", "--n", "4",
                     "--interval", "backwards", "--out", str(tmp_path / "x")])
        assert code == EXIT_USAGE

    def test_missing_config_file(self, tmp_path):
        code = main(["spectral", "--config", str(tmp_path / "absent.json"),
                     "--out", str(tmp_path / "s.csv")])
        assert code == EXIT_USAGE
