import csv
import math

import numpy as np
import pytest
from click.testing import CliRunner

from levyarea import cli
from levyarea import logprodexp as lp


@pytest.fixture()
def runner():
    return CliRunner()


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


class TestTablesBuild:
    def test_default_p_set(self, runner, tmp_path):
        out = tmp_path / "tabs"
        res = runner.invoke(
            cli.main,
            ["tables", "build", "--grid", "101", "--out", str(out)],
        )
        assert res.exit_code == 0, res.output
        for p in (100, 1000, 10000, 100000):
            path = out / cli.table_filename(p)
            assert path.exists()
            table = lp.read_table(path)
            assert table.M == 101
            assert np.all(np.diff(table.values) >= 0.0)

    def test_idempotent(self, runner, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        for out in (a, b):
            res = runner.invoke(
                cli.main,
                ["tables", "build", "--P", "100", "--grid", "501", "--out", str(out)],
            )
            assert res.exit_code == 0, res.output
        fa = (a / cli.table_filename(100)).read_bytes()
        fb = (b / cli.table_filename(100)).read_bytes()
        assert fa == fb

    def test_bad_grid_rejected(self, runner, tmp_path):
        res = runner.invoke(
            cli.main,
            ["tables", "build", "--grid", "1", "--out", str(tmp_path)],
        )
        assert res.exit_code != 0

    def test_small_p_rejected(self, runner, tmp_path):
        res = runner.invoke(
            cli.main,
            ["tables", "build", "--P", "10", "--grid", "101", "--out", str(tmp_path)],
        )
        assert res.exit_code != 0


class TestSample:
    def test_deterministic_rerun(self, runner, tmp_path):
        args = [
            "sample",
            "--method",
            "logistic",
            "--N",
            "0",
            "--count",
            "3",
            "--seed",
            "7",
        ]
        f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert runner.invoke(cli.main, args + ["--out", str(f1)]).exit_code == 0
        assert runner.invoke(cli.main, args + ["--out", str(f2)]).exit_code == 0
        assert f1.read_bytes() == f2.read_bytes()

    def test_header_and_roundtrip_floats(self, runner, tmp_path):
        out = tmp_path / "s.csv"
        res = runner.invoke(
            cli.main,
            ["sample", "--method", "logistic", "--count", "5", "--out", str(out)],
        )
        assert res.exit_code == 0, res.output
        rows = read_csv(out)
        assert rows[0] == ["dW1", "dW2", "a_sq", "area", "uniforms"]
        assert len(rows) == 6
        for r in rows[1:]:
            dw1, dw2, a_sq = float(r[0]), float(r[1]), float(r[2])
            assert a_sq == (dw1 * dw1 + dw2 * dw2) / 1.0

    def test_fixed_zero_increments(self, runner, tmp_path):
        out = tmp_path / "s.csv"
        res = runner.invoke(
            cli.main,
            [
                "sample",
                "--method",
                "logistic",
                "--increments",
                "fixed:0,0",
                "--count",
                "4",
                "--out",
                str(out),
            ],
        )
        assert res.exit_code == 0, res.output
        rows = read_csv(out)
        assert all(r[2] == "0.0" for r in rows[1:])

    def test_bad_increments_rejected(self, runner, tmp_path):
        res = runner.invoke(
            cli.main,
            [
                "sample",
                "--method",
                "logistic",
                "--increments",
                "fixed:zero",
                "--out",
                str(tmp_path / "x.csv"),
            ],
        )
        assert res.exit_code != 0
        assert "increments" in res.output

    def test_exp_product_needs_tables(self, runner, tmp_path):
        res = runner.invoke(
            cli.main,
            [
                "sample",
                "--method",
                "exp_product",
                "--count",
                "10",
                "--out",
                str(tmp_path / "x.csv"),
            ],
        )
        assert res.exit_code != 0
        assert "tables" in res.output

    def test_exp_product_with_tables(self, runner, tmp_path):
        tabs = tmp_path / "tabs"
        res = runner.invoke(
            cli.main,
            ["tables", "build", "--grid", "5001", "--out", str(tabs)],
        )
        assert res.exit_code == 0, res.output
        out = tmp_path / "s.csv"
        res = runner.invoke(
            cli.main,
            [
                "sample",
                "--method",
                "exp_product",
                "--N",
                "8",
                "--count",
                "50",
                "--tables",
                str(tabs),
                "--out",
                str(out),
            ],
        )
        assert res.exit_code == 0, res.output
        assert len(read_csv(out)) == 51

    def test_unknown_flag_rejected(self, runner, tmp_path):
        res = runner.invoke(
            cli.main,
            [
                "sample",
                "--method",
                "logistic",
                "--frobnicate",
                "1",
                "--out",
                str(tmp_path / "x.csv"),
            ],
        )
        assert res.exit_code != 0


class TestBench:
    def test_small_run_schema(self, runner, tmp_path):
        out = tmp_path / "b.csv"
        res = runner.invoke(
            cli.main,
            [
                "bench",
                "--methods",
                "levy_fourier,logistic",
                "--N",
                "1-2",
                "--count",
                "10000",
                "--seed",
                "3",
                "--out",
                str(out),
            ],
        )
        assert res.exit_code == 0, res.output
        rows = read_csv(out)
        assert rows[0] == [
            "method",
            "N",
            "threshold",
            "tail",
            "h",
            "count",
            "seed",
            "sample_variance",
            "true_variance",
            "abs_error",
            "cpu_seconds",
            "uniform_draws_total",
            "shards",
        ]
        assert len(rows) == 1 + 4
        for r in rows[1:]:
            sample_var = float(r[7])
            true_var = float(r[8])
            abs_err = float(r[9])
            assert abs_err == abs(sample_var - true_var)
            assert true_var == 0.25

    def test_count_floor(self, runner, tmp_path):
        res = runner.invoke(
            cli.main,
            ["bench", "--count", "100", "--out", str(tmp_path / "b.csv")],
        )
        assert res.exit_code != 0

    def test_unknown_method(self, runner, tmp_path):
        res = runner.invoke(
            cli.main,
            [
                "bench",
                "--methods",
                "warp_drive",
                "--count",
                "10000",
                "--out",
                str(tmp_path / "b.csv"),
            ],
        )
        assert res.exit_code != 0

    def test_exp_product_requires_tables(self, runner, tmp_path):
        res = runner.invoke(
            cli.main,
            [
                "bench",
                "--methods",
                "exp_product",
                "--count",
                "10000",
                "--out",
                str(tmp_path / "b.csv"),
            ],
        )
        assert res.exit_code != 0


class TestDensity:
    def test_asymptotic_grid(self, runner, tmp_path):
        out = tmp_path / "d.csv"
        res = runner.invoke(
            cli.main,
            ["density", "--P", "100", "--points", "21", "--out", str(out)],
        )
        assert res.exit_code == 0, res.output
        rows = read_csv(out)
        assert rows[0] == ["x", "density"]
        ys = np.array([float(r[1]) for r in rows[1:]])
        assert ys.max() == pytest.approx(0.0311, abs=0.002)

    def test_series_engine_spot_value(self, runner, tmp_path):
        out = tmp_path / "d.csv"
        res = runner.invoke(
            cli.main,
            [
                "density",
                "--P",
                "1",
                "--engine",
                "series",
                "--x-min",
                "-2",
                "--x-max",
                "0",
                "--points",
                "3",
                "--out",
                str(out),
            ],
        )
        assert res.exit_code == 0, res.output
        rows = read_csv(out)
        assert float(rows[-1][1]) == pytest.approx(math.exp(-1.0), rel=1e-10)

    def test_series_engine_p_cap(self, runner, tmp_path):
        res = runner.invoke(
            cli.main,
            [
                "density",
                "--P",
                "50",
                "--engine",
                "series",
                "--out",
                str(tmp_path / "d.csv"),
            ],
        )
        assert res.exit_code != 0

    def test_large_x_engine(self, runner, tmp_path):
        out = tmp_path / "d.csv"
        res = runner.invoke(
            cli.main,
            [
                "density",
                "--P",
                "1",
                "--engine",
                "large-x",
                "--x-min",
                "-2",
                "--x-max",
                "2",
                "--points",
                "9",
                "--out",
                str(out),
            ],
        )
        assert res.exit_code == 0
        rows = read_csv(out)
        for r in rows[1:]:
            x, y = float(r[0]), float(r[1])
            assert y == pytest.approx(math.exp(x - math.exp(x)), rel=1e-12)
