import json
import os
import subprocess
import sys

import numpy as np
import pytest

from serialdep.cli import main
from serialdep.distance import dcor, dcov_v
from serialdep.portmanteau import compute_statistic
from serialdep.simulation import generate


@pytest.fixture
def uni(tmp_path):
    path = tmp_path / "uni.csv"
    x = generate("nma2", 150, [4, 4])
    np.savetxt(path, x, delimiter=",", header="x", comments="")
    return path, x


@pytest.fixture
def multi(tmp_path):
    path = tmp_path / "multi.csv"
    rng = np.random.default_rng(12)
    x = rng.standard_normal((120, 3))
    x[:, 1] += x[:, 0] ** 2
    np.savetxt(path, x, delimiter=",", header="a,b,c", comments="")
    return path, x


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestDcov:
    def test_value(self, multi, capsys):
        path, x = multi
        code, out, _ = run(["dcov", path, "--split", 1], capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["schema_version"] == 1
        assert payload["value"] == pytest.approx(dcov_v(x[:, :1], x[:, 1:]))

    def test_dcor_with_permutation(self, multi, capsys):
        path, x = multi
        code, out, _ = run(["dcor", path, "--split", 2, "--boot", 49, "--seed", 3], capsys)
        payload = json.loads(out)
        assert code == 0
        assert payload["value"] == pytest.approx(dcor(x[:, :2], x[:, 2:]))
        assert payload["test"]["B"] == 49 and 0 < payload["test"]["p_value"] <= 1

    def test_csv(self, multi, capsys):
        code, out, _ = run(["dcov", multi[0], "--format", "csv", "--estimator", "u"], capsys)
        assert code == 0 and out.splitlines()[0].startswith("command")

    def test_bad_split(self, multi, capsys):
        assert run(["dcov", multi[0], "--split", 3], capsys)[0] == 2


class TestTest:
    def test_fp_json(self, uni, capsys):
        path, x = uni
        code, out, _ = run(["test", "--stat", "fp", "--lambda", 0.1, "--boot", 49, "--seed", 7, path], capsys)
        assert code == 0
        res = json.loads(out)["results"][0]
        assert res["name"] == "FP" and res["p"] == 5 and res["B"] == 49
        assert res["value"] == pytest.approx(compute_statistic("FP", x, 5).value)
        assert 0 < res["p_value"] <= 1

    def test_multiple_stats_and_bandwidths(self, uni, capsys):
        code, out, _ = run(["test", uni[0], "--stat", "bp,lb", "--stat", "H99", "--lambda", 0.1, "--lambda", 0.3,
                            "--boot", 19, "--format", "csv"], capsys)
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) == 1 + 6

    def test_unknown_stat(self, uni, capsys):
        assert run(["test", uni[0], "--stat", "nope"], capsys)[0] == 2

    def test_block_without_subsample(self, uni, capsys):
        assert run(["test", uni[0], "--stat", "fp", "--block", 5], capsys)[0] == 2

    def test_wrong_method(self, uni, capsys):
        assert run(["test", uni[0], "--stat", "fp", "--method", "wild"], capsys)[0] == 2

    def test_unknown_flag(self, uni, capsys):
        assert run(["test", uni[0], "--stat", "fp", "--frobnicate"], capsys)[0] == 2

    def test_missing_file(self, tmp_path, capsys):
        assert run(["test", tmp_path / "absent.csv", "--stat", "fp"], capsys)[0] == 1

    def test_univariate_stat_on_matrix(self, multi, capsys):
        assert run(["test", multi[0], "--stat", "fp", "--boot", 5], capsys)[0] == 1

    def test_bad_data(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("x\n1\nabc\n")
        assert run(["test", path, "--stat", "fp"], capsys)[0] == 1

    def test_constant_series(self, tmp_path, capsys):
        path = tmp_path / "c.csv"
        path.write_text("x\n" + "5\n" * 40)
        code, out, _ = run(["test", path, "--stat", "fp", "--boot", 9, "--log"], capsys)
        res = json.loads(out)["results"][0]
        assert code == 0 and res["value"] == 0.0 and res["p_value"] == 1.0


class TestAdcf:
    def test_json(self, uni, capsys):
        code, out, _ = run(["adcf", uni[0], "--lags", 4, "--boot", 19, "--seed", 1], capsys)
        payload = json.loads(out)
        assert code == 0 and len(payload["records"]) == 4
        assert payload["meta"]["labels"] == ["x"]

    def test_csv_block(self, uni, capsys):
        code, out, _ = run(["adcf", uni[0], "--lags", 3, "--boot", 5, "--method", "subsample", "--block", 20,
                            "--format", "csv"], capsys)
        assert code == 0
        assert out.splitlines()[0] == "lag,adcf,acf,acf_band,pairwise_band,simultaneous_band,block"


class TestVar:
    def test_auto_then_test(self, multi, capsys):
        code, out, _ = run(["var", multi[0], "--order", "auto", "--max-order", 4, "--then", "test", "--stat", "fpm",
                            "--stat", "mlb", "--boot", 19], capsys)
        payload = json.loads(out)
        assert code == 0
        assert 1 <= payload["order"] <= 4
        assert {r["name"] for r in payload["tests"]} == {"FPm", "mLB"}
        assert all(r["n"] == payload["n_residuals"] for r in payload["tests"])

    def test_fixed_order(self, multi, capsys):
        code, out, _ = run(["var", multi[0], "--order", 2], capsys)
        assert code == 0 and json.loads(out)["n_residuals"] == 118

    def test_bad_order(self, multi, capsys):
        assert run(["var", multi[0], "--order", "two"], capsys)[0] == 2

    def test_then_elsewhere(self, uni, capsys):
        assert run(["test", uni[0], "--stat", "fp", "--then", "test"], capsys)[0] == 2


class TestSimulate:
    def test_report(self, capsys):
        code, out, _ = run(["simulate", "--model", "nma2", "--n", 50, "--experiments", 3, "--boot", 9,
                            "--stats", "bp,fp", "--lambda", 0.1], capsys)
        payload = json.loads(out)
        assert code == 0
        assert [(r["statistic"], r["p"]) for r in payload["rows"]] == [("BP", 5), ("FP", 5)]

    def test_multivariate_stat_rejected(self, capsys):
        assert run(["simulate", "--model", "ar1", "--n", 50, "--stats", "fpm"], capsys)[0] == 2


class TestReproducibility:
    def test_byte_identical_files(self, uni, tmp_path, capsys):
        outs = []
        for k in range(2):
            target = tmp_path / f"o{k}.json"
            assert run(["adcf", uni[0], "--lags", 5, "--boot", 29, "--seed", 11, "--out", target], capsys)[0] == 0
            outs.append(target.read_bytes())
        assert outs[0] == outs[1]

    def test_thread_count_does_not_matter(self, uni, tmp_path):
        argv = ["serialdep", "test", str(uni[0]), "--stat", "fp,h99,st", "--boot", "39", "--seed", "5"]
        texts = []
        for threads in ("1", "4"):
            env = dict(os.environ, SERIALDEP_THREADS=threads)
            proc = subprocess.run([sys.executable, "-m", "serialdep.cli", *argv[1:]], env=env, capture_output=True,
                                  check=True)
            texts.append(proc.stdout)
        assert texts[0] == texts[1]
