import json
import math
import shutil
import subprocess
import sys

import numpy as np
import pytest

from kotztail import io
from kotztail.cli import EXIT_ERROR, EXIT_FAILED, EXIT_OK, EXIT_USAGE, OUTPUT_DIR_ENV, run


@pytest.fixture
def sigma_file(tmp_path):
    def make(rho, name="sigma.csv"):
        p = tmp_path / name
        np.savetxt(p, np.array([[1.0, rho], [rho, 1.0]]), delimiter=",")
        return str(p)

    return make


def _run_json(argv, capsys):
    code = run(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_qp_report(sigma_file, capsys):
    code, rep = _run_json(["qp", "--sigma", sigma_file(0.5), "--a", "1,1"], capsys)
    assert code == EXIT_OK
    assert rep["command"] == "qp"
    assert rep["result"]["I"] == [1, 2]
    assert rep["result"]["value"] == pytest.approx(4 / 3, rel=1e-14)
    assert rep["config"]["a"] == "1,1"
    assert "version" in rep and rep["backend"] in ("cython", "python")


def test_tail_matches_mills_ratio_value(sigma_file, capsys):
    code, rep = _run_json(["tail", "--gaussian", "--sigma", sigma_file(0.0), "--a", "1,1", "--t", "3"],
                          capsys)
    assert code == EXIT_OK
    v = rep["result"]["value"]
    assert v == pytest.approx(math.exp(-9) / (2 * math.pi * 9), rel=1e-12)
    assert f"{v:.4e}" == "2.1824e-06"


def test_json_header_sigma_and_file_vector(tmp_path, capsys):
    s = tmp_path / "s.csv"
    s.write_text("c1,c2\n1,0.5\n0.5,1\n")
    a = tmp_path / "a.csv"
    a.write_text("h\n1\n1\n")
    code, rep = _run_json(["qp", "--sigma", str(s), "--header", "--a", str(a)], capsys)
    assert code == EXIT_OK and rep["result"]["I"] == [1, 2]
    sj = tmp_path / "s.json"
    sj.write_text("[[1, 0.5], [0.5, 1]]")
    code, rep = _run_json(["qp", "--sigma", str(sj), "--a", "1,-3"], capsys)
    assert code == EXIT_OK and rep["result"]["I"] == [1]


def test_other_commands_run(sigma_file, capsys):
    sig = sigma_file(0.5)
    code, rep = _run_json(["marginal-tail", "--gaussian", "--k", "2", "--t", "4"], capsys)
    assert code == EXIT_OK and rep["result"]["value"] > 0
    code, rep = _run_json(["excess", "--sigma", sig, "--a", "1,1", "--x", "0.5,0.5"], capsys)
    assert code == EXIT_OK and 0 < rep["result"]["survivor"] < 1
    code, rep = _run_json(["profile", "--sigma", sig, "--gaussian", "--a", "1,-2", "--I", "1",
                           "--t", "5"], capsys)
    assert code == EXIT_OK and rep["result"]["J"] == [2]
    code, rep = _run_json(["hr", "--gamma", "1", "--log-n", "8", "--x", "0", "--y", "0"], capsys)
    assert code == EXIT_OK
    assert rep["result"]["sigma"] == pytest.approx(0.875)
    assert 0 < rep["result"]["cdf"] < 1


def test_unknown_subcommand_is_usage_error(capsys):
    assert run(["bogus"]) == EXIT_USAGE
    assert run([]) == EXIT_USAGE
    assert run(["qp", "--a", "1,1"]) == EXIT_USAGE  # missing --sigma
    assert "usage" in capsys.readouterr().err


def test_semantic_usage_errors(sigma_file, capsys):
    sig = sigma_file(0.5)
    assert run(["qp", "--sigma", sig, "--a", "1,1,1"]) == EXIT_USAGE
    assert run(["tail", "--sigma", sig, "--a", "1,1", "--t", "2"]) == EXIT_USAGE
    assert run(["hr", "--gamma", "1"]) == EXIT_USAGE
    assert run(["validate", "--scenario", "nope"]) == EXIT_USAGE


def test_errors_exit_one(sigma_file, tmp_path, capsys):
    assert run(["qp", "--sigma", sigma_file(0.5), "--a=-1,-1"]) == EXIT_ERROR
    assert run(["qp", "--sigma", sigma_file(1.5, "bad.csv"), "--a", "1,1"]) == EXIT_ERROR
    assert run(["qp", "--sigma", str(tmp_path / "missing.csv"), "--a", "1,1"]) == EXIT_ERROR
    err = capsys.readouterr().err
    assert "NoPositiveComponent" in err


def test_failed_validation_exits_two(capsys):
    # the tail scenario with a tiny sample cannot meet its 25 % tolerance
    code, rep = _run_json(["validate", "--scenario", "tail", "--n", "10000"], capsys)
    assert code == EXIT_FAILED
    assert rep["result"]["passed"] is False


def test_sample_estimate_round_trip(sigma_file, tmp_path, capsys):
    out = tmp_path / "x.csv"
    code = run(["sample", "--sigma", sigma_file(0.5), "--q", "0.5", "--delta", "2", "--N", "0",
                "--n", "20000", "--seed", "42", "-o", str(out)])
    assert code == EXIT_OK
    capsys.readouterr()
    side = json.loads((tmp_path / "x.csv.json").read_text())
    assert side["seed"] == 42 and side["n"] == 20000
    code, rep = _run_json(["estimate", "--sample", str(out)], capsys)
    assert code == EXIT_OK
    assert rep["result"]["source"]["seed"] == 42
    assert rep["result"]["n"] == 20000
    assert rep["result"]["fit"]["delta_hat"] > 0
    assert rep["result"]["sigma_hat"][0][1] == pytest.approx(0.5, abs=0.05)
    # same seed, same file
    out2 = tmp_path / "y.csv"
    run(["sample", "--sigma", sigma_file(0.5), "--q", "0.5", "--delta", "2", "--N", "0",
         "--n", "20000", "--seed", "42", "-o", str(out2)])
    assert out.read_bytes() == out2.read_bytes()


def test_output_dir_env(sigma_file, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    sig = sigma_file(0.5)
    assert run(["qp", "--sigma", sig, "--a", "1,1"]) == EXIT_OK
    assert json.loads((tmp_path / "qp.json").read_text())["result"]["I"] == [1, 2]
    assert run(["qp", "--sigma", sig, "--a", "1,1", "-o", "named.json"]) == EXIT_OK
    assert (tmp_path / "named.json").exists()
    assert capsys.readouterr().out == ""


def test_json_keeps_full_precision():
    x = 1 / 3
    text = io.dumps({"v": x, "arr": np.array([math.pi]), "n": np.int64(3)})
    back = json.loads(text)
    assert back["v"] == x and back["arr"][0] == math.pi and back["n"] == 3
    assert "0.3333333333333333" in text


def test_json_non_finite_values():
    back = json.loads(io.dumps({"a": math.inf, "b": -np.inf, "c": float("nan"), "d": np.bool_(True)}))
    assert back == {"a": "inf", "b": "-inf", "c": "nan", "d": True}


def test_csv_round_trip(tmp_path):
    m = np.random.default_rng(0).standard_normal((5, 3)) * 1e-7
    p = tmp_path / "m.csv"
    io.write_matrix_csv(p, m)
    np.testing.assert_array_equal(io.read_matrix(p), m)


def test_parse_vector():
    np.testing.assert_array_equal(io.parse_vector("1, 2.5,-3"), [1.0, 2.5, -3.0])
    with pytest.raises(ValueError):
        io.parse_vector("1,a")


@pytest.mark.skipif(shutil.which("kotztail") is None, reason="console script not installed")
def test_console_script(sigma_file):
    proc = subprocess.run(["kotztail", "qp", "--sigma", sigma_file(0.5), "--a", "1,1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["I"] == [1, 2]
    proc = subprocess.run([sys.executable, "-m", "kotztail.cli", "bogus"], capture_output=True)
    assert proc.returncode == EXIT_USAGE
