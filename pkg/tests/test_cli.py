import json
import subprocess
import sys

import numpy as np
import pytest

from certqp import io
from certqp.certificate import iteration_count
from certqp.cli import main
from certqp.condense import condense, double_integrator


def _write(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def _one_d(**overrides):
    data = {"m": 1, "n": 1, "n_x": 1, "Q": [[1.0]], "F": [[1.0]], "G": [[1.0]],
            "g": [0.5], "S": [[0.0]], "x": [1.0], "rho": [10.0],
            "hard_row_count": 0, "epsilon": 1e-6}
    data.update(overrides)
    return data


def _kv(text):
    return dict(line.split(" = ", 1) for line in text.strip().splitlines())


class TestCertify:
    def test_n30(self, capsys):
        assert main(["certify", "--n", "30", "--epsilon", "1e-6"]) == 0
        assert _kv(capsys.readouterr().out)["iterations"] == "173"

    def test_n1(self, capsys):
        assert main(["certify", "--n", "1", "--epsilon", "1e-6"]) == 0
        assert _kv(capsys.readouterr().out)["iterations"] == "30"

    def test_full_certificate(self, capsys, tmp_path):
        out = tmp_path / "cert.json"
        argv = ["certify", "--n", "30", "--epsilon", "1e-6", "--m", "10", "--lti",
                "--flops-per-sec", "1e9", "--json", str(out)]
        assert main(argv) == 0
        kv = _kv(capsys.readouterr().out)
        assert float(kv["est_seconds"]) == pytest.approx(0.00203, rel=1e-3)
        data = json.loads(out.read_text())
        assert data["online_flops"] == 2028921
        assert data["lti_cached"] is True

    @pytest.mark.parametrize("argv", [
        ["certify", "--n", "0"],
        ["certify", "--n", "30", "--epsilon", "-1"],
        ["certify", "--n", "30", "--epsilon", "60"],
        ["certify"],
        ["bogus"],
    ])
    def test_usage_errors(self, argv, capsys):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 2
        assert capsys.readouterr().err


class TestSolve:
    def test_one_d(self, tmp_path, capsys):
        inp = _write(tmp_path / "p.json", _one_d())
        out = tmp_path / "s.json"
        assert main(["solve", "--input", inp, "--output", str(out)]) == 0
        sol = io.load_solution(out)
        np.testing.assert_allclose(sol["y"], [-1.0], atol=1e-4)
        assert sol["iterations"] == 30
        assert set(sol) == {"y", "z", "multipliers", "violations", "duality_gap",
                            "iterations", "online_flops"}

    def test_indefinite(self, tmp_path, capsys):
        data = _one_d(m=2, Q=[[1.0, 2.0], [2.0, 1.0]], F=[[0.0], [0.0]], G=[[1.0, 0.0]])
        inp = _write(tmp_path / "p.json", data)
        assert main(["solve", "--input", inp, "--output", str(tmp_path / "s.json")]) == 4
        assert "NotPositiveDefinite" in capsys.readouterr().err

    def test_zero_linear_term(self, tmp_path):
        data = _one_d(G=[[0.0]], g=[0.0], F=[[0.0]])
        inp = _write(tmp_path / "p.json", data)
        out = tmp_path / "s.json"
        assert main(["solve", "--input", inp, "--output", str(out)]) == 0
        sol = io.load_solution(out)
        np.testing.assert_array_equal(sol["z"], [0.0])
        assert sol["iterations"] == 0

    @pytest.mark.parametrize("overrides,field", [
        ({"Q": [[1.0, 0.0]]}, "Q"),
        ({"rho": [-1.0]}, "rho"),
        ({"g": ["a"]}, "g"),
        ({"epsilon": 0}, "epsilon"),
        ({"hard_row_count": 5}, "hard_row_count"),
    ])
    def test_invalid_field(self, tmp_path, capsys, overrides, field):
        inp = _write(tmp_path / "p.json", _one_d(**overrides))
        assert main(["solve", "--input", inp, "--output", str(tmp_path / "s.json")]) == 3
        assert repr(field) in capsys.readouterr().err

    def test_missing_field(self, tmp_path, capsys):
        data = _one_d()
        del data["S"]
        inp = _write(tmp_path / "p.json", data)
        assert main(["solve", "--input", inp, "--output", str(tmp_path / "s.json")]) == 3
        assert "'S'" in capsys.readouterr().err

    def test_not_json(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text("{not json")
        assert main(["solve", "--input", str(path), "--output", str(tmp_path / "s.json")]) == 3

    def test_missing_file(self, tmp_path):
        assert main(["solve", "--input", str(tmp_path / "nope.json"),
                     "--output", str(tmp_path / "s.json")]) == 3


class TestSimulate:
    def _summary(self, text):
        line = text.strip().splitlines()[-1]
        parts = dict(p.split(" = ") for p in line.split(", ", 2))
        return parts

    def test_setting_two(self, tmp_path, capsys):
        out = tmp_path / "t.csv"
        argv = ["simulate", "--preset", "double-integrator", "--rho-hard", "100",
                "--rho-soft", "10", "--x0", "0,-2", "--out", str(out)]
        assert main(argv) == 0
        s = self._summary(capsys.readouterr().out)
        assert float(s["max|u|"]) <= 1 + 1e-6
        assert s["iterations per solve"] == "173"
        assert len(out.read_text().splitlines()) == 61

    def test_setting_one(self, capsys):
        argv = ["simulate", "--preset", "double-integrator", "--rho-hard", "10",
                "--rho-soft", "10", "--x0", "0,-2", "--steps", "5"]
        assert main(argv) == 0
        assert float(self._summary(capsys.readouterr().out)["max|u|"]) > 1

    def test_equilibrium(self, capsys):
        argv = ["simulate", "--preset", "double-integrator", "--x0", "0,0", "--steps", "5"]
        assert main(argv) == 0
        s = self._summary(capsys.readouterr().out)
        assert float(s["max soft violation"]) <= 1e-6

    def test_config_file(self, tmp_path, capsys):
        cfg = {"A": [[1, 1], [0, 1]], "B": [[0], [1]], "horizon": 5, "Qx": [[1, 0], [0, 1]],
               "R": [[0.1]], "u_min": [-1], "u_max": [1], "C": [[-1, 0]], "d": [1]}
        path = _write(tmp_path / "cfg.json", cfg)
        assert main(["simulate", "--config", path, "--steps", "3"]) == 0
        n = 2 * 5 + 5
        assert self._summary(capsys.readouterr().out)["iterations per solve"] == \
            str(iteration_count(n, 1e-6))

    @pytest.mark.parametrize("argv", [
        ["simulate", "--steps", "0"],
        ["simulate", "--x0", "a,b"],
        ["simulate", "--x0", "1,2,3"],
        ["simulate", "--preset", "pendulum"],
        ["simulate", "--rho-hard", "-1"],
        ["simulate", "--config", "/nonexistent/cfg.json"],
    ])
    def test_bad_flags(self, argv, capsys):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 2


class TestFiles:
    def test_problem_round_trip_bit_exact(self, tmp_path):
        model, config = double_integrator()
        cqp = condense(model, config, [0.1234567890123, -2.0 / 3.0])
        path = tmp_path / "di.json"
        io.save_problem(path, cqp.qp, cqp.penalty)
        qp, penalty, eps = io.load_problem(path)
        for name in ("Q", "F", "G", "g", "S", "x"):
            assert getattr(qp, name).tobytes() == getattr(cqp.qp, name).tobytes()
        assert penalty.rho.tobytes() == cqp.penalty.rho.tobytes()
        np.testing.assert_array_equal(penalty.hard, cqp.penalty.hard)
        assert eps == 1e-6

    def test_solve_is_deterministic(self, tmp_path):
        model, config = double_integrator()
        cqp = condense(model, config, [0.0, -2.0])
        inp = tmp_path / "di.json"
        io.save_problem(inp, cqp.qp, cqp.penalty)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["solve", "--input", str(inp), "--output", str(a)]) == 0
        assert main(["solve", "--input", str(inp), "--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_simulate_is_deterministic(self, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for p in paths:
            assert main(["simulate", "--steps", "4", "--out", str(p)]) == 0

        def strip(p):
            return [line.rsplit(",", 1)[0] for line in p.read_text().splitlines()]

        assert strip(paths[0]) == strip(paths[1])


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "certqp", "certify", "--n", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "iterations = 42" in proc.stdout


def test_help_lists_flags():
    proc = subprocess.run([sys.executable, "-m", "certqp", "simulate", "--help"],
                          capture_output=True, text=True, check=False)
    for flag in ("--preset", "--config", "--rho-hard", "--rho-soft", "--steps", "--x0",
                 "--horizon", "--out"):
        assert flag in proc.stdout
