import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from certqp.boxqp import BoxQp, SolverParams, solve
from certqp.certificate import (OFFLINE_STEPS, STEPS, flop_audit, flop_budget,
                                implementation_step_flops, iteration_count,
                                measure_flop_rate, per_iteration_flops,
                                theorem_step_flops, time_estimate)
from certqp.errors import InvalidTolerance
from certqp.linalg import FlopCounter
from certqp.penalty import QpInstance, solve_soft_qp
from oracles import random_feasible_qp, random_psd


def _n_high_precision(n, eps):
    """Iteration count evaluated with 50 significant digits."""
    with mpmath.workdps(50):
        root = mpmath.sqrt(2 * n)
        eps = mpmath.mpf(eps)
        denom = -2 * mpmath.log(root / (root + mpmath.sqrt(2) - 1))
        return int(mpmath.ceil(mpmath.log(2 * n / eps) / denom)) + 1


class TestIterationCount:
    @pytest.mark.parametrize("n,expected", [(30, 173), (1, 30), (2, 42)])
    def test_frozen_values(self, n, expected):
        assert iteration_count(n, 1e-6) == expected

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 10, 17, 30, 64, 100, 500])
    @pytest.mark.parametrize("eps", [1e-2, 1e-4, 1e-6, 1e-8, 1e-10])
    def test_matches_high_precision(self, n, eps):
        assert iteration_count(n, eps) == _n_high_precision(n, eps)

    @pytest.mark.parametrize("eps", [0.0, -1e-6, 60.0, 100.0, math.nan])
    def test_invalid_tolerance(self, eps):
        with pytest.raises(InvalidTolerance):
            iteration_count(30, eps)

    def test_invalid_dimension(self):
        with pytest.raises(ValueError):
            iteration_count(0, 1e-6)
        with pytest.raises(ValueError):
            iteration_count(2.5, 1e-6)

    @given(st.integers(1, 2000), st.floats(1e-12, 1e-1))
    def test_monotone(self, n, eps):
        N = iteration_count(n, eps)
        assert N >= 1
        assert iteration_count(n + 1, eps) >= N
        assert iteration_count(n, eps / 2) >= N

    def test_agrees_with_solver(self):
        rng = np.random.default_rng(0)
        for n in (1, 3, 8):
            for eps in (1e-3, 1e-7):
                box = BoxQp(random_psd(rng, n), rng.standard_normal(n))
                assert solve(box, SolverParams.for_dimension(n, eps)).iterations == \
                    iteration_count(n, eps)


class TestFlopBudget:
    def test_double_integrator_size(self):
        cert = flop_budget(10, 30, 1e-6, lti_cached=True)
        assert cert.iterations == 173
        assert cert.online_flops == 2028921
        assert abs(cert.online_flops - 2.03e6) <= 0.01 * 2.03e6
        assert cert.offline_flops == 21685
        assert cert.est_seconds == pytest.approx(0.00203, rel=1e-3)
        assert cert.est_seconds == cert.online_flops / cert.flops_per_sec

    def test_not_cached_puts_everything_online(self):
        cached = flop_budget(10, 30, 1e-6, True)
        full = flop_budget(10, 30, 1e-6, False)
        assert full.offline_flops == 0
        assert full.online_flops == cached.online_flops + cached.offline_flops

    def test_step6_trivial(self):
        assert flop_budget(1, 1, 1e-3).steps["step6"] == 8

    def test_per_iteration_n30(self):
        assert per_iteration_flops(30) == 11706

    def test_offline_polynomials(self):
        steps = theorem_step_flops(10, 30, 173)
        assert steps["step1"] == 385
        assert steps["step2_H"] == 30 * 100 + 300 + 2 * 10 * 900
        assert steps["step5"] == 173 * 11706

    def test_polynomials_are_integers(self):
        # m^3/3 + m^2/2 + m/6 is an integer for every m
        for m in range(1, 60):
            assert theorem_step_flops(m, 1, 1)["step1"] == pytest.approx(
                m**3 / 3 + m**2 / 2 + m / 6, abs=1e-6)

    def test_invalid(self):
        with pytest.raises(ValueError):
            flop_budget(0, 3, 1e-6)
        with pytest.raises(InvalidTolerance):
            flop_budget(1, 3, 0.0)

    def test_json_fields(self):
        data = json.loads(flop_budget(10, 30, 1e-6).to_json())
        for key in ("n", "m", "epsilon", "iterations", "online_flops", "offline_flops",
                    "flops_per_sec", "est_seconds"):
            assert key in data
        assert data["iterations"] == 173 and data["online_flops"] == 2028921

    def test_report(self):
        lines = flop_budget(10, 30, 1e-6).report().splitlines()
        kv = dict(line.split(" = ") for line in lines)
        assert kv["iterations"] == "173"
        assert kv["online_flops"] == "2028921"
        assert kv["lti_cached"] == "true"


class TestTimeEstimate:
    def test_examples(self):
        assert time_estimate(2.03e6, 1e9) == pytest.approx(0.00203, rel=1e-15)
        assert time_estimate(0, 5e8) == 0
        assert time_estimate(1e9, 1e9) == 1.0

    def test_rejects_nonpositive_rate(self):
        with pytest.raises(ValueError):
            time_estimate(1.0, 0.0)


class TestAudit:
    @pytest.mark.parametrize("m,n", [(1, 1), (3, 5), (10, 30)])
    def test_counter_matches_implementation_model(self, m, n):
        rng = np.random.default_rng(m * 100 + n)
        Q, c, G, b = random_feasible_qp(rng, m, n)
        qp = QpInstance.from_vectors(Q, c, G, b)
        counter = FlopCounter()
        res = solve_soft_qp(qp, np.full(n, 10.0), counter=counter)
        rows = flop_audit(counter, m, n, res.iterations)
        assert [r["step"] for r in rows] == list(STEPS)
        for r in rows:
            assert r["measured"] == r["implementation"]
            assert r["residual"] == r["measured"] - r["theorem"]

    def test_residual_structure(self):
        # the implementation and the published polynomials share every cubic
        # and quadratic term in n except the ones listed here
        for m, n in [(1, 1), (3, 5), (10, 30)]:
            N = iteration_count(n, 1e-6)
            th = theorem_step_flops(m, n, N)
            im = implementation_step_flops(m, n, N)
            assert im["step1"] == th["step1"]
            assert im["step3"] == th["step3"]
            assert im["step2_H"] - th["step2_H"] == -n * n
            assert im["step2_h"] - th["step2_h"] == -n
            assert im["step4"] - th["step4"] == n * n - n - 2
            assert im["step5"] - th["step5"] == 7 * n * N
            assert im["step6"] - th["step6"] == -m

    def test_cached_rows_skipped(self):
        rows = flop_audit(FlopCounter(), 2, 3, 10, lti_cached=True)
        assert not {r["step"] for r in rows} & set(OFFLINE_STEPS)


def test_measured_flop_rate_positive():
    rate = measure_flop_rate(n=10, repeats=3)
    assert np.isfinite(rate) and rate > 0
