import dataclasses
import math

import numpy as np
import pytest

from cogmac import (
    ChannelInstance,
    PowerSplit,
    SolverStatus,
    UnsupportedSizeError,
    grid_search,
    instance_suite,
    kkt_check,
    relative_residual,
    single_user_closed_form,
    solve_max_sum_rate,
    sum_rate,
)
from test_channel import make_instance


class TestGridSearch:
    def test_single_user_unit(self, unit_k1):
        result = grid_search(unit_k1, 1e-3)
        assert result.best_gamma.gamma[0] == pytest.approx(
            (math.sqrt(3) - 1) / 2, abs=1e-3
        )
        assert result.best_sum_rate == sum_rate(unit_k1, result.best_gamma)

    def test_no_interference_returns_zero(self, k2_no_interference):
        result = grid_search(k2_no_interference, 0.1)
        assert np.all(result.best_gamma.gamma == 0.0)

    def test_two_user_agrees_with_solver(self, k2_reference):
        oracle = grid_search(k2_reference, 1e-3)
        solver = solve_max_sum_rate(k2_reference)
        assert abs(solver.sum_rate - oracle.best_sum_rate) <= 1e-3

    def test_best_point_is_feasible(self, k2_reference):
        result = grid_search(k2_reference, 0.01)
        assert relative_residual(k2_reference, result.best_gamma) <= 1e-9

    def test_size_cap(self):
        ch = ChannelInstance(
            h=np.ones(4), g=np.ones(4), p=np.ones(4), h_p=1, p_p=1,
            sigma_p2=1, sigma_c2=1,
        )
        with pytest.raises(UnsupportedSizeError):
            grid_search(ch, 0.1)

    def test_lower_bounds_solver_up_to_grid_error(self):
        rng = np.random.default_rng(42)
        for _ in range(5):
            ch = make_instance(rng, 2)
            oracle = grid_search(ch, 1e-2)
            solver = solve_max_sum_rate(ch)
            lip = float(np.sum(ch.h**2 * ch.p)) / (math.log(2.0) * ch.sigma_c2)
            assert solver.sum_rate >= oracle.best_sum_rate - lip * 1e-2


class TestKktCheck:
    def test_passes_on_converged_output(self, unit_k1):
        result = solve_max_sum_rate(unit_k1)
        assert kkt_check(unit_k1, result).passed

    def test_fails_on_corrupted_gamma(self, k2_reference):
        result = solve_max_sum_rate(k2_reference)
        bad = result.gamma_star.gamma.copy()
        bad[0] = min(bad[0] + 0.05, 1.0 - 1e-6)
        corrupted = dataclasses.replace(result, gamma_star=PowerSplit(bad))
        report = kkt_check(k2_reference, corrupted)
        assert not report.passed
        assert any(abs(v) > 1e-6 for v in report.stationarity.values()) or not report.feasibility_ok

    def test_degenerate_instance_passes_empty(self, k2_no_interference):
        result = solve_max_sum_rate(k2_no_interference)
        assert result.status is SolverStatus.DEGENERATE_NO_INTERFERENCE
        report = kkt_check(k2_no_interference, result)
        assert report.passed
        assert report.stationarity == {}


class TestSingleUserClosedForm:
    def test_unit_instance(self, unit_k1):
        assert single_user_closed_form(unit_k1) == pytest.approx(
            (math.sqrt(3) - 1) / 2, abs=1e-15
        )

    def test_large_interference_gain_limit(self):
        # interference and cooperation both scale with g, so the ratio tends
        # to sqrt(T/(1+T)) with T the baseline primary SNR
        ch = ChannelInstance(
            h=[1.0], g=[1e6], p=[1.0], h_p=1.0, p_p=1.0, sigma_p2=1.0, sigma_c2=1.0
        )
        gamma = single_user_closed_form(ch)
        assert gamma == pytest.approx(math.sqrt(0.5), abs=1e-5)
        assert relative_residual(ch, PowerSplit(np.array([gamma]))) <= 1e-9

    def test_zero_primary_gain(self):
        ch = ChannelInstance(
            h=[1.0], g=[1.0], p=[1.0], h_p=0.0, p_p=1.0, sigma_p2=1.0, sigma_c2=1.0
        )
        assert single_user_closed_form(ch) == 0.0

    def test_size_check(self, k2_reference):
        with pytest.raises(UnsupportedSizeError):
            single_user_closed_form(k2_reference)

    @pytest.mark.parametrize("seed", range(10))
    def test_residual_at_closed_form(self, seed):
        rng = np.random.default_rng(seed)
        ch = make_instance(rng, 1)
        gamma = single_user_closed_form(ch)
        assert relative_residual(ch, PowerSplit(np.array([gamma]))) <= 1e-12


class TestInstanceSuite:
    def test_reproducible(self):
        a = instance_suite(123, 6)
        b = instance_suite(123, 6)
        for x, y in zip(a, b):
            assert np.array_equal(x.h, y.h)
            assert x.p_p == y.p_p

    def test_cycles_sizes(self):
        suite = instance_suite(5, 6)
        assert [ch.num_users for ch in suite] == [1, 2, 3, 1, 2, 3]
