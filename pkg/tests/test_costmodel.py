import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from actisum.costmodel import (
    CalibrationError,
    CostConstants,
    calibrate,
    calibrate_from_timings,
    format_calibration,
    load_constants,
    read_timings,
    scoring_cost,
    total_cost,
)

counts = st.integers(min_value=0, max_value=1000)
pos_counts = st.integers(min_value=1, max_value=1000)
rates = st.floats(min_value=0.0, max_value=10.0, allow_nan=False)


class TestCostConstants:
    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            CostConstants(c_sum=-0.1, c_bl=0, c_train=0)
        with pytest.raises(ValueError):
            CostConstants(c_sum=0, c_bl=0, c_train=0, c_train0=-1)


class TestScoringCost:
    def test_zero_cases(self):
        c = CostConstants(c_sum=1.0, c_bl=1.0, c_train=0.0)
        assert scoring_cost(0, 10, c) == 0.0
        assert scoring_cost(100, 0, c) == 0.0

    def test_hand_case_summary_term(self):
        c = CostConstants(c_sum=1.0, c_bl=0.0, c_train=0.0)
        assert scoring_cost(100, 10, c) == 1000.0

    def test_hand_case_pairwise_term(self):
        c = CostConstants(c_sum=0.0, c_bl=0.01, c_train=0.0)
        assert scoring_cost(100, 10, c) == pytest.approx(90.0)

    def test_negative_inputs_rejected(self):
        c = CostConstants(c_sum=1, c_bl=1, c_train=0)
        with pytest.raises(ValueError):
            scoring_cost(-1, 10, c)
        with pytest.raises(ValueError):
            scoring_cost(10, -1, c)

    @given(k=counts, n=counts, m=st.integers(min_value=0, max_value=5), c_sum=rates, c_bl=rates)
    @settings(max_examples=200, deadline=None)
    def test_exactly_linear_in_k(self, k, n, m, c_sum, c_bl):
        c = CostConstants(c_sum=c_sum, c_bl=c_bl, c_train=0.0)
        assert scoring_cost(m * k, n, c) == pytest.approx(m * scoring_cost(k, n, c), rel=1e-12)

    @given(k=counts, n=counts, c_sum=rates, c_bl=rates)
    @settings(max_examples=200, deadline=None)
    def test_quadratic_in_n(self, k, n, c_sum, c_bl):
        # kn·c_sum + kn(n−1)·c_bl is a degree-2 polynomial in n: second
        # difference is the constant 2·k·c_bl
        c = CostConstants(c_sum=c_sum, c_bl=c_bl, c_train=0.0)
        f = lambda x: scoring_cost(k, x, c)
        second_diff = f(n + 2) - 2 * f(n + 1) + f(n)
        assert second_diff == pytest.approx(2 * k * c_bl, rel=1e-9, abs=1e-9)


class TestTotalCost:
    def test_zero_budget(self):
        c = CostConstants(c_sum=1, c_bl=1, c_train=50, c_train0=7.5)
        assert total_cost(100, 10, 10, 0, c) == 7.5

    def test_hand_case_table_decomposition(self):
        # scoring 150 s and training 994 s per step, 80 steps
        c = CostConstants(c_sum=0.3, c_bl=0.0, c_train=994.0, c_train0=0.0)
        assert scoring_cost(50, 10, c) == pytest.approx(150.0)
        assert total_cost(50, 10, 10, 800, c) == pytest.approx(91_520.0)

    def test_doubling_s_halves_total(self):
        c = CostConstants(c_sum=0.3, c_bl=0.02, c_train=100.0, c_train0=0.0)
        assert total_cost(50, 10, 20, 800, c) == pytest.approx(total_cost(50, 10, 10, 800, c) / 2)

    def test_b_over_s_is_a_real_ratio(self):
        c = CostConstants(c_sum=1.0, c_bl=0.0, c_train=0.0)
        # b=5, s=2 -> 2.5 steps, not 2 or 3
        assert total_cost(1, 1, 2, 5, c) == pytest.approx(2.5)

    def test_invalid_s(self):
        c = CostConstants(c_sum=1, c_bl=1, c_train=0)
        with pytest.raises(ValueError):
            total_cost(10, 10, 0, 100, c)

    @given(k=pos_counts, n=st.integers(min_value=2, max_value=50), s=st.integers(min_value=1, max_value=50), b=pos_counts)
    @settings(max_examples=200, deadline=None)
    def test_monotonicity(self, k, n, s, b):
        c = CostConstants(c_sum=0.5, c_bl=0.01, c_train=3.0, c_train0=1.0)
        assert total_cost(k + 1, n, s, b, c) >= total_cost(k, n, s, b, c)
        assert total_cost(k, n + 1, s, b, c) >= total_cost(k, n, s, b, c)
        assert total_cost(k, n, s + 1, b, c) < total_cost(k, n, s, b, c)

    @given(k=pos_counts, n=st.integers(min_value=2, max_value=50), s=st.integers(min_value=1, max_value=50), b=counts, m=st.integers(min_value=0, max_value=4))
    @settings(max_examples=200, deadline=None)
    def test_proportional_in_b(self, k, n, s, b, m):
        c = CostConstants(c_sum=0.5, c_bl=0.01, c_train=3.0, c_train0=0.0)
        assert total_cost(k, n, s, m * b, c) == pytest.approx(m * total_cost(k, n, s, b, c), rel=1e-12)


def _planted_observations(c_sum, c_bl, c_train, intercept=0.0):
    obs = []
    for k, n in [(50, 10), (100, 10), (200, 5), (500, 10), (80, 3), (120, 20)]:
        scoring = intercept + k * n * (c_sum + (n - 1) * c_bl)
        obs.append((float(k), float(n), scoring, c_train))
    return obs


class TestCalibrate:
    def test_recovers_planted_constants(self):
        obs = _planted_observations(c_sum=0.31, c_bl=0.004, c_train=12.5)
        result = calibrate(obs, c_train0=3.25)
        assert result.constants.c_sum == pytest.approx(0.31, rel=1e-9)
        assert result.constants.c_bl == pytest.approx(0.004, rel=1e-9)
        assert result.constants.c_train == pytest.approx(12.5, rel=1e-12)
        assert result.constants.c_train0 == 3.25
        assert result.intercept == pytest.approx(0.0, abs=1e-7)
        assert result.rms_residual < 1e-7

    def test_recovers_planted_intercept(self):
        obs = _planted_observations(c_sum=0.2, c_bl=0.01, c_train=5.0, intercept=2.5)
        result = calibrate(obs)
        assert result.intercept == pytest.approx(2.5, rel=1e-9)
        assert result.constants.c_sum == pytest.approx(0.2, rel=1e-9)
        assert result.constants.c_bl == pytest.approx(0.01, rel=1e-9)

    def test_nonnegative_even_on_noisy_data(self):
        rng = np.random.default_rng(0)
        obs = []
        for k, n, scoring, train in _planted_observations(0.05, 0.0, 2.0):
            obs.append((k, n, scoring + rng.normal(0, 5), train))
        result = calibrate(obs)
        assert result.constants.c_sum >= 0
        assert result.constants.c_bl >= 0
        assert result.intercept >= 0

    def test_table_scoring_points_fit_monotone_with_residuals(self):
        # published per-step scoring walltimes for n=10 at four k values;
        # the data are super-linear at the largest k, so residuals are real
        points = [(50.0, 10.0, 150.0, 994.0), (100.0, 10.0, 210.0, 994.0),
                  (200.0, 10.0, 370.0, 994.0), (500.0, 10.0, 1280.0, 994.0)]
        result = calibrate(points)
        predictions = [result.predicted_scoring(int(k), 10) for k in (50, 100, 200, 500)]
        assert predictions == sorted(predictions)
        assert predictions[0] < predictions[-1]
        assert len(result.residuals) == 4
        assert result.rms_residual > 0  # honest fit, not forced through
        assert result.constants.c_train == pytest.approx(994.0)

    def test_underdetermined_rejected(self):
        with pytest.raises(CalibrationError):
            calibrate([(50.0, 10.0, 150.0, 9.0)])
        with pytest.raises(CalibrationError, match="degenerate"):
            calibrate([(50.0, 10.0, 150.0, 9.0), (50.0, 5.0, 80.0, 9.0)])


class TestTimingsIO:
    def _write_timings(self, path, rows):
        lines = ["step,k,n,scoring_seconds,training_seconds,total_seconds"]
        lines += [",".join(str(v) for v in row) for row in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    def test_read_timings_splits_warm_start(self, tmp_path):
        path = tmp_path / "timings.csv"
        self._write_timings(
            path,
            [(0, 0, 0, 0.0, 3.5, 3.6), (1, 50, 10, 150.0, 9.0, 160.0), (2, 60, 10, 180.0, 9.5, 190.0)],
        )
        observations, c_train0 = read_timings(path)
        assert c_train0 == 3.5
        assert observations == [(50.0, 10.0, 150.0, 9.0), (60.0, 10.0, 180.0, 9.5)]

    def test_read_timings_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("step,k\n1,50\n", encoding="utf-8")
        with pytest.raises(CalibrationError, match="lacks columns"):
            read_timings(path)

    def test_calibrate_from_timings_end_to_end(self, tmp_path):
        c = CostConstants(c_sum=0.4, c_bl=0.002, c_train=11.0)
        rows = [(0, 0, 0, 0.0, 4.25, 4.3)]
        for step, (k, n) in enumerate([(50, 10), (100, 10), (200, 4)], start=1):
            rows.append((step, k, n, scoring_cost(k, n, c), 11.0, 0.0))
        path = tmp_path / "timings.csv"
        self._write_timings(path, rows)
        result = calibrate_from_timings(path)
        assert result.constants.c_sum == pytest.approx(0.4, rel=1e-9)
        assert result.constants.c_bl == pytest.approx(0.002, rel=1e-9)
        assert result.constants.c_train == pytest.approx(11.0)
        assert result.constants.c_train0 == 4.25

    def test_calibrate_pools_multiple_files(self, tmp_path):
        """Each file alone repeats one k (degenerate); pooled they fit."""
        c = CostConstants(c_sum=0.4, c_bl=0.002, c_train=11.0)
        paths = []
        for k, warm in [(50, 3.0), (200, 5.0)]:
            rows = [(0, 0, 0, 0.0, warm, warm)]
            for step, n in enumerate([10, 5], start=1):
                rows.append((step, k, n, scoring_cost(k, n, c), 11.0, 0.0))
            path = tmp_path / f"timings_k{k}.csv"
            self._write_timings(path, rows)
            paths.append(path)
        with pytest.raises(CalibrationError, match="degenerate"):
            calibrate_from_timings(paths[0])
        result = calibrate_from_timings(*paths)
        assert result.constants.c_sum == pytest.approx(0.4, rel=1e-9)
        assert result.constants.c_bl == pytest.approx(0.002, rel=1e-9)
        assert result.constants.c_train0 == pytest.approx(4.0)

    def test_calibrate_from_timings_needs_paths(self):
        with pytest.raises(CalibrationError, match="at least one"):
            calibrate_from_timings()

    def test_format_and_load_round_trip(self, tmp_path):
        result = calibrate(_planted_observations(0.3, 0.005, 8.0), c_train0=2.0)
        text = format_calibration(result)
        path = tmp_path / "constants.txt"
        path.write_text(text, encoding="utf-8")
        loaded = load_constants(path)
        assert loaded.c_sum == pytest.approx(result.constants.c_sum, rel=1e-6)
        assert loaded.c_bl == pytest.approx(result.constants.c_bl, rel=1e-6)
        assert loaded.c_train == pytest.approx(8.0)
        assert loaded.c_train0 == 2.0

    def test_load_constants_missing_keys(self, tmp_path):
        path = tmp_path / "partial.txt"
        path.write_text("c_sum = 1.0\n", encoding="utf-8")
        with pytest.raises(CalibrationError, match="lacks"):
            load_constants(path)


class TestMeasuredScalingInK:
    def test_scoring_time_grows_with_k(self, synth_corpus):
        """Desk-scale analog of the k-sampling cost argument: wall-clock
        scoring time grows with k once the pool size stops mattering."""
        from actisum.acquisition import AcquisitionPolicy
        from actisum.engine import ExperimentConfig, run

        def mean_scoring_seconds(k, seed):
            config = ExperimentConfig(
                budget=70,
                validation_size=50,
                warm_start_size=50,
                policy=AcquisitionPolicy(kind="bas", k=k, s=10, n=10, tau=0.87),
                seed=seed,
            )
            result = run(config, synth_corpus)
            times = [r.timings.scoring_seconds for r in result.steps if r.candidates_scored]
            return sum(times) / len(times)

        wins = 0
        for seed in range(3):
            t50 = mean_scoring_seconds(50, seed)
            t100 = mean_scoring_seconds(100, seed)
            t200 = mean_scoring_seconds(200, seed)
            if t50 < t100 < t200:
                wins += 1
        assert wins >= 2
