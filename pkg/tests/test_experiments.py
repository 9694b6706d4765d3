import math

import numpy as np
import pytest

from sparsetls.errors import InvalidParam
from sparsetls.experiments import (
    TrialConfig,
    amplitude_rmse,
    detect_support,
    generate_problem,
    relative_mse,
    run_monte_carlo,
    support_success,
)


def base_cfg(**kw):
    defaults = dict(m=20, n=30, s=3, snr_db=15.0, seed=1, trials=1)
    defaults.update(kw)
    return TrialConfig(**defaults)


class TestTrialConfig:
    def test_dimension_validation(self):
        with pytest.raises(InvalidParam):
            base_cfg(s=25)
        with pytest.raises(InvalidParam):
            base_cfg(n=20)

    def test_unknown_algorithm(self):
        with pytest.raises(InvalidParam):
            base_cfg(algorithms=("nope",))

    def test_tls_not_available_for_mmv(self):
        with pytest.raises(InvalidParam):
            base_cfg(L=2, algorithms=("tls-focuss",))

    def test_snr_to_sigma(self):
        assert base_cfg(snr_db=20.0).sigma == pytest.approx(0.1)
        assert base_cfg(snr_db=math.inf).sigma == 0.0

    def test_explicit_amplitude_count(self):
        with pytest.raises(InvalidParam):
            base_cfg(amplitude_mode="explicit", amplitudes=(1.0,))


class TestGenerateProblem:
    def test_model_consistency(self):
        inst = generate_problem(base_cfg(), 0)
        assert inst.y == pytest.approx((inst.A + inst.E) @ inst.x_true + inst.e)
        assert len(inst.support) == 3
        off = np.setdiff1d(np.arange(30), inst.support)
        assert np.all(inst.x_true[off] == 0)
        assert np.sum(inst.x_true**2) == pytest.approx(1.0)

    def test_noise_free(self):
        inst = generate_problem(base_cfg(snr_db=math.inf), 0)
        assert np.all(inst.E == 0) and np.all(inst.e == 0)
        assert inst.y == pytest.approx(inst.A @ inst.x_true)

    def test_constant_mode_power_normalized(self):
        inst = generate_problem(base_cfg(s=4, amplitude_mode="constant"), 0)
        assert inst.x_true[inst.support] == pytest.approx(np.full(4, 0.5))

    def test_determinism(self):
        a = generate_problem(base_cfg(), 5)
        b = generate_problem(base_cfg(), 5)
        assert np.array_equal(a.A, b.A)
        assert np.array_equal(a.y, b.y)
        assert np.array_equal(a.E, b.E)
        c = generate_problem(base_cfg(), 6)
        assert not np.array_equal(a.A, c.A)

    def test_mmv_shapes(self):
        inst = generate_problem(base_cfg(L=4, s=5, algorithms=("sd-focuss",)), 0)
        assert inst.x_true.shape == (30, 4)
        assert inst.y.shape == (20, 4)
        assert np.linalg.norm(inst.x_true, axis=0) == pytest.approx(np.ones(4))


class TestMetrics:
    def test_exact_recovery(self):
        inst = generate_problem(base_cfg(), 0)
        assert support_success(inst.x_true, inst.support, 3)

    def test_disjoint_support(self):
        x = np.zeros(30)
        x[[1, 2, 4]] = 1.0
        assert not support_success(x, np.array([10, 11, 12]), 3)

    def test_off_support_spike_breaks_success(self):
        x = np.zeros(30)
        support = np.array([3, 15, 25])
        x[support] = [0.4, -0.9, -1.5]
        x[7] = 0.5  # larger than the weakest true entry
        assert not support_success(x, support, 3)

    def test_tie_break_lowest_index(self):
        x = np.array([1.0, 1.0, 1.0, 0.0])
        assert detect_support(x, 2).tolist() == [0, 1]

    def test_rmse_exact(self):
        inst = generate_problem(base_cfg(), 0)
        assert amplitude_rmse(inst.x_true, inst.x_true, inst.support) == 0.0

    def test_rmse_single_entry_delta(self):
        x_true = np.zeros(10)
        support = np.array([2, 5, 8])
        x_true[support] = [1.0, -1.0, 0.5]
        x_hat = x_true.copy()
        x_hat[5] += 0.3
        assert amplitude_rmse(x_hat, x_true, support) == pytest.approx(0.3 / np.sqrt(3))

    def test_rmse_scalar_oracle(self):
        rng = np.random.default_rng(0)
        x_true = np.zeros(12)
        support = np.array([0, 4, 9])
        x_true[support] = rng.standard_normal(3)
        x_hat = x_true + 0.01 * rng.standard_normal(12)
        expected = np.sqrt(np.mean((x_hat[support] - x_true[support]) ** 2))
        assert amplitude_rmse(x_hat, x_true, support) == pytest.approx(expected)

    def test_rmse_refit(self):
        rng = np.random.default_rng(1)
        A = rng.standard_normal((10, 20))
        support = np.array([2, 7, 13])
        x_true = np.zeros(20)
        x_true[support] = [1.0, -0.5, 0.8]
        y = A @ x_true
        x_hat = x_true + 0.1 * rng.standard_normal(20)
        assert amplitude_rmse(x_hat, x_true, support, refit=True, A=A, y=y) == pytest.approx(
            0.0, abs=1e-10
        )

    def test_relative_mse_cases(self):
        X = np.arange(6, dtype=float).reshape(3, 2) + 1
        assert relative_mse(X, X) == 0.0
        assert relative_mse(np.zeros_like(X), X) == pytest.approx(1.0)
        assert relative_mse(1.1 * X, X) == pytest.approx(0.01)
        with pytest.raises(InvalidParam):
            relative_mse(X, np.zeros_like(X))


class TestRunMonteCarlo:
    def test_single_noise_free_trial(self):
        cfg = base_cfg(
            snr_db=math.inf,
            amplitude_mode="constant",
            algorithms=("reg-focuss",),
            trials=1,
        )
        summary = run_monte_carlo([cfg])
        (row,) = summary.rows
        assert row.success_rate == 1.0
        assert row.rmse is not None and row.rmse < 1e-3

    def test_seed_determinism(self):
        cfg = base_cfg(algorithms=("reg-focuss", "sd-focuss"), trials=10)
        a = run_monte_carlo([cfg])
        b = run_monte_carlo([cfg])
        for ra, rb in zip(a.rows, b.rows):
            assert ra.successes == rb.successes
            assert ra.rmse == rb.rmse

    def test_thread_count_does_not_change_content(self):
        cfg = base_cfg(algorithms=("sd-focuss",), trials=12)
        a = run_monte_carlo([cfg], threads=1)
        b = run_monte_carlo([cfg], threads=4)
        assert a.rows[0].successes == b.rows[0].successes
        assert a.rows[0].rmse == b.rows[0].rmse

    def test_mmv_reporting(self):
        cfg = base_cfg(L=3, s=4, algorithms=("sd-focuss", "omp"), trials=5, snr_db=20.0)
        summary = run_monte_carlo([cfg])
        for row in summary.rows:
            assert row.relative_mse is not None
            assert row.rmse is None
            assert 0 <= row.success_rate <= 1

    def test_success_rate_monotone_in_snr_statistical(self):
        # coarse check: success should clearly rise from 5 dB to 25 dB
        cfgs = [
            base_cfg(snr_db=snr, algorithms=("sd-focuss",), trials=40, seed=3)
            for snr in (5.0, 25.0)
        ]
        rows = run_monte_carlo(cfgs).rows
        assert rows[1].success_rate >= rows[0].success_rate + 0.05
