import numpy as np
import pytest

from sparsetls.params import SolverParams
from sparsetls.sd import (
    estimate_E,
    mmv_estimate_E,
    mmv_sd_focuss,
    mmv_weights,
    sd_focuss,
    sd_objective,
)
from sparsetls.baseline import reweight_matrix


def fd_gradient(fun, E, h=1e-6):
    """Central finite differences of a scalar function of a matrix."""
    G = np.zeros_like(E)
    for idx in np.ndindex(E.shape):
        Ep, Em = E.copy(), E.copy()
        Ep[idx] += h
        Em[idx] -= h
        G[idx] = (fun(Ep) - fun(Em)) / (2 * h)
    return G


class TestEstimateE:
    def test_zero_x(self):
        rng = np.random.default_rng(0)
        A = rng.standard_normal((4, 6))
        est = estimate_E(A, rng.standard_normal(4), np.zeros(6), 0.1, 0.1)
        assert est.E_hat == pytest.approx(np.zeros((4, 6)))

    def test_consistent_data(self):
        rng = np.random.default_rng(1)
        A = rng.standard_normal((4, 6))
        x = rng.standard_normal(6)
        est = estimate_E(A, A @ x, x, 0.1, 0.1)
        assert est.E_hat == pytest.approx(np.zeros((4, 6)), abs=1e-12)

    def test_gradient_stationarity(self):
        rng = np.random.default_rng(2)
        gamma, p = 0.3, 0.5
        for _ in range(10):
            m, n = 4, 6
            A = rng.standard_normal((m, n))
            y = rng.standard_normal(m)
            x = rng.standard_normal(n)
            s1, s2 = 0.2, 0.1
            est = estimate_E(A, y, x, s1, s2)
            fun = lambda E: sd_objective(A, y, x, E, gamma, p, est.sigma_ratio_sq)
            G = fd_gradient(fun, est.E_hat)
            assert np.max(np.abs(G)) <= 1e-5 * (1 + abs(fun(est.E_hat)))

    def test_minimizer_by_probing(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((4, 6))
        y = rng.standard_normal(4)
        x = rng.standard_normal(6)
        est = estimate_E(A, y, x, 0.15, 0.1)
        J0 = sd_objective(A, y, x, est.E_hat, 0.2, 0.5, est.sigma_ratio_sq)
        for _ in range(100):
            delta = 1e-3 * rng.standard_normal((4, 6))
            assert sd_objective(A, y, x, est.E_hat + delta, 0.2, 0.5, est.sigma_ratio_sq) >= J0

    def test_rank_one(self):
        rng = np.random.default_rng(4)
        A = rng.standard_normal((5, 8))
        est = estimate_E(A, rng.standard_normal(5), rng.standard_normal(8), 0.1, 0.1)
        sv = np.linalg.svd(est.E_hat, compute_uv=False)
        assert np.sum(sv > 1e-10 * sv[0]) <= 1


class TestSdFocuss:
    def test_noise_free_planted(self):
        rng = np.random.default_rng(5)
        A = rng.standard_normal((10, 20))
        x = np.zeros(20)
        x[[3, 12]] = [1.1, -0.6]
        y = A @ x
        params = SolverParams(p=0.5, sigma1=1e-6, sigma2=1e-6, epsilon=1e-8, max_iter=200)
        res = sd_focuss(A, y, params)
        assert np.linalg.norm(res.x_hat - x) <= 1e-3 * np.linalg.norm(x)

    def test_zero_data(self):
        rng = np.random.default_rng(6)
        A = rng.standard_normal((5, 9))
        res = sd_focuss(A, np.zeros(5), SolverParams(sigma1=0.1, sigma2=0.1))
        assert res.x_hat == pytest.approx(np.zeros(9))
        assert res.E_hat == pytest.approx(np.zeros((5, 9)))
        assert res.converged and res.iterations == 1

    def test_objective_descent(self):
        rng = np.random.default_rng(7)
        sigma = 10 ** (-15.0 / 20.0)
        for _ in range(15):
            A = rng.standard_normal((20, 30))
            support = rng.choice(30, 3, replace=False)
            x = np.zeros(30)
            amps = rng.standard_normal(3)
            x[support] = amps / np.linalg.norm(amps)
            y = (A + sigma * rng.standard_normal((20, 30))) @ x + sigma * rng.standard_normal(20)
            res = sd_focuss(A, y, SolverParams(p=0.5, sigma1=sigma, sigma2=sigma))
            trace = np.array(res.objective_trace)
            assert np.all(np.diff(trace) <= 1e-9)


class TestMmvWeights:
    def test_l1_matches_smv(self):
        x = np.array([0.5, -2.0, 0.0, 1.0])
        assert mmv_weights(x.reshape(-1, 1), 0.5) == pytest.approx(
            reweight_matrix(x, 0.5)
        )

    def test_zero_row(self):
        X = np.array([[1.0, 2.0], [0.0, 0.0], [3.0, -1.0]])
        w = mmv_weights(X, 0.5)
        assert w[1] == 0.0

    def test_scalar_oracle(self):
        rng = np.random.default_rng(8)
        X = rng.standard_normal((5, 3))
        w = mmv_weights(X, 0.5)
        for i in range(5):
            c = np.sqrt(np.sum(X[i] ** 2))
            assert w[i] == pytest.approx(c**0.75)


class TestMmvEstimateE:
    def test_l1_equals_smv(self):
        rng = np.random.default_rng(9)
        A = rng.standard_normal((4, 7))
        y = rng.standard_normal(4)
        x = rng.standard_normal(7)
        e1 = estimate_E(A, y, x, 0.2, 0.1)
        e2 = mmv_estimate_E(A, y.reshape(-1, 1), x.reshape(-1, 1), 0.2, 0.1)
        assert e2.E_hat == pytest.approx(e1.E_hat, abs=1e-12)

    def test_zero_residual(self):
        rng = np.random.default_rng(10)
        A = rng.standard_normal((4, 7))
        X = rng.standard_normal((7, 3))
        est = mmv_estimate_E(A, A @ X, X, 0.1, 0.1)
        assert est.E_hat == pytest.approx(np.zeros((4, 7)), abs=1e-12)

    def test_gradient_stationarity_mmv(self):
        rng = np.random.default_rng(11)
        from sparsetls.sd import mmv_sd_objective

        for _ in range(5):
            m, n, L = 3, 5, 2
            A = rng.standard_normal((m, n))
            Y = rng.standard_normal((m, L))
            X = rng.standard_normal((n, L))
            est = mmv_estimate_E(A, Y, X, 0.2, 0.1)
            fun = lambda E: mmv_sd_objective(A, Y, X, E, 0.3, 0.5, est.sigma_ratio_sq)
            G = fd_gradient(fun, est.E_hat)
            assert np.max(np.abs(G)) <= 1e-5 * (1 + abs(fun(est.E_hat)))

    def test_rank_bound(self):
        rng = np.random.default_rng(12)
        m, n, L = 6, 10, 3
        A = rng.standard_normal((m, n))
        est = mmv_estimate_E(
            A, rng.standard_normal((m, L)), rng.standard_normal((n, L)), 0.1, 0.1
        )
        sv = np.linalg.svd(est.E_hat, compute_uv=False)
        assert np.sum(sv > 1e-10 * sv[0]) <= L


class TestMmvSdFocuss:
    def test_l1_reduction(self):
        rng = np.random.default_rng(13)
        A = rng.standard_normal((10, 20))
        x = np.zeros(20)
        x[[2, 9, 17]] = [1.0, -0.5, 0.8]
        y = A @ x + 0.03 * rng.standard_normal(10)
        params = SolverParams(p=0.5, sigma1=0.05, sigma2=0.05, max_iter=50)
        r1 = sd_focuss(A, y, params)
        r2 = mmv_sd_focuss(A, y.reshape(-1, 1), params)
        assert np.max(np.abs(r2.x_hat[:, 0] - r1.x_hat)) <= 1e-12

    def test_planted_row_sparse(self):
        rng = np.random.default_rng(14)
        A = rng.standard_normal((10, 20))
        support = np.sort(rng.choice(20, size=2, replace=False))
        X = np.zeros((20, 4))
        X[support] = rng.standard_normal((2, 4)) + np.sign(rng.standard_normal((2, 4)))
        Y = A @ X
        params = SolverParams(p=0.5, sigma1=1e-6, sigma2=1e-6, epsilon=1e-8, max_iter=200)
        res = mmv_sd_focuss(A, Y, params)
        rows = set(np.argsort(-np.linalg.norm(res.x_hat, axis=1), kind="stable")[:2])
        assert rows == set(support)

    def test_descent(self):
        rng = np.random.default_rng(15)
        sigma = 0.1
        A = rng.standard_normal((20, 30))
        support = rng.choice(30, 5, replace=False)
        X = np.zeros((30, 3))
        X[support] = rng.standard_normal((5, 3))
        Y = (A + sigma * rng.standard_normal((20, 30))) @ X + sigma * rng.standard_normal((20, 3))
        res = mmv_sd_focuss(A, Y, SolverParams(p=0.5, sigma1=sigma, sigma2=sigma))
        trace = np.array(res.objective_trace)
        assert np.all(np.diff(trace) <= 1e-9)
