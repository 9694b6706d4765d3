"""Baseline FOCUSS-family solvers and (S)OMP.

These are the comparison algorithms: standard FOCUSS (weighted minimum-norm
iteration), Regularized FOCUSS (weighted ridge iteration), their MMV
counterparts built on row-norm weights, and greedy (simultaneous) orthogonal
matching pursuit with known sparsity.
"""

import numpy as np
import scipy.linalg

from .errors import InvalidParam
from .linalg import min_norm_solution
from .params import SolveResult, SolverParams, _Stopwatch, relative_change_sq


def reweight_matrix(x_prev: np.ndarray, p: float) -> np.ndarray:
    """Diagonal of W_k: |x_prev[i]|^{1 - p/2}.

    Returned as a length-n vector of the diagonal entries; zero entries of
    x_prev stay exactly zero (this pruning is what drives sparsity).
    """
    if not (0.0 < p <= 1.0):
        raise InvalidParam(f"p must lie in (0, 1], got {p}")
    return np.abs(np.asarray(x_prev, dtype=float)) ** (1.0 - p / 2.0)


def _penalized_residual(A, y, x, gamma, p):
    r = y - A @ x
    return float(np.sum(r * r) + gamma * np.sum(np.abs(x) ** p))


def _check_x0(x0, y):
    if not np.any(x0) and np.any(y):
        raise InvalidParam("all-zero x0 with nonzero data defeats reweighting")


def regularized_focuss(
    A: np.ndarray,
    y: np.ndarray,
    params: SolverParams,
    x0: np.ndarray | None = None,
) -> SolveResult:
    """Reweighted ridge iteration x_k = W A_k^T (A_k A_k^T + alpha I)^{-1} y."""
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    alpha, gamma = params.alpha, params.gamma
    if alpha <= 0:
        raise InvalidParam("regularized FOCUSS needs alpha > 0 (sigma1 > 0)")
    m = A.shape[0]
    with _Stopwatch() as sw:
        x = min_norm_solution(A, y) if x0 is None else np.asarray(x0, dtype=float)
        _check_x0(x, y)
        trace = []
        converged = False
        k = 0
        for k in range(1, params.max_iter + 1):
            w = reweight_matrix(x, params.p)
            Ak = A * w
            M = Ak @ Ak.T + alpha * np.eye(m)
            x_new = w * (Ak.T @ scipy.linalg.solve(M, y, assume_a="pos"))
            trace.append(_penalized_residual(A, y, x_new, gamma, params.p))
            rel = relative_change_sq(x_new, x)
            x = x_new
            if rel < params.epsilon:
                converged = True
                break
    return SolveResult(x, k, trace, converged, sw.elapsed)


def standard_focuss(
    A: np.ndarray,
    y: np.ndarray,
    params: SolverParams,
    x0: np.ndarray | None = None,
) -> SolveResult:
    """Classic FOCUSS: weighted minimum-norm step x_k = W (A W)^+ y."""
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    with _Stopwatch() as sw:
        x = min_norm_solution(A, y) if x0 is None else np.asarray(x0, dtype=float)
        _check_x0(x, y)
        trace = []
        converged = False
        k = 0
        for k in range(1, params.max_iter + 1):
            w = reweight_matrix(x, params.p)
            q, *_ = np.linalg.lstsq(A * w, y, rcond=None)
            x_new = w * q
            trace.append(_penalized_residual(A, y, x_new, params.gamma, params.p))
            rel = relative_change_sq(x_new, x)
            x = x_new
            if rel < params.epsilon:
                converged = True
                break
    return SolveResult(x, k, trace, converged, sw.elapsed)


def _row_norm_weights(X: np.ndarray, p: float) -> np.ndarray:
    c = np.linalg.norm(X, axis=1)
    return c ** (1.0 - p / 2.0)


def mmv_regularized_focuss(
    A: np.ndarray,
    Y: np.ndarray,
    params: SolverParams,
    X0: np.ndarray | None = None,
) -> SolveResult:
    """Regularized FOCUSS with row-norm weights; L=1 reduces to the SMV form."""
    A = np.asarray(A, dtype=float)
    Y = np.atleast_2d(np.asarray(Y, dtype=float).T).T
    alpha = params.alpha
    if alpha <= 0:
        raise InvalidParam("regularized MMV FOCUSS needs alpha > 0")
    m = A.shape[0]
    with _Stopwatch() as sw:
        X = _mmv_init(A, Y, X0)
        trace = []
        converged = False
        k = 0
        for k in range(1, params.max_iter + 1):
            w = _row_norm_weights(X, params.p)
            Ak = A * w
            M = Ak @ Ak.T + alpha * np.eye(m)
            X_new = w[:, None] * (Ak.T @ scipy.linalg.solve(M, Y, assume_a="pos"))
            trace.append(_mmv_objective(A, Y, X_new, params.gamma, params.p))
            rel = relative_change_sq(X_new, X)
            X = X_new
            if rel < params.epsilon:
                converged = True
                break
    return SolveResult(X, k, trace, converged, sw.elapsed)


def mmv_focuss(
    A: np.ndarray,
    Y: np.ndarray,
    params: SolverParams,
    X0: np.ndarray | None = None,
) -> SolveResult:
    """MMV FOCUSS: weighted minimum-norm step with row-norm weights."""
    A = np.asarray(A, dtype=float)
    Y = np.atleast_2d(np.asarray(Y, dtype=float).T).T
    with _Stopwatch() as sw:
        X = _mmv_init(A, Y, X0)
        trace = []
        converged = False
        k = 0
        for k in range(1, params.max_iter + 1):
            w = _row_norm_weights(X, params.p)
            Q, *_ = np.linalg.lstsq(A * w, Y, rcond=None)
            X_new = w[:, None] * Q
            trace.append(_mmv_objective(A, Y, X_new, params.gamma, params.p))
            rel = relative_change_sq(X_new, X)
            X = X_new
            if rel < params.epsilon:
                converged = True
                break
    return SolveResult(X, k, trace, converged, sw.elapsed)


def _mmv_init(A, Y, X0):
    if X0 is not None:
        X = np.atleast_2d(np.asarray(X0, dtype=float).T).T
    else:
        X = np.column_stack([min_norm_solution(A, Y[:, l]) for l in range(Y.shape[1])])
    _check_x0(X, Y)
    return X


def _mmv_objective(A, Y, X, gamma, p):
    R = Y - A @ X
    row_sq = np.sum(X * X, axis=1)
    return float(np.sum(R * R) + gamma * np.sum(row_sq ** (p / 2.0)))


def omp(A: np.ndarray, y: np.ndarray, s: int) -> tuple[np.ndarray, list[int]]:
    """Orthogonal matching pursuit with known sparsity s.

    Returns (x_hat, support). Correlations are normalized by column norms.
    """
    x, support = somp(A, y.reshape(-1, 1), s)
    return x[:, 0], support


def somp(A: np.ndarray, Y: np.ndarray, s: int) -> tuple[np.ndarray, list[int]]:
    """Simultaneous OMP: greedy column selection by summed correlation."""
    A = np.asarray(A, dtype=float)
    Y = np.atleast_2d(np.asarray(Y, dtype=float).T).T
    m, n = A.shape
    if s > m:
        raise InvalidParam(f"sparsity {s} exceeds number of measurements {m}")
    col_norms = np.linalg.norm(A, axis=0)
    col_norms[col_norms == 0] = 1.0
    R = Y.copy()
    support: list[int] = []
    coef = np.zeros((0, Y.shape[1]))
    for _ in range(s):
        corr = np.linalg.norm(A.T @ R, axis=1) / col_norms
        corr[support] = -np.inf
        j = int(np.argmax(corr))
        support.append(j)
        coef, *_ = np.linalg.lstsq(A[:, support], Y, rcond=None)
        R = Y - A[:, support] @ coef
    X = np.zeros((n, Y.shape[1]))
    X[support, :] = coef
    return X, support
