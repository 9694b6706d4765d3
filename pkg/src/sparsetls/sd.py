"""SD-FOCUSS: synchronous estimation of the sparse signal and the
dictionary perturbation, for single and multiple measurement vectors.

Each iteration freezes the previous iterate, forms the closed-form
perturbation estimate E_k, and takes one reweighted ridge step on the
perturbed dictionary A + E_k.  Unlike alternating schemes there is a single
convergent loop.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidParam, NotPositiveDefinite
from .linalg import min_norm_solution
from .params import SolveResult, SolverParams, _Stopwatch, relative_change_sq
from .baseline import reweight_matrix, _check_x0


@dataclass(frozen=True)
class PerturbEstimate:
    E_hat: np.ndarray
    sigma_ratio_sq: float  # sigma1^2 / sigma2^2, the ridge constant


def estimate_E(
    A: np.ndarray, y: np.ndarray, x: np.ndarray, sigma1: float, sigma2: float
) -> PerturbEstimate:
    """Closed-form minimizer of the perturbation objective for fixed x.

    E_* = (y - A x) x^T / (sigma1^2/sigma2^2 + ||x||^2), a rank-1 matrix.
    """
    if sigma2 <= 0:
        raise InvalidParam("sigma2 must be positive")
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    ratio_sq = sigma1**2 / sigma2**2
    denom = ratio_sq + float(x @ x)
    if denom == 0.0:
        return PerturbEstimate(np.zeros_like(A), ratio_sq)
    r = np.asarray(y, dtype=float) - A @ x
    return PerturbEstimate(np.outer(r, x) / denom, ratio_sq)


def sd_objective(A, y, x, E, gamma, p, sigma_ratio_sq):
    """J(x, E) = ||y - (A+E)x||^2 + (s1/s2)^2 ||E||_F^2 + gamma ||x||_p^p."""
    r = y - (A + E) @ x
    return float(
        np.sum(r * r)
        + sigma_ratio_sq * np.sum(E * E)
        + gamma * np.sum(np.abs(x) ** p)
    )


def sd_focuss(
    A: np.ndarray,
    y: np.ndarray,
    params: SolverParams,
    x0: np.ndarray | None = None,
    E0: np.ndarray | None = None,
) -> SolveResult:
    """Single-measurement SD-FOCUSS iteration.

    E0 is accepted for interface symmetry but the first step already
    recomputes E from x0, so it only matters as a reporting default.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    gamma, alpha = params.gamma, params.alpha
    if alpha <= 0:
        raise InvalidParam("SD-FOCUSS needs alpha > 0; pass a positive sigma1")
    m = A.shape[0]
    with _Stopwatch() as sw:
        x = min_norm_solution(A, y) if x0 is None else np.asarray(x0, dtype=float)
        _check_x0(x, y)
        E = np.zeros_like(A) if E0 is None else np.asarray(E0, dtype=float)
        trace = []
        converged = False
        k = 0
        for k in range(1, params.max_iter + 1):
            w = reweight_matrix(x, params.p)
            est = estimate_E(A, y, x, params.sigma1, params.sigma2)
            E = est.E_hat
            Ak = (A + E) * w
            M = Ak @ Ak.T + alpha * np.eye(m)
            x_new = w * (Ak.T @ scipy.linalg.solve(M, y, assume_a="pos"))
            trace.append(
                sd_objective(A, y, x_new, E, gamma, params.p, est.sigma_ratio_sq)
            )
            rel = relative_change_sq(x_new, x)
            x = x_new
            if rel < params.epsilon:
                converged = True
                break
    return SolveResult(x, k, trace, converged, sw.elapsed, E_hat=E)


def mmv_weights(X_prev: np.ndarray, p: float) -> np.ndarray:
    """Row-sparsity weights c_i^{1-p/2} with c_i the l2 norm of row i."""
    if not (0.0 < p <= 1.0):
        raise InvalidParam(f"p must lie in (0, 1], got {p}")
    X = np.atleast_2d(np.asarray(X_prev, dtype=float).T).T
    c = np.linalg.norm(X, axis=1)
    return c ** (1.0 - p / 2.0)


def mmv_estimate_E(
    A: np.ndarray,
    Y: np.ndarray,
    X_prev: np.ndarray,
    sigma1: float,
    sigma2: float,
) -> PerturbEstimate:
    """MMV perturbation update E = (Y - A X)(r I + X^T X)^{-1} X^T, r = (s1/s2)^2.

    The inner solve is L x L; at L=1 it degenerates to the SMV scalar
    denominator.
    """
    if sigma2 <= 0:
        raise InvalidParam("sigma2 must be positive")
    A = np.asarray(A, dtype=float)
    Y = np.atleast_2d(np.asarray(Y, dtype=float).T).T
    X = np.atleast_2d(np.asarray(X_prev, dtype=float).T).T
    ratio_sq = sigma1**2 / sigma2**2
    L = X.shape[1]
    G = ratio_sq * np.eye(L) + X.T @ X
    R = Y - A @ X
    if not np.any(G):
        return PerturbEstimate(np.zeros_like(A), ratio_sq)
    try:
        S = scipy.linalg.solve(G, X.T, assume_a="pos")
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise NotPositiveDefinite("L x L Gram matrix is singular") from exc
    return PerturbEstimate(R @ S, ratio_sq)


def mmv_sd_objective(A, Y, X, E, gamma, p, sigma_ratio_sq):
    R = Y - (A + E) @ X
    row_sq = np.sum(X * X, axis=1)
    return float(
        np.sum(R * R)
        + sigma_ratio_sq * np.sum(E * E)
        + gamma * np.sum(row_sq ** (p / 2.0))
    )


def mmv_sd_focuss(
    A: np.ndarray,
    Y: np.ndarray,
    params: SolverParams,
    X0: np.ndarray | None = None,
    E0: np.ndarray | None = None,
) -> SolveResult:
    """MMV SD-FOCUSS; stopping uses Frobenius-norm relative change."""
    A = np.asarray(A, dtype=float)
    Y = np.atleast_2d(np.asarray(Y, dtype=float).T).T
    gamma, alpha = params.gamma, params.alpha
    if alpha <= 0:
        raise InvalidParam("SD-FOCUSS needs alpha > 0; pass a positive sigma1")
    m = A.shape[0]
    with _Stopwatch() as sw:
        if X0 is None:
            X = np.column_stack(
                [min_norm_solution(A, Y[:, l]) for l in range(Y.shape[1])]
            )
        else:
            X = np.atleast_2d(np.asarray(X0, dtype=float).T).T
        _check_x0(X, Y)
        E = np.zeros_like(A) if E0 is None else np.asarray(E0, dtype=float)
        trace = []
        converged = False
        k = 0
        for k in range(1, params.max_iter + 1):
            w = mmv_weights(X, params.p)
            est = mmv_estimate_E(A, Y, X, params.sigma1, params.sigma2)
            E = est.E_hat
            Ak = (A + E) * w
            M = Ak @ Ak.T + alpha * np.eye(m)
            X_new = w[:, None] * (Ak.T @ scipy.linalg.solve(M, Y, assume_a="pos"))
            trace.append(
                mmv_sd_objective(A, Y, X_new, E, gamma, params.p, est.sigma_ratio_sq)
            )
            rel = relative_change_sq(X_new, X)
            X = X_new
            if rel < params.epsilon:
                converged = True
                break
    return SolveResult(X, k, trace, converged, sw.elapsed, E_hat=E)
