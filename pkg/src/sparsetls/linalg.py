"""Dense real linear-algebra kernels shared by the solvers.

Everything here works on plain float64 numpy arrays.  The only nontrivial
routine is ``dominant_eigenpair``, which switches between a dense
eigendecomposition for small operators and Lanczos with full
reorthogonalization for large ones.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    NonConvergence,
    NotPositiveDefinite,
    RankDeficient,
)

# Below this dimension a dense eigendecomposition is cheaper and has no
# convergence failure mode; above it we run Lanczos on the implicit operator.
DENSE_EIG_MAX = 64

# Krylov block size per Lanczos restart cycle.
_LANCZOS_BLOCK = 40


@dataclass(frozen=True)
class SymOperator:
    """Implicit symmetric linear operator v -> apply(v) on R^dim."""

    apply: Callable[[np.ndarray], np.ndarray]
    dim: int

    def __call__(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise DimensionMismatch(
                f"operator of dim {self.dim} applied to vector of shape {v.shape}"
            )
        out = self.apply(v)
        if out.shape != (self.dim,):
            raise DimensionMismatch(
                f"operator returned shape {out.shape}, expected ({self.dim},)"
            )
        return out

    def dense(self) -> np.ndarray:
        """Materialize the operator as a dense symmetric matrix."""
        cols = [self(e) for e in np.eye(self.dim)]
        M = np.column_stack(cols)
        return 0.5 * (M + M.T)


@dataclass(frozen=True)
class EigenPair:
    value: float
    vector: np.ndarray


def canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so its entry of largest absolute value is positive."""
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


def dominant_eigenpair(
    op: SymOperator,
    tol: float = 1e-10,
    max_iter: int | None = None,
    v0: np.ndarray | None = None,
) -> EigenPair:
    """Eigenpair of largest-magnitude eigenvalue of a symmetric operator.

    For ``op.dim <= DENSE_EIG_MAX`` the operator is materialized and handed
    to a dense symmetric eigensolver; otherwise restarted Lanczos with full
    reorthogonalization is used, warm-started from ``v0`` when given.

    Raises NonConvergence if the residual ``||op(v) - value*v||`` is still
    above ``tol`` after ``max_iter`` operator applications (default
    ``10 * op.dim``).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    d = op.dim
    if max_iter is None:
        max_iter = 10 * d

    if d <= DENSE_EIG_MAX:
        M = op.dense()
        w, V = np.linalg.eigh(M)
        i = int(np.argmax(np.abs(w)))
        value = float(w[i])
        vec = canonical_sign(V[:, i])
        resid = np.linalg.norm(op(vec) - value * vec)
        if resid > tol:
            raise NonConvergence(
                f"dense eigenpair residual {resid:.3e} exceeds tol {tol:.3e}"
            )
        return EigenPair(value, vec)

    return _lanczos_dominant(op, tol, max_iter, v0)


def _start_vector(d: int, v0: np.ndarray | None) -> np.ndarray:
    if v0 is not None:
        v0 = np.asarray(v0, dtype=float)
        if v0.shape != (d,):
            raise DimensionMismatch(f"v0 has shape {v0.shape}, expected ({d},)")
        nrm = np.linalg.norm(v0)
        if nrm > 0:
            return v0 / nrm
    # Deterministic start with nonzero projection on every coordinate.
    q = 1.0 + np.linspace(0.0, 1.0, d)
    return q / np.linalg.norm(q)


def _lanczos_dominant(
    op: SymOperator, tol: float, max_iter: int, v0: np.ndarray | None
) -> EigenPair:
    d = op.dim
    q = _start_vector(d, v0)
    matvecs = 0

    while matvecs < max_iter:
        k = min(_LANCZOS_BLOCK, d, max_iter - matvecs)
        Q = np.zeros((d, k))
        alphas = np.zeros(k)
        betas = np.zeros(max(k - 1, 0))
        Q[:, 0] = q
        j_last = 0
        for j in range(k):
            u = op(Q[:, j])
            matvecs += 1
            alphas[j] = Q[:, j] @ u
            r = u - alphas[j] * Q[:, j]
            if j > 0:
                r -= betas[j - 1] * Q[:, j - 1]
            # Full reorthogonalization, applied twice for safety.
            r -= Q[:, : j + 1] @ (Q[:, : j + 1].T @ r)
            r -= Q[:, : j + 1] @ (Q[:, : j + 1].T @ r)
            j_last = j
            if j + 1 == k:
                break
            b = np.linalg.norm(r)
            if b < 1e-14:
                break  # invariant subspace found
            betas[j] = b
            Q[:, j + 1] = r / b

        kk = j_last + 1
        T = np.diag(alphas[:kk]) + np.diag(betas[: kk - 1], 1) + np.diag(betas[: kk - 1], -1)
        w, S = np.linalg.eigh(T)
        i = int(np.argmax(np.abs(w)))
        theta = float(w[i])
        x = Q[:, :kk] @ S[:, i]
        x /= np.linalg.norm(x)
        resid = np.linalg.norm(op(x) - theta * x)
        matvecs += 1
        if resid <= tol:
            return EigenPair(theta, canonical_sign(x))
        q = x  # restart from the best Ritz vector

    raise NonConvergence(
        f"Lanczos did not reach tol {tol:.3e} within {max_iter} matvecs"
    )


def spd_solve(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve M x = rhs for symmetric positive-definite M via Cholesky."""
    try:
        factor = scipy.linalg.cho_factor(M, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    return scipy.linalg.cho_solve(factor, rhs, check_finite=False)


def min_norm_solution(A: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Minimum l2-norm solution x0 = A^T (A A^T)^{-1} y of A x = y.

    A must have full row rank; raises RankDeficient otherwise.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    if A.shape[0] != y.shape[0]:
        raise DimensionMismatch(
            f"A has {A.shape[0]} rows but y has length {y.shape[0]}"
        )
    G = A @ A.T
    try:
        factor = scipy.linalg.cho_factor(G, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise RankDeficient("A A^T is not positive definite") from exc
    diag = np.abs(np.diag(factor[0]))
    if diag.min() ** 2 < 1e-14 * diag.max() ** 2:
        raise RankDeficient("A A^T is numerically singular")
    return A.T @ scipy.linalg.cho_solve(factor, y, check_finite=False)
