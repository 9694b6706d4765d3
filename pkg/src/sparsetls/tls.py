"""TLS-FOCUSS: sparse total-least-squares recovery on the augmented system.

The solver works on B = [-y, (sigma1/sigma2) A] acting on the unit sphere in
R^{n+1}.  Each outer iteration builds the reweighted resolvent operator

    Phi_k = W^2 - W^2 B^T (alpha I + B W^2 B^T)^{-1} B W^2,

whose dominant eigenvector is the next iterate.  Phi_k is applied implicitly:
the m x m inner matrix is factored once per iteration and every matvec costs
two products with B plus a triangular solve.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateSolution, InvalidParam, NotPositiveDefinite
from .linalg import SymOperator, dominant_eigenpair, min_norm_solution
from .params import SolveResult, SolverParams, _Stopwatch, relative_change_sq


@dataclass(frozen=True)
class AugmentedSystem:
    """B = [-y, scale_ratio * A] plus the bookkeeping needed to undo scaling."""

    B: np.ndarray
    scale_ratio: float
    m: int
    n: int

    @property
    def y(self) -> np.ndarray:
        return -self.B[:, 0]

    @property
    def A(self) -> np.ndarray:
        return self.B[:, 1:] / self.scale_ratio


def build_augmented(
    A: np.ndarray, y: np.ndarray, sigma1: float, sigma2: float
) -> AugmentedSystem:
    """Assemble the variance-normalized augmented system.

    When sigma1 != sigma2 the A-block is scaled by sigma1/sigma2 so that the
    stacked perturbation [e, scaled E] has a single variance.
    """
    if sigma1 <= 0 or sigma2 <= 0:
        raise InvalidParam("sigma1 and sigma2 must be positive")
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    m, n = A.shape
    ratio = sigma1 / sigma2
    B = np.empty((m, n + 1))
    B[:, 0] = -y
    B[:, 1:] = ratio * A
    return AugmentedSystem(B=B, scale_ratio=ratio, m=m, n=n)


def phi_operator(
    B: np.ndarray, z_prev: np.ndarray, alpha: float, p: float = 0.5
) -> SymOperator:
    """Implicit Phi_k for the current iterate.

    On all-nonzero z_prev, Phi equals alpha * (B^T B + alpha Pi(z_prev))^{-1}
    by the matrix inversion lemma; zero entries of z_prev zero out the
    corresponding rows and columns.
    """
    if alpha <= 0:
        raise InvalidParam("alpha must be positive")
    B = np.asarray(B, dtype=float)
    z_prev = np.asarray(z_prev, dtype=float)
    m = B.shape[0]
    w2 = np.abs(z_prev) ** (2.0 - p)
    M = alpha * np.eye(m) + (B * w2) @ B.T
    try:
        factor = scipy.linalg.cho_factor(M, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("inner matrix alpha I + B W^2 B^T failed") from exc

    def apply(v: np.ndarray) -> np.ndarray:
        t = B @ (w2 * v)
        s = scipy.linalg.cho_solve(factor, t, check_finite=False)
        return w2 * v - w2 * (B.T @ s)

    return SymOperator(apply=apply, dim=B.shape[1])


def objective_J(z: np.ndarray, B: np.ndarray, gamma: float, p: float) -> float:
    """J(z) = ||B z||^2 / ||z||^2 + gamma * sum |z_i|^p."""
    z = np.asarray(z, dtype=float)
    nsq = float(z @ z)
    if nsq == 0.0:
        raise InvalidParam("objective undefined at z = 0")
    Bz = B @ z
    return float(Bz @ Bz) / nsq + gamma * float(np.sum(np.abs(z) ** p))


def extract_x(z: np.ndarray, scale_ratio: float = 1.0) -> np.ndarray:
    """Recover x from the homogeneous solution: x = scale_ratio * z[1:] / z[0]."""
    z = np.asarray(z, dtype=float)
    if abs(z[0]) < 1e-12:
        raise DegenerateSolution("leading component of z is numerically zero")
    return scale_ratio * z[1:] / z[0]


def initial_z(A: np.ndarray, y: np.ndarray, scale_ratio: float = 1.0) -> np.ndarray:
    """Normalized starting point [1; x0 / scale_ratio] with x0 minimum-norm."""
    x0 = min_norm_solution(A, y)
    z = np.concatenate(([1.0], x0 / scale_ratio))
    return z / np.linalg.norm(z)


def tls_focuss(
    system: AugmentedSystem,
    params: SolverParams,
    z0: np.ndarray | None = None,
) -> SolveResult:
    """Run the TLS-FOCUSS iteration on a prepared augmented system."""
    gamma, alpha = params.gamma, params.alpha
    if alpha <= 0:
        raise InvalidParam("TLS-FOCUSS needs alpha > 0; pass a positive sigma1")
    B = system.B
    d = B.shape[1]
    with _Stopwatch() as sw:
        if z0 is None:
            z = initial_z(system.A, system.y, system.scale_ratio)
        else:
            z = np.asarray(z0, dtype=float)
            z = z / np.linalg.norm(z)
        trace = []
        converged = False
        k = 0
        value = 0.0
        for k in range(1, params.max_iter + 1):
            op = phi_operator(B, z, alpha, params.p)
            pair = dominant_eigenpair(op, tol=params.eig_tol, max_iter=10 * d, v0=z)
            z_new = pair.vector
            if z_new @ z < 0:  # keep the iterate on the same half-sphere
                z_new = -z_new
            value = pair.value
            trace.append(objective_J(z_new, B, gamma, params.p))
            rel = relative_change_sq(z_new, z)
            z = z_new
            if rel < params.epsilon:
                converged = True
                break
        x = extract_x(z, system.scale_ratio)
    diag = {"phi_eigenvalue": value, "lagrange_multiplier": alpha / value if value else np.inf}
    return SolveResult(x, k, trace, converged, sw.elapsed, z=z, diagnostics=diag)
