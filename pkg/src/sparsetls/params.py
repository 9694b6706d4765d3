"""Solver parameter bundle and the Bayesian gamma/alpha derivation."""

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import InvalidParam


def derive_gamma_alpha(sigma: float, p: float) -> tuple[float, float]:
    """Map a noise std and norm factor to the (gamma, alpha) pair.

    beta = 2^{-p/2} Gamma(1/p) / Gamma(3/p), gamma = sigma^2 / beta^p,
    alpha = p * gamma / 2.
    """
    if not (0.0 < p <= 1.0):
        raise InvalidParam(f"p must lie in (0, 1], got {p}")
    if sigma < 0:
        raise InvalidParam(f"sigma must be >= 0, got {sigma}")
    beta = 2.0 ** (-p / 2.0) * gamma_fn(1.0 / p) / gamma_fn(3.0 / p)
    g = sigma**2 / beta**p
    return g, p * g / 2.0


@dataclass
class SolverParams:
    """Shared configuration for the FOCUSS-family solvers.

    sigma1 is the measurement-noise std, sigma2 the dictionary-noise std.
    gamma and alpha are derived from sigma1 and p; inner_tol bounds the
    eigen/linear solves inside TLS-FOCUSS and defaults to epsilon / 100.
    """

    p: float = 0.5
    sigma1: float = 0.0
    sigma2: float = 0.0
    epsilon: float = 0.01
    max_iter: int = 100
    inner_tol: float | None = None

    def __post_init__(self):
        if not (0.0 < self.p <= 1.0):
            raise InvalidParam(f"p must lie in (0, 1], got {self.p}")
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise InvalidParam("noise stds must be non-negative")
        if self.epsilon <= 0:
            raise InvalidParam("epsilon must be positive")
        if self.max_iter < 1:
            raise InvalidParam("max_iter must be >= 1")
        if self.inner_tol is not None and self.inner_tol <= 0:
            raise InvalidParam("inner_tol must be positive")

    @property
    def gamma(self) -> float:
        return derive_gamma_alpha(self.sigma1, self.p)[0]

    @property
    def alpha(self) -> float:
        return derive_gamma_alpha(self.sigma1, self.p)[1]

    @property
    def eig_tol(self) -> float:
        return self.inner_tol if self.inner_tol is not None else self.epsilon / 100.0


@dataclass
class SolveResult:
    """Outcome of one solver run.

    x_hat is length n for SMV solvers and n x L for the MMV ones.
    objective_trace holds the solver's objective at each iterate.
    """

    x_hat: np.ndarray
    iterations: int
    objective_trace: list[float]
    converged: bool
    wall_time: float
    z: np.ndarray | None = None
    E_hat: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)


class _Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False


def relative_change_sq(new: np.ndarray, old: np.ndarray) -> float:
    """||new - old||^2 / ||old||^2 with the 0/0 case counted as converged."""
    num = float(np.linalg.norm(new - old) ** 2)
    den = float(np.linalg.norm(old) ** 2)
    if den == 0.0:
        return 0.0 if num == 0.0 else np.inf
    return num / den
