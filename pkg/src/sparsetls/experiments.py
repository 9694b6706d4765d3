"""Seedable problem generation, recovery metrics and the Monte Carlo harness.

Reproducibility contract: every trial draws from a fresh PCG64 generator
seeded with SeedSequence(master_seed, spawn_key=(trial_index,)).  Results are
therefore independent of thread count and trial scheduling; the generator is
identified as ``numpy-pcg64-seedseq-v1`` in run metadata.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import baseline, sd, tls
from .errors import (
    DegenerateSolution,
    InvalidParam,
    NonConvergence,
    NotPositiveDefinite,
    RankDeficient,
    SparseTlsError,
)
from .params import SolverParams

PRNG_ID = "numpy-pcg64-seedseq-v1"

# Floor applied to the solver-side noise std so alpha stays positive in
# noise-free experiments.
SIGMA_FLOOR = 1e-6

SMV_ALGORITHMS = ("focuss", "reg-focuss", "tls-focuss", "sd-focuss", "omp")
MMV_ALGORITHMS = ("focuss", "reg-focuss", "sd-focuss", "omp")


@dataclass(frozen=True)
class ProblemInstance:
    """Ground-truth bundle for one trial: y = (A + E) x_true + e."""

    A: np.ndarray
    E: np.ndarray
    e: np.ndarray
    x_true: np.ndarray  # (n,) for L=1, else (n, L)
    support: np.ndarray
    y: np.ndarray  # (m,) for L=1, else (m, L)
    sigma: float


@dataclass(frozen=True)
class TrialConfig:
    m: int
    n: int
    s: int
    snr_db: float
    L: int = 1
    amplitude_mode: str = "gaussian"  # gaussian | constant | explicit
    amplitudes: tuple[float, ...] | None = None
    p: float = 0.5
    epsilon: float = 0.01
    max_iter: int = 100
    algorithms: tuple[str, ...] = ("tls-focuss",)
    seed: int = 12345
    trials: int = 1

    def __post_init__(self):
        if not (0 < self.s <= self.m < self.n):
            raise InvalidParam(f"need 0 < s <= m < n, got s={self.s} m={self.m} n={self.n}")
        if self.L < 1:
            raise InvalidParam("L must be >= 1")
        if self.trials < 1:
            raise InvalidParam("trials must be >= 1")
        if not (math.isfinite(self.snr_db) or self.snr_db == math.inf):
            raise InvalidParam("snr_db must be finite or +inf (noise-free)")
        if self.amplitude_mode not in ("gaussian", "constant", "explicit"):
            raise InvalidParam(f"unknown amplitude mode {self.amplitude_mode!r}")
        if self.amplitude_mode == "explicit":
            if self.amplitudes is None or len(self.amplitudes) != self.s:
                raise InvalidParam("explicit mode needs exactly s amplitudes")
        pool = MMV_ALGORITHMS if self.L > 1 else SMV_ALGORITHMS
        for a in self.algorithms:
            if a not in pool:
                raise InvalidParam(f"unknown algorithm {a!r} for L={self.L}")

    @property
    def sigma(self) -> float:
        return 0.0 if self.snr_db == math.inf else 10.0 ** (-self.snr_db / 20.0)

    def solver_params(self) -> SolverParams:
        s = max(self.sigma, SIGMA_FLOOR)
        return SolverParams(
            p=self.p, sigma1=s, sigma2=s, epsilon=self.epsilon, max_iter=self.max_iter
        )


def _trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial_index,)))


def generate_problem(cfg: TrialConfig, trial_index: int) -> ProblemInstance:
    """Draw one problem instance, deterministic in (cfg.seed, trial_index).

    Draw order is fixed: dictionary, support, amplitudes, E, e.
    """
    rng = _trial_rng(cfg.seed, trial_index)
    m, n, s, L = cfg.m, cfg.n, cfg.s, cfg.L
    A = rng.standard_normal((m, n))
    support = np.sort(rng.choice(n, size=s, replace=False))

    X = np.zeros((n, L))
    if cfg.amplitude_mode == "explicit":
        X[support, :] = np.asarray(cfg.amplitudes, dtype=float)[:, None]
    else:
        if cfg.amplitude_mode == "constant":
            amps = np.ones((s, L))
        else:
            amps = rng.standard_normal((s, L))
        # unit signal power per measurement vector
        amps /= np.linalg.norm(amps, axis=0)
        X[support, :] = amps

    sigma = cfg.sigma
    if sigma > 0:
        E = sigma * rng.standard_normal((m, n))
        e = sigma * rng.standard_normal((m, L))
    else:
        E = np.zeros((m, n))
        e = np.zeros((m, L))
    Y = (A + E) @ X + e

    if L == 1:
        return ProblemInstance(A, E, e[:, 0], X[:, 0], support, Y[:, 0], sigma)
    return ProblemInstance(A, E, e, X, support, Y, sigma)


def detect_support(x_hat: np.ndarray, s: int) -> np.ndarray:
    """Indices of the s largest-magnitude entries (rows for MMV).

    Ties break toward the lowest index via a stable sort.
    """
    x_hat = np.asarray(x_hat)
    mags = np.linalg.norm(x_hat, axis=1) if x_hat.ndim == 2 else np.abs(x_hat)
    order = np.argsort(-mags, kind="stable")
    return np.sort(order[:s])


def support_success(x_hat: np.ndarray, support: np.ndarray, s: int) -> bool:
    """True iff the top-s entries of x_hat sit exactly on the true support."""
    return bool(np.array_equal(detect_support(x_hat, s), np.sort(np.asarray(support))))


def amplitude_rmse(
    x_hat: np.ndarray,
    x_true: np.ndarray,
    support: np.ndarray,
    refit: bool = False,
    A: np.ndarray | None = None,
    y: np.ndarray | None = None,
) -> float:
    """RMSE of amplitudes over the support entries.

    With refit=True the amplitudes are re-estimated by least squares on the
    detected support against (A, y) before scoring; the default scores the
    raw solver amplitudes.
    """
    support = np.asarray(support)
    est = np.asarray(x_hat, dtype=float)
    if refit:
        if A is None or y is None:
            raise InvalidParam("refit=True needs A and y")
        coef, *_ = np.linalg.lstsq(A[:, support], y, rcond=None)
        est = np.zeros_like(est)
        est[support] = coef
    diff = est[support] - np.asarray(x_true, dtype=float)[support]
    return float(np.sqrt(np.mean(diff**2)))


def relative_mse(X_hat: np.ndarray, X_true: np.ndarray) -> float:
    """Single-trial relative MSE ||X_hat - X_true||_F^2 / ||X_true||_F^2."""
    X_hat = np.asarray(X_hat, dtype=float)
    X_true = np.asarray(X_true, dtype=float)
    if X_hat.shape != X_true.shape:
        raise InvalidParam(f"shape mismatch {X_hat.shape} vs {X_true.shape}")
    den = float(np.sum(X_true**2))
    if den == 0.0:
        raise InvalidParam("relative MSE undefined for zero X_true")
    return float(np.sum((X_hat - X_true) ** 2)) / den


def run_algorithm(name: str, inst: ProblemInstance, cfg: TrialConfig) -> np.ndarray:
    """Dispatch one solver on one instance; returns the recovered signal."""
    params = cfg.solver_params()
    if cfg.L == 1:
        if name == "focuss":
            return baseline.standard_focuss(inst.A, inst.y, params).x_hat
        if name == "reg-focuss":
            return baseline.regularized_focuss(inst.A, inst.y, params).x_hat
        if name == "sd-focuss":
            return sd.sd_focuss(inst.A, inst.y, params).x_hat
        if name == "tls-focuss":
            system = tls.build_augmented(inst.A, inst.y, params.sigma1, params.sigma2)
            return tls.tls_focuss(system, params).x_hat
        if name == "omp":
            return baseline.omp(inst.A, inst.y, cfg.s)[0]
    else:
        if name == "focuss":
            return baseline.mmv_focuss(inst.A, inst.y, params).x_hat
        if name == "reg-focuss":
            return baseline.mmv_regularized_focuss(inst.A, inst.y, params).x_hat
        if name == "sd-focuss":
            return sd.mmv_sd_focuss(inst.A, inst.y, params).x_hat
        if name == "omp":
            return baseline.somp(inst.A, inst.y, cfg.s)[0]
    raise InvalidParam(f"unknown algorithm {name!r} for L={cfg.L}")


@dataclass
class SummaryRow:
    algorithm: str
    snr_db: float
    L: int
    trials: int
    successes: int
    success_rate: float
    rmse: float | None  # SMV, successful trials only
    relative_mse: float | None  # MMV, all completed trials
    mean_time_s: float
    failures: int = 0  # trials where the solver raised


@dataclass
class ExperimentSummary:
    rows: list[SummaryRow] = field(default_factory=list)


_RECOVERABLE = (
    DegenerateSolution,
    NonConvergence,
    NotPositiveDefinite,
    RankDeficient,
)


def _run_trial(cfg: TrialConfig, trial_index: int) -> dict:
    inst = generate_problem(cfg, trial_index)
    out = {}
    for name in cfg.algorithms:
        t0 = time.perf_counter()
        try:
            x_hat = run_algorithm(name, inst, cfg)
        except _RECOVERABLE:
            out[name] = {"error": True, "time": time.perf_counter() - t0}
            continue
        elapsed = time.perf_counter() - t0
        rec = {"error": False, "time": elapsed}
        rec["success"] = support_success(x_hat, inst.support, cfg.s)
        if cfg.L == 1:
            if rec["success"]:
                rec["rmse_sq"] = amplitude_rmse(x_hat, inst.x_true, inst.support) ** 2
        else:
            rec["rel_mse"] = relative_mse(x_hat, inst.x_true)
        out[name] = rec
    return out


def run_monte_carlo(configs: list[TrialConfig], threads: int = 1) -> ExperimentSummary:
    """Run every config; per-trial failures are recorded, never fatal.

    Output content is deterministic given the seeds (timings excepted) and
    independent of ``threads``.
    """
    summary = ExperimentSummary()
    for cfg in configs:
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                records = list(pool.map(lambda i: _run_trial(cfg, i), range(cfg.trials)))
        else:
            records = [_run_trial(cfg, i) for i in range(cfg.trials)]
        for name in cfg.algorithms:
            recs = [r[name] for r in records]
            ok = [r for r in recs if not r["error"]]
            successes = sum(1 for r in ok if r.get("success"))
            rmse = None
            rel = None
            if cfg.L == 1:
                sq = [r["rmse_sq"] for r in ok if "rmse_sq" in r]
                if sq:
                    rmse = float(np.sqrt(np.mean(sq)))
            else:
                rels = [r["rel_mse"] for r in ok]
                if rels:
                    rel = float(np.mean(rels))
            summary.rows.append(
                SummaryRow(
                    algorithm=name,
                    snr_db=cfg.snr_db,
                    L=cfg.L,
                    trials=cfg.trials,
                    successes=successes,
                    success_rate=successes / cfg.trials,
                    rmse=rmse,
                    relative_mse=rel,
                    mean_time_s=float(np.mean([r["time"] for r in recs])),
                    failures=len(recs) - len(ok),
                )
            )
    return summary
