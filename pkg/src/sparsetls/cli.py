"""Command-line interface: solve single instances, run benchmark sweeps,
and emit plot-ready curve files.

Exit codes: 0 success, 2 user/input error, 3 solver degeneracy, 4 internal
error.
"""

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, baseline, sd, tls
from .errors import DegenerateSolution, InvalidParam, SparseTlsError
from .experiments import (
    PRNG_ID,
    SIGMA_FLOOR,
    SummaryRow,
    TrialConfig,
    run_monte_carlo,
)
from .params import SolverParams

DEFAULT_SEED = 12345

SUMMARY_HEADER = "algorithm,snr_db,L,trials,successes,success_rate,rmse,relative_mse,mean_time_s"


class UserError(Exception):
    """Input problem attributable to the user; maps to exit code 2."""


def read_matrix_csv(path: str) -> np.ndarray:
    """Parse a headerless row-major CSV matrix, reporting file and line on error."""
    rows = []
    width = None
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UserError(f"{path}: {exc.strerror or exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        fields = line.split(",")
        try:
            row = [float(f) for f in fields]
        except ValueError:
            raise UserError(f"{path}: line {lineno}: not a numeric row: {line!r}")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise UserError(
                f"{path}: line {lineno}: expected {width} fields, got {len(row)}"
            )
        rows.append(row)
    if not rows:
        raise UserError(f"{path}: empty matrix")
    return np.array(rows)


def write_matrix_csv(path: Path, M: np.ndarray) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float).T).T
    with open(path, "w") as fh:
        for row in M:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(float(v))


def write_summary_csv(path: Path, rows: list[SummaryRow]) -> None:
    with open(path, "w") as fh:
        fh.write(SUMMARY_HEADER + "\n")
        for r in rows:
            fh.write(
                ",".join(
                    [
                        r.algorithm,
                        _fmt(r.snr_db),
                        str(r.L),
                        str(r.trials),
                        str(r.successes),
                        _fmt(r.success_rate),
                        _fmt(r.rmse),
                        _fmt(r.relative_mse),
                        f"{r.mean_time_s:.6f}",
                    ]
                )
                + "\n"
            )


def parse_config(path: str) -> dict:
    """Flat `key = value` config; lists are comma-separated."""
    cfg = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UserError(f"{path}: {exc.strerror or exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UserError(f"{path}: line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        cfg[key.strip()] = value.strip()
    return cfg


def _get_int(cfg, key, default=None):
    if key not in cfg:
        if default is None:
            raise UserError(f"config: missing required key {key!r}")
        return default
    try:
        return int(cfg[key])
    except ValueError:
        raise UserError(f"config: {key} must be an integer, got {cfg[key]!r}")


def _get_float(cfg, key, default):
    if key not in cfg:
        return default
    try:
        return float(cfg[key])
    except ValueError:
        raise UserError(f"config: {key} must be a number, got {cfg[key]!r}")


def _get_list(cfg, key, default, conv=str):
    if key not in cfg:
        return default
    try:
        return [conv(v.strip()) for v in cfg[key].split(",") if v.strip()]
    except ValueError:
        raise UserError(f"config: cannot parse list {key} = {cfg[key]!r}")


def build_trial_configs(cfg: dict, seed: int | None) -> list[TrialConfig]:
    m = _get_int(cfg, "m")
    n = _get_int(cfg, "n")
    s = _get_int(cfg, "s")
    trials = _get_int(cfg, "trials", 100)
    snrs = _get_list(cfg, "snr_db", [15.0], float)
    Ls = _get_list(cfg, "L", [1], int)
    algorithms = tuple(_get_list(cfg, "algorithms", ["tls-focuss"]))
    mode = cfg.get("amplitude_mode", "gaussian")
    amplitudes = cfg.get("amplitudes")
    if amplitudes is not None:
        amplitudes = tuple(float(v) for v in amplitudes.split(","))
    if seed is None:
        seed = _get_int(cfg, "seed", DEFAULT_SEED)
    out = []
    for L in Ls:
        for snr in snrs:
            try:
                out.append(
                    TrialConfig(
                        m=m,
                        n=n,
                        s=s,
                        snr_db=snr,
                        L=L,
                        amplitude_mode=mode,
                        amplitudes=amplitudes,
                        p=_get_float(cfg, "p", 0.5),
                        epsilon=_get_float(cfg, "epsilon", 0.01),
                        max_iter=_get_int(cfg, "max_iter", 100),
                        algorithms=algorithms,
                        seed=seed,
                        trials=trials,
                    )
                )
            except InvalidParam as exc:
                raise UserError(f"config: {exc}")
    return out


def cmd_solve(args) -> int:
    A = read_matrix_csv(args.dictionary)
    y = read_matrix_csv(args.measurements)
    if y.shape[1] == 1:
        y = y[:, 0]
    if A.shape[0] != y.shape[0]:
        raise UserError(
            f"{args.measurements}: has {y.shape[0]} rows but dictionary has {A.shape[0]}"
        )
    sigma1 = args.sigma1
    if sigma1 is None:
        sigma1 = max(10.0 ** (-args.snr_db / 20.0), SIGMA_FLOOR) if args.snr_db is not None else SIGMA_FLOOR
    sigma2 = args.sigma2 if args.sigma2 is not None else sigma1
    try:
        params = SolverParams(
            p=args.p,
            sigma1=sigma1,
            sigma2=sigma2,
            epsilon=args.epsilon,
            max_iter=args.max_iter,
        )
    except InvalidParam as exc:
        raise UserError(str(exc))

    name = args.algorithm
    if name == "tls-focuss":
        system = tls.build_augmented(A, y, params.sigma1, params.sigma2)
        result = tls.tls_focuss(system, params)
    elif name == "sd-focuss":
        result = sd.sd_focuss(A, y, params)
    elif name == "reg-focuss":
        result = baseline.regularized_focuss(A, y, params)
    elif name == "focuss":
        result = baseline.standard_focuss(A, y, params)
    else:
        raise UserError(f"unknown algorithm {name!r}")

    out = Path(args.output)
    write_matrix_csv(out, result.x_hat)
    meta = {
        "algorithm": name,
        "iterations": result.iterations,
        "converged": result.converged,
        "objective_trace": result.objective_trace,
        "wall_time_s": result.wall_time,
        "p": params.p,
        "sigma1": params.sigma1,
        "sigma2": params.sigma2,
        "version": __version__,
    }
    meta_path = out.with_name(out.name + ".meta.json")
    meta_path.write_text(json.dumps(meta, indent=2) + "\n")
    print(f"wrote {out} and {meta_path}")
    return 0


def cmd_bench(args) -> int:
    cfg = parse_config(args.config)
    configs = build_trial_configs(cfg, args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = run_monte_carlo(configs, threads=args.threads)
    summary_path = out_dir / "summary.csv"
    write_summary_csv(summary_path, summary.rows)
    manifest = {
        "version": __version__,
        "prng": PRNG_ID,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "config": {
            "m": configs[0].m,
            "n": configs[0].n,
            "s": configs[0].s,
            "trials": configs[0].trials,
            "p": configs[0].p,
            "epsilon": configs[0].epsilon,
            "max_iter": configs[0].max_iter,
            "amplitude_mode": configs[0].amplitude_mode,
            "amplitudes": configs[0].amplitudes,
            "algorithms": list(configs[0].algorithms),
            "snr_db": sorted({c.snr_db for c in configs}),
            "L": sorted({c.L for c in configs}),
            "seed": configs[0].seed,
        },
        "outputs": ["summary.csv", "manifest.json"],
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {summary_path}")
    return 0


def cmd_plot_data(args) -> int:
    metrics = ("success_rate", "rmse", "relative_mse", "mean_time_s")
    if args.metric not in metrics:
        raise UserError(f"unknown metric {args.metric!r}; choose from {metrics}")
    try:
        lines = Path(args.summary).read_text().splitlines()
    except OSError as exc:
        raise UserError(f"{args.summary}: {exc.strerror or exc}") from exc
    if not lines or lines[0] != SUMMARY_HEADER:
        raise UserError(f"{args.summary}: not a summary CSV (bad header)")
    header = lines[0].split(",")
    idx = {name: i for i, name in enumerate(header)}
    curves: dict[tuple[str, str], list[tuple[str, str]]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != len(header):
            raise UserError(f"{args.summary}: line {lineno}: malformed row")
        key = (fields[idx["algorithm"]], fields[idx["L"]])
        value = fields[idx[args.metric]]
        curves.setdefault(key, []).append((fields[idx["snr_db"]], value))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for (alg, L), points in curves.items():
        path = out_dir / f"curve_{alg}_L{L}_{args.metric}.csv"
        kept = [(x, v) for x, v in points if v != ""]
        if not kept:
            print(
                f"warning: no data for metric {args.metric} on curve ({alg}, L={L})",
                file=sys.stderr,
            )
        with open(path, "w") as fh:
            for x, v in kept:
                fh.write(f"{x},{v}\n")
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsetls",
        description="Sparse recovery with perturbed dictionaries: solvers and benchmarks.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="recover a sparse signal from CSV inputs")
    p_solve.add_argument("--dictionary", required=True, help="CSV file with the m x n dictionary")
    p_solve.add_argument("--measurements", required=True, help="CSV file with y (one value per line)")
    p_solve.add_argument("--algorithm", default="tls-focuss",
                         choices=["tls-focuss", "sd-focuss", "reg-focuss", "focuss"])
    p_solve.add_argument("--p", type=float, default=0.5)
    p_solve.add_argument("--snr-db", type=float, default=None)
    p_solve.add_argument("--sigma1", type=float, default=None)
    p_solve.add_argument("--sigma2", type=float, default=None)
    p_solve.add_argument("--epsilon", type=float, default=0.01)
    p_solve.add_argument("--max-iter", type=int, default=100)
    p_solve.add_argument("--output", required=True)
    p_solve.set_defaults(func=cmd_solve)

    for name, help_text in (
        ("bench", "run a Monte Carlo benchmark sweep"),
        ("mmv-bench", "alias of bench for multi-measurement configs"),
    ):
        p_bench = sub.add_parser(name, help=help_text)
        p_bench.add_argument("config", help="flat key = value config file")
        p_bench.add_argument("--out-dir", default="bench-out")
        p_bench.add_argument("--threads", type=int, default=1)
        p_bench.add_argument("--seed", type=int, default=None,
                             help="override the config seed (default: config value or 12345)")
        p_bench.set_defaults(func=cmd_bench)

    p_plot = sub.add_parser("plot-data", help="emit per-curve two-column files")
    p_plot.add_argument("summary", help="summary CSV from bench")
    p_plot.add_argument("--metric", default="success_rate")
    p_plot.add_argument("--out", default="curves")
    p_plot.set_defaults(func=cmd_plot_data)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegenerateSolution as exc:
        print(f"solver degeneracy: {exc}", file=sys.stderr)
        return 3
    except SparseTlsError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
