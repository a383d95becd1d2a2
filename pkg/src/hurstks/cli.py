"""Command line interface: simulate, estimate, analyze, bench.

Exit codes: 0 on success, 1 for input problems (bad flags, missing or
malformed files), 2 for numerical failures (degenerate samples,
embedding errors).
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import logging
import sys

import numpy as np

from hurstks.fgn import EmbeddingError, FgnSpec, Path, increments, simulate_fbm
from hurstks.ksdist import RescaledPair
from hurstks.minimize import (
    METHODS,
    OptimizerConfig,
    bench_optimizers,
    estimate_hurst,
    write_bench_csv,
)
from hurstks.permute import SCHEMES, DegenerateSampleError, PermutationPlan
from hurstks.pipeline import (
    CsvFormatError,
    RunManifest,
    WindowConfig,
    load_series,
    parse_manifest,
    run_static_analysis,
)
from hurstks.stats import VarianceInputs, confidence_interval

__all__ = ["main"]


def _add_optimizer_flags(p: argparse.ArgumentParser, default_method: str = "brent") -> None:
    p.add_argument("--optimizer", choices=METHODS, default=default_method)
    p.add_argument("--grid-step", type=float, default=1e-4)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--max-evals", type=int, default=10_000)


def _add_permutation_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--perm-scheme", choices=SCHEMES, default="uniform_sample")
    p.add_argument("--block-length", type=int, default=128)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hurstks",
        description="Scaling-exponent estimation from rescaled increment distributions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="write a simulated fractional Brownian path as CSV")
    sim.add_argument("--hurst", type=float, required=True)
    sim.add_argument("--length", type=int, required=True)
    sim.add_argument("--scale", type=float, default=1.0)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--start-date", type=dt.date.fromisoformat, default=dt.date(2000, 1, 3))
    sim.add_argument("--out", required=True)

    est = sub.add_parser("estimate", help="estimate the exponent of one series")
    est.add_argument("--input", required=True)
    est.add_argument(
        "--input-scale",
        choices=("level", "log"),
        default="log",
        help="'log' (default) reads values as already log-scale, e.g. simulated paths; "
        "use 'level' for positive volatility levels",
    )
    est.add_argument("--amax", type=int, default=50)
    est.add_argument("--subseq", type=int, default=None)
    est.add_argument("--alpha", type=float, default=0.05)
    est.add_argument("--seed", type=int, default=0)
    _add_optimizer_flags(est)
    _add_permutation_flags(est)

    ana = sub.add_parser("analyze", help="windowed analysis of one or two series")
    ana.add_argument("--manifest", help="flat key=value manifest file (overrides other flags)")
    ana.add_argument("--input")
    ana.add_argument("--input2")
    ana.add_argument("--input-scale", choices=("level", "log"), default="level")
    ana.add_argument("--window", type=int, default=1512)
    ana.add_argument("--amax", type=int, default=21)
    ana.add_argument("--subseq", type=int, default=None)
    ana.add_argument("--alpha", type=float, default=0.05)
    ana.add_argument("--seed", type=int, default=0)
    ana.add_argument("--out-dir", default=".")
    _add_optimizer_flags(ana)
    _add_permutation_flags(ana)

    ben = sub.add_parser("bench", help="benchmark the minimizers on simulated paths")
    ben.add_argument("--h-list", default="0.2,0.4,0.6,0.8")
    ben.add_argument("--reps", type=int, default=10)
    ben.add_argument("--methods", default="grid,brent,nelder_mead,simulated_annealing")
    ben.add_argument("--length", type=int, default=4097)
    ben.add_argument("--amax", type=int, default=50)
    ben.add_argument("--subseq", type=int, default=500)
    ben.add_argument("--seed", type=int, default=0)
    ben.add_argument("--grid-step", type=float, default=1e-4)
    ben.add_argument("--tolerance", type=float, default=1e-6)
    ben.add_argument("--max-evals", type=int, default=10_000)
    ben.add_argument("--out", required=True)

    return parser


def _cmd_simulate(args: argparse.Namespace) -> int:
    spec = FgnSpec(hurst=args.hurst, length=args.length, scale=args.scale, seed=args.seed)
    path = simulate_fbm(spec)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "value"])
        day = args.start_date
        one = dt.timedelta(days=1)
        for value in path.values:
            writer.writerow([day.isoformat(), repr(float(value))])
            day += one
    print(f"wrote {len(path)} points to {args.out}")
    return 0


def _cmd_estimate(args: argparse.Namespace) -> int:
    records = load_series(args.input, value_scale=args.input_scale)
    if len(records) < 2:
        raise CsvFormatError(f"{args.input}: fewer than two usable rows")
    values = np.array([r.value for r in records])
    path = Path(np.log(values)) if args.input_scale == "level" else Path(values)
    if len(path) <= args.amax:
        raise CsvFormatError(f"{args.input}: series shorter than the coarse lag")
    pair = RescaledPair(
        fine=increments(path, 1), coarse=increments(path, args.amax), a_max=args.amax
    )
    subseq = args.subseq if args.subseq is not None else len(pair.coarse)
    plan = PermutationPlan(
        scheme=args.perm_scheme,
        block_length=args.block_length,
        subsample_size=subseq if args.perm_scheme == "uniform_sample" else None,
        seed=args.seed,
    )
    config = OptimizerConfig(
        method=args.optimizer,
        grid_step=args.grid_step,
        tolerance=args.tolerance,
        max_evals=args.max_evals,
    )
    result = estimate_hurst(pair, plan, config, alpha=args.alpha)
    ci = confidence_interval(
        result.h_hat,
        VarianceInputs(a_max=result.a_max, n=result.n, m=result.m),
        args.alpha,
    )
    print(f"h_hat = {result.h_hat:.6f}")
    print(f"delta_min = {result.delta_min:.6f}")
    print(f"critical = {result.critical_value:.6f} (alpha = {result.alpha})")
    print(f"significant = {'true' if result.significant else 'false'}")
    print(f"ci = [{ci[0]:.6f}, {ci[1]:.6f}]")
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    if args.manifest:
        manifest = parse_manifest(args.manifest)
    else:
        if not args.input:
            raise CsvFormatError("analyze needs --manifest or --input")
        inputs = (args.input,) if not args.input2 else (args.input, args.input2)
        manifest = RunManifest(
            inputs=inputs,
            window=WindowConfig(
                window_length=args.window,
                a_max=args.amax,
                subseq=args.subseq,
                alpha=args.alpha,
            ),
            optimizer=OptimizerConfig(
                method=args.optimizer,
                grid_step=args.grid_step,
                tolerance=args.tolerance,
                max_evals=args.max_evals,
            ),
            perm_scheme=args.perm_scheme,
            block_length=args.block_length,
            input_scale=args.input_scale,
            master_seed=args.seed,
            out_dir=args.out_dir,
        )
    report = run_static_analysis(manifest)
    for rep in report.series:
        print(f"{rep.input}: {rep.n_windows} windows (remainder {rep.remainder})")
        for row in rep.windows:
            res = row.result
            print(
                f"  window {row.window_index} [{row.start_date} .. {row.end_date}]: "
                f"h_hat = {res.h_hat:.4f}, delta_min = {res.delta_min:.4f}, "
                f"{'fits' if res.significant else 'does not fit'} at alpha = {res.alpha}"
            )
        if rep.aggregate is not None:
            agg = rep.aggregate
            print(
                f"  mean h = {agg.mean_h:.4f}; constancy chi2({agg.chi2_df}) = "
                f"{agg.chi2_stat:.4f}, p = {agg.chi2_p:.4f}"
            )
    if report.z_stat is not None:
        print(f"z = {report.z_stat:.4f}, one-sided p = {report.z_p:.4f}")
    print(f"wrote report.json and windows.csv to {manifest.out_dir}")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    try:
        h_values = [float(tok) for tok in args.h_list.split(",") if tok.strip()]
        methods = [tok.strip() for tok in args.methods.split(",") if tok.strip()]
    except ValueError:
        raise CsvFormatError("bad --h-list") from None
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise CsvFormatError(f"unknown methods: {unknown}")
    configs = [
        OptimizerConfig(
            method=m,
            grid_step=args.grid_step,
            tolerance=args.tolerance,
            max_evals=args.max_evals,
        )
        for m in methods
    ]
    rows = bench_optimizers(
        h_values,
        args.reps,
        configs,
        length=args.length,
        a_max=args.amax,
        subsample=args.subseq,
        base_seed=args.seed,
    )
    write_bench_csv(rows, args.out)
    failures = sum(1 for r in rows if r.error)
    print(f"wrote {len(rows)} rows to {args.out} ({failures} failures)")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "analyze": _cmd_analyze,
    "bench": _cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors; fold the
        # latter into the input-error code.
        return 0 if exc.code == 0 else 1
    try:
        return _COMMANDS[args.command](args)
    except (DegenerateSampleError, EmbeddingError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CsvFormatError, FileNotFoundError, IsADirectoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
