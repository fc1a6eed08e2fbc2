"""Command-line front end: hubreg, hubniht, denoise and bench subcommands.

Exit codes: 0 on success, 1 on data/format/usage errors, 2 on solver errors
(rank deficiency, degenerate scale). All numeric output uses '.' decimals
regardless of locale.
"""

import argparse
import sys

import numpy as np

from . import bench as bench_mod
from .denoise import (
    GrayImage,
    PatchGrid,
    add_impulsive_noise,
    build_dictionary,
    denoise_image,
    psnr,
    read_pgm,
    write_pgm,
)
from .hubniht import SparseProblem, fit_sparse
from .hubreg import DegenerateScaleError, RegressionProblem, SolverConfig, fit
from .linalg import RankDeficientError
from .loss import HuberKernel


class CliDataError(Exception):
    """Bad input data, file format, or command-line usage."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliDataError(f"{self.prog}: {message}")


def _fmt(value):
    return repr(float(value))


def _read_design_csv(path):
    """Load a regression CSV: first column y, remaining columns X."""
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2)
    except OSError as exc:
        raise CliDataError(f"cannot read data file {path}: {exc}") from exc
    except ValueError as exc:
        raise CliDataError(f"data file {path} is not numeric CSV: {exc}") from exc
    if data.shape[1] < 2:
        raise CliDataError(f"data file {path} needs y plus at least one predictor column")
    return data[:, 0], data[:, 1:]


def _solver_config(args, adaptive=True):
    return SolverConfig(
        kernel=HuberKernel(args.c),
        tol=getattr(args, "tol", 1e-6),
        max_iter=getattr(args, "max_iter", 500),
        adaptive_steps=adaptive,
        record_trace=bool(getattr(args, "trace", None)),
    )


def _cmd_hubreg(args):
    y, X = _read_design_csv(args.data)
    try:
        prob = RegressionProblem(y=y, X=X, intercept=args.intercept)
    except ValueError as exc:
        raise CliDataError(f"data file {args.data}: {exc}") from exc
    cfg = _solver_config(args, adaptive=not args.no_adaptive)
    result = fit(prob, cfg)
    print("name,value")
    for i, b in enumerate(result.beta):
        print(f"beta_{i},{_fmt(b)}")
    print(f"sigma,{_fmt(result.sigma)}")
    print(f"iterations,{result.iterations}")
    print(f"converged,{str(result.converged).lower()}")
    if args.trace:
        lines = ["iteration,criterion,scale_change,relative_step"]
        for i, rec in enumerate(result.trace or [], start=1):
            lines.append(
                f"{i},{_fmt(rec.criterion)},{_fmt(rec.scale_change)},{_fmt(rec.relative_step)}"
            )
        try:
            with open(args.trace, "w", encoding="ascii") as fh:
                fh.write("\n".join(lines) + "\n")
        except OSError as exc:
            raise CliDataError(f"cannot write trace file {args.trace}: {exc}") from exc
    return 0


def _cmd_hubniht(args):
    y, X = _read_design_csv(args.data)
    try:
        prob = SparseProblem(y=y, X=X, K=args.k, normalize_columns=not args.no_normalize)
    except ValueError as exc:
        raise CliDataError(f"data file {args.data}: {exc}") from exc
    cfg = _solver_config(args)
    model = fit_sparse(prob, cfg)
    print("index,value")
    for i in model.support:
        print(f"{i},{_fmt(model.beta[i])}")
    print(f"sigma,{_fmt(model.sigma)}")
    return 0


def _cmd_denoise(args):
    img = read_pgm(args.infile)
    if args.add_noise is not None:
        img = add_impulsive_noise(img, args.add_noise, args.seed)
    if args.dict:
        dictionary = build_dictionary(args.patch, kind="from-file", path=args.dict)
    else:
        dictionary = build_dictionary(args.patch)
    grid = PatchGrid(patch_size=args.patch, stride=args.stride)
    cfg = SolverConfig(kernel=HuberKernel(args.c))
    out = denoise_image(img, dictionary, grid, args.k, cfg)
    write_pgm(out, args.outfile)
    if args.report_psnr:
        clean = read_pgm(args.report_psnr)
        print(f"psnr_noisy_db,{_fmt(psnr(img, clean))}")
        print(f"psnr_denoised_db,{_fmt(psnr(out, clean))}")
    return 0


def _cmd_bench_fig1(args):
    cfg = bench_mod.ExperimentConfig(
        n_obs=args.n,
        n_coef=args.p,
        snr_db=args.snr_db,
        c=args.c,
        trials=args.trials,
        master_seed=args.seed,
    )
    summaries = bench_mod.run_experiment(cfg, progress=True)
    bench_mod.write_csv(summaries, args.out)
    return 0


def build_parser():
    parser = _Parser(prog="huberfit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_reg = sub.add_parser(
        "hubreg", help="robust joint regression/scale fit on a CSV (y first column)"
    )
    p_reg.add_argument("--data", required=True, help="CSV file: first column y, rest X")
    p_reg.add_argument("--c", type=float, default=1.345, help="Huber threshold")
    p_reg.add_argument("--intercept", action="store_true", help="prepend a ones column")
    p_reg.add_argument("--tol", type=float, default=1e-6, help="convergence tolerance")
    p_reg.add_argument("--max-iter", dest="max_iter", type=int, default=500)
    p_reg.add_argument("--no-adaptive", action="store_true", help="plain unit-step updates")
    p_reg.add_argument("--trace", help="write per-iteration diagnostics CSV here")
    p_reg.set_defaults(func=_cmd_hubreg)

    p_sp = sub.add_parser("hubniht", help="K-sparse robust fit on a CSV (y first column)")
    p_sp.add_argument("--data", required=True, help="CSV file: first column y, rest X")
    p_sp.add_argument("--k", required=True, type=int, help="sparsity budget")
    p_sp.add_argument("--c", type=float, default=1.345, help="Huber threshold")
    p_sp.add_argument(
        "--no-normalize", action="store_true", help="skip unit-norm column scaling"
    )
    p_sp.set_defaults(func=_cmd_hubniht)

    p_dn = sub.add_parser("denoise", help="patch-based PGM image denoising")
    p_dn.add_argument("--in", dest="infile", required=True, help="input PGM (P5 or P2)")
    p_dn.add_argument("--out", dest="outfile", required=True, help="output PGM (P5)")
    p_dn.add_argument("--k", type=int, default=6, help="sparsity budget per patch")
    p_dn.add_argument("--patch", type=int, default=8, help="patch side length")
    p_dn.add_argument("--stride", type=int, default=2, help="window step")
    p_dn.add_argument("--c", type=float, default=1.345, help="Huber threshold")
    p_dn.add_argument("--dict", help="load dictionary from file instead of the built-in")
    p_dn.add_argument(
        "--add-noise", dest="add_noise", type=float, help="impulsive noise probability"
    )
    p_dn.add_argument("--seed", type=int, default=0, help="noise seed")
    p_dn.add_argument(
        "--report-psnr",
        dest="report_psnr",
        help="clean reference PGM; prints noisy and denoised PSNR",
    )
    p_dn.set_defaults(func=_cmd_denoise)

    p_bench = sub.add_parser("bench", help="Monte-Carlo benchmarks")
    bench_sub = p_bench.add_subparsers(dest="benchmark", required=True)
    p_fig1 = bench_sub.add_parser(
        "fig1", help="contamination sweep: LSE/SD vs robust fit, CSV output"
    )
    p_fig1.add_argument("--trials", type=int, default=200)
    p_fig1.add_argument("--seed", type=int, default=42)
    p_fig1.add_argument("--out", default="results.csv")
    p_fig1.add_argument("--c", type=float, default=1.345)
    p_fig1.add_argument("--n", type=int, default=500)
    p_fig1.add_argument("--p", type=int, default=250)
    p_fig1.add_argument("--snr-db", dest="snr_db", type=float, default=20.0)
    p_fig1.set_defaults(func=_cmd_bench_fig1)

    return parser


def main(argv=None):
    """Run the CLI; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (RankDeficientError, DegenerateScaleError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2
    except CliDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint():
    raise SystemExit(main())
