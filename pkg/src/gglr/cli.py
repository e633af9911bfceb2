"""Command line interface: degrade, interpolate, eval, bench, mu-select.

Solver defaults can be overridden with the environment variables
GGLR_SIGMA, GGLR_MU, GGLR_WINDOW and GGLR_CONNECTIVITY; flags win.
"""

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import bench, metrics, netpbm
from .gradient_graph import lifted_laplacians
from .mu_select import SpectralSummary, estimate_variances, extreme_eigenvalues, optimal_mu
from .solver import SolveConfig, glr_interpolate, interpolate
from .structure_tensor import estimate_gradient_field

log = logging.getLogger("gglr")


class CliError(Exception):
    pass


def _env(name, default, cast):
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError:
        raise CliError("bad value for %s: %r" % (name, raw)) from None


def _mu(value):
    if value == "auto":
        return value
    mu = float(value)
    if not mu > 0:
        raise argparse.ArgumentTypeError("mu must be positive or 'auto'")
    return mu


def _fractions(value):
    try:
        out = [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("fractions must be comma-separated numbers") from None
    if not out or any(not 0 <= f <= 1 for f in out):
        raise argparse.ArgumentTypeError("fractions must lie in [0, 1]")
    return out


def _methods(value):
    out = [v.strip() for v in value.split(",") if v.strip()]
    bad = [m for m in out if m not in bench.METHODS]
    if bad or not out:
        raise argparse.ArgumentTypeError("unknown method(s): %s" % ",".join(bad))
    return out


def _solver_flags(p):
    p.add_argument("--sigma", type=float, default=_env("GGLR_SIGMA", 0.68, float))
    p.add_argument("--mu", type=_mu, default=_env("GGLR_MU", 0.01, _mu))
    p.add_argument("--window", type=int, default=_env("GGLR_WINDOW", 5, int))
    p.add_argument("--connectivity", type=int, choices=(2, 4), default=_env("GGLR_CONNECTIVITY", 4, int))
    p.add_argument("--cg-tol", type=float, default=1e-8)
    p.add_argument("--cg-maxit", type=int, default=None)
    p.add_argument("--outer-tol", type=float, default=1e-4)
    p.add_argument("--outer-maxit", type=int, default=10)
    p.add_argument("--jacobi", action="store_true", help="diagonal preconditioner for CG")


def _config(args, seed=0):
    return SolveConfig(sigma=args.sigma, mu=args.mu, window=args.window, connectivity=args.connectivity,
                       cg_tol=args.cg_tol, cg_maxit=args.cg_maxit, outer_tol=args.outer_tol,
                       outer_maxit=args.outer_maxit, seed=seed,
                       preconditioner="jacobi" if args.jacobi else None)


def cmd_degrade(args):
    img = netpbm.read_image(args.input)
    M, N = img.shape
    mask = metrics.random_mask(M, N, args.fraction, args.seed)
    netpbm.write_pbm(args.out_mask, mask)
    if args.out_img:
        netpbm.write_pgm(args.out_img, metrics.degrade(img, mask))
    print("%d of %d pixels missing" % (int((~mask).sum()), M * N))


def cmd_interpolate(args):
    img = netpbm.read_image(args.input)
    mask = netpbm.read_pbm(args.mask)
    if mask.shape != img.shape:
        raise CliError("mask is %dx%d but image is %dx%d" % (mask.shape + img.shape))
    config = _config(args)
    solve = glr_interpolate if args.method == "glr" else interpolate
    rep = solve(img, mask, config)
    netpbm.write_pgm(args.out, rep.image)
    if args.report:
        doc = {"method": args.method, "config": config.to_dict(), **rep.summary()}
        with open(args.report, "w") as f:
            json.dump(doc, f, indent=2)
    log.info("%d outer iterations, CG iterations %s", rep.outer_iterations, rep.cg_iterations)


def _json_float(v):
    return "inf" if math.isinf(v) else v


def cmd_eval(args):
    ref = netpbm.read_image(args.ref)
    test = netpbm.read_image(args.test)
    p, s = metrics.psnr(ref, test), metrics.ssim(ref, test)
    if args.json:
        print(json.dumps({"psnr_db": _json_float(p), "ssim": s}))
    else:
        print("PSNR %s dB  SSIM %.4f" % ("inf" if math.isinf(p) else "%.4f" % p, s))


def cmd_bench(args):
    config = _config(args)
    records = bench.run_bench(args.dir, args.fractions, args.methods, args.seed, config, args.workers)
    text = bench.records_to_csv(records, timing=args.timing)
    if args.out:
        with open(args.out, "w", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def cmd_mu_select(args):
    img = netpbm.read_image(args.lap_from)
    mask = netpbm.read_pbm(args.mask)
    if mask.shape != img.shape:
        raise CliError("mask and image differ in shape")
    M, N = img.shape
    fields = estimate_gradient_field(img, mask, args.window)
    Lh, Lv = lifted_laplacians(fields, M, N, args.connectivity, args.sigma)
    est_p, est_o = estimate_variances(img, mask)
    sp2 = est_p if args.sigma_p is None else args.sigma_p ** 2
    so2 = est_o if args.sigma_o is None else args.sigma_o ** 2
    lam3, lamK = extreme_eigenvalues(Lh + Lv, shape=(M, N))
    summary = SpectralSummary(M * N, lam3, lamK, sp2, so2)
    mu = optimal_mu(summary, (args.mu_min, args.mu_max))
    if args.json:
        print(json.dumps({"mu": mu, "lam3": lam3, "lamK": lamK, "sigma_p2": sp2, "sigma_o2": so2, "K": M * N}))
    else:
        print("%.6g" % mu)


def build_parser():
    parser = argparse.ArgumentParser(prog="gglr", description="Image interpolation with gradient graph Laplacian regularization.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrade", help="remove a random fraction of pixels")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-mask", required=True)
    p.add_argument("--out-img")
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("interpolate", help="restore missing pixels")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--method", choices=("gglr", "glr"), default="gglr")
    _solver_flags(p)
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("eval", help="PSNR and SSIM of a test image against a reference")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="degrade/restore/score every image in a directory")
    p.add_argument("--dir", required=True)
    p.add_argument("--fractions", type=_fractions, default=list(bench.DEFAULT_FRACTIONS))
    p.add_argument("--methods", type=_methods, default=list(bench.METHODS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="fill the runtime_s column (makes output run-dependent)")
    _solver_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("mu-select", help="mu minimizing the bias-variance MSE bound")
    p.add_argument("--lap-from", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--sigma-p", type=float, help="planar perturbation std dev (estimated if omitted)")
    p.add_argument("--sigma-o", type=float, help="observation noise std dev (estimated if omitted)")
    p.add_argument("--sigma", type=float, default=_env("GGLR_SIGMA", 0.68, float))
    p.add_argument("--window", type=int, default=_env("GGLR_WINDOW", 5, int))
    p.add_argument("--connectivity", type=int, choices=(2, 4), default=_env("GGLR_CONNECTIVITY", 4, int))
    p.add_argument("--mu-min", type=float, default=1e-6)
    p.add_argument("--mu-max", type=float, default=1e3)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_mu_select)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code
    try:
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s: %(message)s", stream=sys.stderr)
        args.func(args)
    except (CliError, OSError, ValueError, ArithmeticError) as e:
        print("gglr: error: %s" % e, file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
