"""Command-line entry point: ``eigsketch {estimate,sweep,lowerbound,fastpsd}``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 resource limit.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench
from .fastpsd import FastSketchConfig, fast_psd_spectrum
from .io import read_matrix, read_matrix_market
from .matrix import ConvergenceError, ResourceLimitError
from .sketch import estimate_spectrum, sketch_size

EXIT_INVALID = 2
EXIT_NUMERICAL = 3
EXIT_RESOURCE = 4

log = logging.getLogger("eigsketch")


def _int_list(text: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _estimate_json(est, d: int, **extra) -> dict:
    out = {"d": d, "k": est.k, "seed": est.seed, "estimator": est.tag, "values": est.values.tolist()}
    if est.outcome is not None:
        out["trace_S"] = est.outcome.trace_S
    out.update(extra)
    return out


def cmd_estimate(args) -> int:
    if args.k is None and args.epsilon is None:
        raise ValueError("give --k or --epsilon")
    k = args.k if args.k is not None else sketch_size(args.epsilon)
    A = read_matrix(args.input, args.format)
    est = estimate_spectrum(A, k, args.seed)
    json.dump(_estimate_json(est, A.dim, epsilon=args.epsilon), sys.stdout)
    sys.stdout.write("\n")
    return 0


def cmd_sweep(args) -> int:
    spec = bench.load_spec(args.spec)
    estimator = "fast-psd" if args.estimator == "fastpsd" else args.estimator
    reports = bench.run_error_sweep(
        spec, args.k_list, args.trials, estimator, args.seed,
        epsilon=args.epsilon, workers=args.workers, fast_m=args.m, fast_s=args.s,
    )
    out = Path(args.out)
    bench.write_jsonl(out, reports)
    summary = bench.summarize(reports)
    bench.write_csv(out.with_suffix(".csv"), summary)
    for row in summary:
        log.info("k=%d median error %.4f success %.2f", row["k"], row["median_error"], row["success_rate"])
    return 0


def cmd_lowerbound(args) -> int:
    report = bench.run_lowerbound_suite(
        args.r, args.k_list, args.trials, args.seed, args.samples, adaptive=not args.no_adaptive,
    )
    out = Path(args.out)
    out.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    bench.write_jsonl(out.with_suffix(".jsonl"), report["curve"])
    for name, ok in report["checks"].items():
        log.info("%s: %s", name, "pass" if ok else "FAIL")
    return 0


def cmd_fastpsd(args) -> int:
    A = read_matrix_market(args.input)
    cfg = FastSketchConfig(m=args.m, k=args.k, seed=args.seed, s=args.s)
    est = fast_psd_spectrum(A, cfg, debug=args.debug)
    json.dump(_estimate_json(est, A.dim, m=args.m, s=args.s), sys.stdout)
    sys.stdout.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eigsketch", description="Sketch-based eigenvalue estimation.")
    p.add_argument("-v", "--verbose", action="store_true")
    # also accepted after the subcommand; SUPPRESS keeps it from resetting the top-level flag
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("estimate", parents=[common], help="estimate the spectrum of a matrix file")
    e.add_argument("--input", required=True)
    e.add_argument("--k", type=int)
    e.add_argument("--epsilon", type=float)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--format", choices=("dense", "mm"), default="dense")
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("sweep", parents=[common], help="error sweep over sketch sizes")
    s.add_argument("--spec", required=True)
    s.add_argument("--k-list", type=_int_list, required=True)
    s.add_argument("--trials", type=int, default=50)
    s.add_argument("--estimator", choices=("corrected", "baseline", "fastpsd"), default="corrected")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--epsilon", type=float)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--m", type=int, help="outer dimension for fastpsd (default 2k)")
    s.add_argument("--s", type=int, default=4)
    s.set_defaults(func=cmd_sweep)

    lb = sub.add_parser("lowerbound", parents=[common], help="Wishart rank-distinguishing experiments")
    lb.add_argument("--r", type=int, required=True)
    lb.add_argument("--k-list", type=_int_list, required=True)
    lb.add_argument("--trials", type=int, default=2000)
    lb.add_argument("--samples", type=int, default=100_000)
    lb.add_argument("--seed", type=int, default=0)
    lb.add_argument("--out", required=True)
    lb.add_argument("--no-adaptive", action="store_true", help="skip the adaptive Krylov tester")
    lb.set_defaults(func=cmd_lowerbound)

    f = sub.add_parser("fastpsd", parents=[common], help="fast spectrum estimate of a sparse PSD MatrixMarket file")
    f.add_argument("--input", required=True)
    f.add_argument("--m", type=int, required=True)
    f.add_argument("--s", type=int, default=4)
    f.add_argument("--k", type=int, required=True)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--debug", action="store_true", help="check PSD-ness (small inputs only)")
    f.set_defaults(func=cmd_fastpsd)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
