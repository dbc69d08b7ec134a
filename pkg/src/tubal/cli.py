"""Command-line interface: ``tubal synth|sample|complete|tsvd|bench|rse``.

Exit codes: 0 success, 2 usage or invalid parameters, 3 I/O failure,
4 solver hit ``--max-iters`` without meeting a tolerance.
"""
import argparse
import csv
import logging
import os
import sys

import numpy as np

from .altmin import MAX_ITERS, SolverConfig, complete
from .bench import ALGOS, rate_grid, sweep
from .errors import ReadError, TubalError
from .io import read_msk, read_t3b, write_msk, write_t3b
from .metrics import rse
from .sampling import ELEMENT, TRACE, coverage_report, project, random_mask
from .synth import SynthConfig, synthesize
from .talgebra import singular_tube_norms, tubal_rank
from .tnn import TnnConfig, complete_tnn

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NOCONV = 0, 2, 3, 4

log = logging.getLogger("tubal")


class UsageError(Exception):
    pass


def _dims(text):
    try:
        dims = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must look like 64,64,256, got {text!r}")
    if len(dims) != 3 or min(dims) < 1:
        raise argparse.ArgumentTypeError(f"need three positive sizes, got {text!r}")
    return dims


def _rates(text):
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            return rate_grid(start, stop, step)
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"rates must be start:stop:step or a comma list, got {text!r}")


def _check_distinct(inputs, outputs):
    ins = {os.path.realpath(p) for p in inputs if p}
    for p in outputs:
        if p and os.path.realpath(p) in ins:
            raise UsageError(f"output path {p} must differ from the inputs")


def cmd_synth(args):
    _check_distinct([], [args.out])
    cfg = SynthConfig(dims=args.dims, dt=args.dt, freq=args.freq, truncate_rank=args.rank, seed=args.seed)
    vol = synthesize(cfg)
    write_t3b(args.out, vol, cfg.dt)
    rank, _ = tubal_rank(vol, 1e-6)
    print(f"seed {args.seed}")
    print(f"wrote {args.out} dims {vol.shape} tubal_rank {rank}")
    return EXIT_OK


def cmd_sample(args):
    _check_distinct([args.input], [args.out_mask, args.out])
    vol, dt = read_t3b(args.input)
    mask = random_mask(vol.shape, args.rate, args.seed, args.mode)
    write_msk(args.out_mask, mask, vol.shape[2])
    write_t3b(args.out, project(vol, mask), dt)
    cov = coverage_report(mask)
    print(f"seed {args.seed}")
    print(f"observed {mask.count} of {mask.array.size} {args.mode}s (rate {cov['rate_actual']:.6f})")
    if cov["empty_rows"] or cov["empty_cols"]:
        print(f"warning: empty rows {cov['empty_rows']} empty cols {cov['empty_cols']}")
    return EXIT_OK


def cmd_complete(args):
    _check_distinct([args.input, args.mask, args.truth], [args.out, args.report])
    obs, dt = read_t3b(args.input)
    mask, _ = read_msk(args.mask)
    truth = read_t3b(args.truth)[0] if args.truth else None
    stop_on = args.stop_on
    if stop_on == "truth" and truth is None:
        raise UsageError("--stop-on truth needs --truth")
    if args.algo == "altmin":
        if args.rank is None:
            raise UsageError("--rank is required for --algo altmin")
        cfg = SolverConfig(r=args.rank, max_iters=args.max_iters or 50, tol_rse=args.tol,
                           seed=args.seed, stop_on=stop_on)
        _, est, rep = complete(obs, mask, cfg, truth=truth)
    else:
        cfg = TnnConfig(max_iters=args.max_iters or 500, tol_rse=args.tol, stop_on=stop_on)
        est, rep = complete_tnn(obs, mask, cfg, truth=truth)
    write_t3b(args.out, est, dt)
    if args.report:
        with open(args.report, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            header = ["iter", "objective_rse"] + (["truth_rse"] if truth is not None else []) + ["elapsed_s"]
            writer.writerow(header)
            for i, obj in enumerate(rep.objective_history):
                row = [i + 1, repr(obj)]
                if truth is not None:
                    row.append(repr(rep.rse_history[i]))
                row.append(f"{rep.elapsed[i]:.6f}")
                writer.writerow(row)
    final = f"iters {rep.iters_run} terminated_by {rep.terminated_by}"
    if rep.objective_history:
        final += f" objective_rse {rep.objective_history[-1]:.3e}"
    if truth is not None and rep.rse_history:
        final += f" truth_rse {rep.rse_history[-1]:.3e}"
    print(final)
    return EXIT_NOCONV if rep.terminated_by == MAX_ITERS else EXIT_OK


def cmd_tsvd(args):
    vol, _ = read_t3b(args.input)
    rank, norms = tubal_rank(vol, args.tol)
    print(f"tubal_rank {rank}")
    print("tube_norms " + " ".join(f"{v:.6e}" for v in norms))
    if args.cdf:
        _check_distinct([args.input], [args.cdf])
        asc = np.sort(singular_tube_norms(vol))
        with open(args.cdf, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("tube_index", "norm", "cum_fraction"))
            for i, v in enumerate(asc, start=1):
                writer.writerow((i, repr(float(v)), repr(i / asc.size)))
    return EXIT_OK


def cmd_bench(args):
    _check_distinct([args.input], [args.out])
    vol, _ = read_t3b(args.input)
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    bad = [a for a in algos if a not in ALGOS]
    if bad:
        raise UsageError(f"unknown algorithms {bad}")
    for rate in args.rates:
        if not 0.0 < rate <= 1.0:
            raise UsageError(f"rate {rate} outside (0, 1]")
    overrides = {}
    if args.max_iters:
        overrides["max_iters"] = args.max_iters
    if args.tol:
        overrides["tol_rse"] = args.tol
    result = sweep(vol, args.rates, args.trials, algos=algos, r=args.rank, mode=args.mode,
                   base_seed=args.seed, altmin_overrides=overrides)
    result.to_csv(args.out, aggregate=args.aggregate)
    print(f"seed {args.seed}")
    for algo in algos:
        means = result.mean_rse(algo)
        print(algo + " " + " ".join(f"{rate:g}:{v:.3e}" for rate, v in sorted(means.items())))
    return EXIT_OK


def cmd_rse(args):
    a, _ = read_t3b(args.a)
    b, _ = read_t3b(args.b)
    print(repr(rse(a, b)))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="tubal", description="Low-tubal-rank completion of 3D seismic volumes.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a synthetic dipping-plane volume")
    s.add_argument("--dims", type=_dims, default=(64, 64, 256))
    s.add_argument("--freq", type=float, default=40.0)
    s.add_argument("--dt", type=float, default=0.001)
    s.add_argument("--rank", type=int, default=None, help="truncate to this tubal rank")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("sample", help="subsample traces or entries of a volume")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--rate", type=float, required=True, help="fraction of traces/entries kept")
    s.add_argument("--mode", choices=(TRACE, ELEMENT), default=TRACE)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out-mask", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("complete", help="reconstruct a subsampled volume")
    s.add_argument("--algo", choices=ALGOS, default="altmin")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--mask", required=True)
    s.add_argument("--rank", type=int)
    s.add_argument("--max-iters", type=int)
    s.add_argument("--tol", type=float, default=1e-4)
    s.add_argument("--stop-on", choices=("observed", "truth"), default="observed")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--truth")
    s.add_argument("--out", required=True)
    s.add_argument("--report")
    s.set_defaults(func=cmd_complete)

    s = sub.add_parser("tsvd", help="print tubal rank and singular-tube norms")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--cdf")
    s.set_defaults(func=cmd_tsvd)

    s = sub.add_parser("bench", help="sampling-rate sweep")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--rates", type=_rates, default=rate_grid(0.1, 0.9, 0.1))
    s.add_argument("--trials", type=int, default=5)
    s.add_argument("--algos", default="altmin,tnn")
    s.add_argument("--mode", choices=(TRACE, ELEMENT), default=TRACE)
    s.add_argument("--rank", type=int)
    s.add_argument("--max-iters", type=int)
    s.add_argument("--tol", type=float)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--aggregate", action="store_true")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("rse", help="relative error between two volumes")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.set_defaults(func=cmd_rse)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ReadError, OSError) as exc:
        print(f"tubal: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, TubalError, ValueError) as exc:
        print(f"tubal: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
