"""Command-line surface: synth, factorize, reconstruct, evaluate, predict,
experiment, and a hidden selftest running the property battery.

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .cancer import CancerParams
from .capricorn import CapricornParams
from .matrix import (
    NonNegMatrix,
    maxtimes_product,
    read_csv,
    sparsity,
    write_csv,
)
from .metrics import METRIC_NAMES, prediction_report
from .objective import by_name, evaluate, relative_frobenius
from .pipeline import ALGORITHMS, DEFAULT_CYCLES, DEFAULT_OBJECTIVE, factorize
from .synth import NoiseSpec, make_instance, mask_holdout, sample_holdout

__all__ = ["main", "entry"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems via exit code 1."""

    def error(self, message):
        raise _UsageError(message)


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_mask_csv(mask, path):
    with open(path, "w", encoding="utf-8") as fh:
        for row in np.asarray(mask, dtype=int):
            fh.write(",".join(str(v) for v in row) + "\n")


def _read_mask_csv(path):
    mat = read_csv(path)
    return mat.filled(0.0) > 0


def _say(args, msg):
    if not getattr(args, "quiet", False):
        print(msg)


# ---------------------------------------------------------------------------
# subcommands

def cmd_synth(args):
    noise = None
    if args.noise != "none":
        noise = NoiseSpec(args.noise, args.level)
    inst = make_instance(
        args.rows, args.cols, args.rank, args.density, noise, args.seed
    )
    os.makedirs(args.out, exist_ok=True)
    paths = {
        "clean": os.path.join(args.out, "clean.csv"),
        "noisy": os.path.join(args.out, "noisy.csv"),
        "B": os.path.join(args.out, "B.csv"),
        "C": os.path.join(args.out, "C.csv"),
    }
    write_csv(inst.clean, paths["clean"])
    write_csv(inst.noisy, paths["noisy"])
    write_csv(inst.true_B, paths["B"])
    write_csv(inst.true_C, paths["C"])
    manifest = {
        "command": "synth",
        "rows": args.rows,
        "cols": args.cols,
        "rank": args.rank,
        "density": args.density,
        "noise": args.noise,
        "level": args.level if args.noise != "none" else None,
        "seed": args.seed,
        "files": {k: os.path.basename(v) for k, v in paths.items()},
        "note": "flip noise replaces entries unconditionally; a flip may "
                "repeat the original value",
    }
    _write_json(os.path.join(args.out, "manifest.json"), manifest)
    _say(args, f"[synth] wrote {args.out}/clean.csv noisy.csv B.csv C.csv manifest.json")
    return 0


def _algorithm_params(args):
    cap = CapricornParams(
        bucket_size=args.bucket_size,
        delta=args.delta,
        theta=args.theta,
        tau=args.tau,
    )
    can = CancerParams(
        max_degree=args.max_degree,
        update_fraction=args.update_fraction,
        random_abscissae=getattr(args, "random_abscissae", False),
    )
    return cap, can


def _params_echo(args, algorithm):
    if algorithm == "capricorn":
        return {
            "bucket_size": args.bucket_size,
            "delta": args.delta,
            "theta": args.theta,
            "tau": args.tau,
        }
    return {
        "max_degree": args.max_degree,
        "update_fraction": args.update_fraction,
        "rescale": not args.no_rescale,
    }


def _run_factorization(A, args):
    cap, can = _algorithm_params(args)
    cycles = args.cycles if args.cycles is not None else DEFAULT_CYCLES[args.algorithm]
    objective = args.objective or DEFAULT_OBJECTIVE[args.algorithm]
    started = time.perf_counter()
    fact, trace = factorize(
        A,
        args.rank,
        algorithm=args.algorithm,
        cycles=cycles,
        objective=objective,
        seed=args.seed,
        rescale=not args.no_rescale,
        capricorn_params=cap,
        cancer_params=can,
    )
    elapsed = time.perf_counter() - started
    return fact, trace, cycles, objective, elapsed


def cmd_factorize(args):
    A = read_csv(args.input, skip_header=args.skip_header)
    fact, trace, cycles, objective, elapsed = _run_factorization(A, args)
    os.makedirs(args.out, exist_ok=True)
    write_csv(fact.B, os.path.join(args.out, "B.csv"))
    write_csv(fact.C, os.path.join(args.out, "C.csv"))
    trace.to_csv(os.path.join(args.out, "trace.csv"))
    obj = by_name(objective)
    recon = fact.reconstruct()
    best_error = evaluate(obj, A, recon)
    summary = {
        "command": "factorize",
        "input": args.input,
        "rows": A.rows,
        "cols": A.cols,
        "algorithm": args.algorithm,
        "rank": args.rank,
        "cycles": cycles,
        "objective": objective,
        "params": _params_echo(args, args.algorithm),
        "seed": args.seed,
        "scale": fact.scale,
        "init_error": trace.records[0].error,
        "best_error": best_error,
        "final_error": trace.records[-1].error,
        "relative_frobenius": relative_frobenius(A, recon),
        "sparsity_b": sparsity(fact.B),
        "sparsity_c": sparsity(fact.C),
        "wall_time_s": elapsed,
    }
    _write_json(os.path.join(args.out, "summary.json"), summary)
    _say(
        args,
        f"[factorize] {args.algorithm} rank {args.rank}: best {objective} error "
        f"{best_error:.6g}, relative Frobenius "
        f"{summary['relative_frobenius']:.6g} ({elapsed:.2f}s)",
    )
    return 0


def cmd_reconstruct(args):
    B = read_csv(args.b)
    C = read_csv(args.c)
    recon = maxtimes_product(B, C)
    write_csv(recon, args.out)
    _say(args, f"[reconstruct] wrote {args.out} ({recon.rows}x{recon.cols})")
    return 0


def _load_prediction(args):
    true = read_csv(args.true)
    if args.pred:
        pred = read_csv(args.pred)
    elif args.b and args.c:
        pred = maxtimes_product(read_csv(args.b), read_csv(args.c))
    else:
        raise _UsageError("provide --pred or both --b and --c")
    if args.holdout:
        holdout = _read_mask_csv(args.holdout)
    else:
        holdout = true.observed
    return true, pred, holdout


def _report_csv_path(rows, path):
    names = list(rows[0].keys())
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(names) + "\n")
        for row in rows:
            fh.write(",".join(str(row[k]) for k in names) + "\n")


def cmd_evaluate(args):
    true, pred, holdout = _load_prediction(args)
    selected = args.metrics.split(",") if args.metrics else None
    report = prediction_report(true, pred, holdout, selected)
    payload = report.to_dict()
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_json(os.path.join(args.out, "report.json"), payload)
        _report_csv_path([payload], os.path.join(args.out, "report.csv"))
        _say(args, f"[evaluate] wrote {args.out}/report.json and report.csv")
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_predict(args):
    data = read_csv(args.input, skip_header=args.skip_header)
    selected = args.metrics.split(",") if args.metrics else None
    rows = []
    for rep in range(args.repetitions):
        seed = (args.seed or 0) + rep
        holdout = sample_holdout(
            data,
            fraction=args.holdout_fraction,
            per_row=args.holdout_per_row,
            nonzeros_only=args.nonzeros_only,
            seed=seed,
        )
        train = mask_holdout(data, holdout)
        run_args = argparse.Namespace(**vars(args))
        run_args.seed = seed
        fact, _, cycles, objective, elapsed = _run_factorization(train, run_args)
        report = prediction_report(data, fact.reconstruct(), holdout, selected)
        row = {"rep": rep, "seed": seed, "wall_time_s": round(elapsed, 4)}
        row.update(report.to_dict())
        rows.append(row)
        _say(args, f"[predict] rep {rep}: " + ", ".join(
            f"{k}={v:.4g}" for k, v in report.metrics.items()))
    numeric = [k for k in rows[0] if k not in ("rep", "seed")]
    summary = {"rep": "mean", "seed": ""}
    spread = {"rep": "std", "seed": ""}
    for k in numeric:
        vals = np.array([float(row[k]) for row in rows], dtype=float)
        summary[k] = float(np.nanmean(vals))
        spread[k] = float(np.nanstd(vals, ddof=1)) if len(vals) > 1 else 0.0
    out_rows = rows + [summary, spread]
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _report_csv_path(out_rows, os.path.join(args.out, "reports.csv"))
        _write_json(os.path.join(args.out, "report.json"),
                    {"runs": rows, "mean": summary, "std": spread})
        _say(args, f"[predict] wrote {args.out}/reports.csv and report.json")
    else:
        print(json.dumps({"runs": rows, "mean": summary, "std": spread},
                         indent=2, sort_keys=True))
    return 0


def cmd_experiment(args):
    from .experiment import run_experiment

    failures = run_experiment(args.config, args.out, jobs=args.jobs,
                              quiet=args.quiet)
    return 3 if failures else 0


def cmd_selftest(args):
    from . import selftest

    ok = selftest.run_battery(quick=args.quick, quiet=args.quiet)
    return 0 if ok else 3


def cmd_example_config(args):
    from .experiment import EXAMPLE_CONFIG

    print(EXAMPLE_CONFIG, end="")
    return 0


# ---------------------------------------------------------------------------
# parser assembly

def _add_common_factorize_flags(p):
    p.add_argument("--algorithm", choices=ALGORITHMS, default="capricorn")
    p.add_argument("--rank", type=int, required=True, help="number of blocks")
    p.add_argument("--cycles", type=int, default=None,
                   help="full passes over the blocks (default: 4 capricorn, "
                        "14 cancer)")
    p.add_argument("--objective", choices=("frobenius", "l1", "js"),
                   default=None,
                   help="error measure (default: l1 capricorn, frobenius cancer)")
    p.add_argument("--skip-header", action="store_true",
                   help="skip one CSV header line")
    # capricorn knobs
    p.add_argument("--bucket-size", type=int, default=3, dest="bucket_size")
    p.add_argument("--delta", type=float, default=0.01,
                   help="log-ratio bucket width")
    p.add_argument("--theta", type=float, default=0.5,
                   help="block expansion threshold")
    p.add_argument("--tau", type=float, default=0.5,
                   help="row correlation threshold")
    # cancer knobs
    p.add_argument("--max-degree", type=int, default=16, dest="max_degree")
    p.add_argument("--update-fraction", type=float, default=0.1,
                   dest="update_fraction")
    p.add_argument("--random-abscissae", action="store_true",
                   dest="random_abscissae",
                   help="sample surrogate abscissae instead of equispacing")
    p.add_argument("--no-rescale", action="store_true",
                   help="skip dividing the input by its max before cancer")


def build_parser():
    parser = _Parser(
        prog="subtrop",
        description="Approximate low-rank max-times (subtropical) matrix "
                    "factorization toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a planted instance")
    p.add_argument("--rows", type=int, default=200)
    p.add_argument("--cols", type=int, default=160)
    p.add_argument("--rank", type=int, default=5)
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--noise", default="none",
                   choices=("none", "tropical-density", "tropical-flip",
                            "gaussian"))
    p.add_argument("--level", type=float, default=0.0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("factorize", help="factorize a CSV matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True, help="output directory")
    _add_common_factorize_flags(p)
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("reconstruct", help="max-times product of factor CSVs")
    p.add_argument("--b", required=True)
    p.add_argument("--c", required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("evaluate", help="score a reconstruction on a holdout")
    p.add_argument("--true", required=True, help="true data CSV")
    p.add_argument("--pred", help="predicted matrix CSV")
    p.add_argument("--b", help="left factor CSV (with --c)")
    p.add_argument("--c", help="right factor CSV (with --b)")
    p.add_argument("--holdout", help="0/1 holdout mask CSV "
                                     "(default: every observed entry)")
    p.add_argument("--metrics", help="comma-separated subset of: "
                                     + ",".join(METRIC_NAMES))
    p.add_argument("--out", help="output directory (default: print JSON)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="holdout prediction experiment")
    p.add_argument("--input", required=True)
    p.add_argument("--holdout-fraction", type=float, default=None)
    p.add_argument("--holdout-per-row", type=int, default=None)
    p.add_argument("--nonzeros-only", action="store_true")
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--metrics", help="comma-separated metric subset")
    p.add_argument("--out", help="output directory (default: print JSON)")
    _add_common_factorize_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("experiment", help="run a declarative sweep config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("example-config",
                       help="print a template experiment config")
    p.set_defaults(func=cmd_example_config)

    p = sub.add_parser("selftest")  # hidden from help on purpose
    p.add_argument("--quick", action="store_true")
    p.set_defaults(func=cmd_selftest)

    for p in sub.choices.values():
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--quiet", action="store_true")

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # unexpected runtime failure
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def entry():
    sys.exit(main())
