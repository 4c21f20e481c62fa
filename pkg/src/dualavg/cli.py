"""Command-line front end: ``dualavg run | bench | reference | verify``.

Exit codes: 0 success, 1 a check or benchmark cell failed, 2 bad usage or
unreadable input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis, kernels, optimizers, runner, schedules, verify
from .dataio import load_libsvm, subsample, to_problem
from .errors import ContractError, ParseError
from .problems import QUADRATIC, make_synthetic_svm, random_quadratic
from .projections import parse_feasible_set

CSV_HEADER = ("iter", "algo", "schedule", "seed", "f", "gap", "bound_rhs", "grad_norm", "time_ns")
REFERENCE_TOL = 1e-12


class UsageError(Exception):
    pass


# --- config parsing ------------------------------------------------------------

def _ints(text, what):
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad {what} {text!r}") from None


def load_problem(spec, mu, dim=None, subsample_n=None, subsample_seed=0):
    """Build a problem from ``libsvm:PATH``, ``synth-svm:n,d,seed`` or ``quad:d[,seed]``."""
    kind, _, rest = spec.partition(":")
    if not rest:
        raise UsageError(f"problem spec {spec!r} needs a ':' argument")
    if kind == "libsvm":
        path = Path(rest)
        if not path.is_file():
            raise UsageError(f"dataset not found: {path}")
        examples, _ = load_libsvm(path)
        if subsample_n is not None:
            examples = subsample(examples, subsample_n, subsample_seed)
        return to_problem(examples, mu, dim=dim, name=f"libsvm:{path.name}")
    if kind == "synth-svm":
        vals = _ints(rest, "synthetic spec")
        if len(vals) != 3:
            raise UsageError("synth-svm takes n,d,seed")
        return make_synthetic_svm(vals[0], vals[1], seed=vals[2], mu=mu)
    if kind == "quad":
        vals = _ints(rest, "quadratic spec")
        if len(vals) not in (1, 2):
            raise UsageError("quad takes d or d,seed")
        return random_quadratic(vals[0], seed=vals[1] if len(vals) == 2 else 0, mu=mu)
    raise UsageError(f"unknown problem kind {kind!r}; use libsvm:, synth-svm: or quad:")


def load_init(text, dim):
    if text is None or text == "zero":
        return None
    path = Path(text)
    if path.suffix in (".npy", ".txt", ".csv") or path.exists():
        if not path.is_file():
            raise UsageError(f"initial point file not found: {path}")
        w = np.load(path) if path.suffix == ".npy" else np.loadtxt(path, delimiter=",", ndmin=1)
    else:
        try:
            w = np.array([float(x) for x in text.split(",")])
        except ValueError:
            raise UsageError(f"bad --init {text!r}") from None
    if w.shape != (dim,):
        raise UsageError(f"initial point has {w.size} entries, problem has dim {dim}")
    return w


def _seeds(text):
    if "-" in text and "," not in text:
        lo, hi = _ints(text.replace("-", ","), "seed range")
        if hi < lo:
            raise UsageError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    return _ints(text, "seed list")


# --- output --------------------------------------------------------------------

def _fmt(x):
    return repr(float(x))  # shortest round-trip form; nan/inf spelled as such


def trace_rows(trace, seed, timing=True):
    m = trace.meta
    for k in range(len(trace)):
        yield (int(trace.t[k]), m["algo"], m["schedule"], seed, _fmt(trace.f[k]),
               _fmt(trace.gap[k]), _fmt(trace.bound_rhs[k]), _fmt(trace.grad_norm[k]),
               int(trace.time_ns[k]) if timing else 0)


def write_csv(fh, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(rows)


def _reference(problem, fset):
    if problem.kind == QUADRATIC:
        return analysis.reference_optimum(problem, fset)
    ref = analysis.reference_optimum(problem, fset, tol=REFERENCE_TOL)
    if not ref.certified:
        print(f"warning: reference optimum uncertified (gap {ref.residual:.2e})", file=sys.stderr)
    return ref


def _problem_from_args(args):
    mu = args.mu
    if not (mu > 0 and math.isfinite(mu)):
        raise UsageError("--mu must be positive")
    prob = load_problem(args.problem, mu, dim=args.dim, subsample_n=args.subsample,
                        subsample_seed=args.subsample_seed)
    fset = parse_feasible_set(args.set)
    return prob, fset


def _run_cell(prob, fset, ref, algo, seed, args):
    trace = runner.run(prob, fset, algo, args.iters, schedule=args.schedule, seed=seed,
                       stochastic=args.stochastic, w0=load_init(args.init, prob.dim),
                       f_star=ref.f_star, da_gamma=args.da_gamma, gda_output=args.gda_output)
    return trace


# --- subcommands -----------------------------------------------------------------

def cmd_run(args):
    prob, fset = _problem_from_args(args)
    ref = _reference(prob, fset)
    trace = _run_cell(prob, fset, ref, args.algo, args.seed, args)
    rows = trace_rows(trace, args.seed, timing=not args.no_timing)
    if args.out is None:
        write_csv(sys.stdout, rows)
    else:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{args.algo}_{args.schedule}_seed{args.seed}.csv"
        with open(path, "w", newline="") as fh:
            write_csv(fh, rows)
        print(f"wrote {path} (final gap {trace.final_gap:.3e})")
    return 0


def _bench_cell(payload):
    prob, fset, ref, algo, seed, args = payload
    try:
        return algo, seed, _run_cell(prob, fset, ref, algo, seed, args), None
    except Exception as exc:  # noqa: BLE001 - a failed cell is reported, not fatal
        return algo, seed, None, f"{type(exc).__name__}: {exc}"


def _slope(trace, floor):
    T = int(trace.t[-1])
    if T < 200:
        return None
    try:
        s, r2 = analysis.loglog_slope(analysis.floor_gaps(trace.gap, floor), T // 100, T, trace.t)
    except ContractError:
        return None
    return {"slope": s, "r_squared": r2}


def summarize(results, floor):
    summary = {}
    for algo, seed, trace, err in results:
        entry = summary.setdefault(algo, {"seeds": [], "final_gap": [], "slope": [],
                                          "failed": []})
        if err is not None:
            entry["failed"].append({"seed": seed, "error": err})
            continue
        entry["seeds"].append(seed)
        entry["final_gap"].append(trace.final_gap)
        entry["slope"].append(_slope(trace, floor))
    for entry in summary.values():
        gaps = np.array(entry["final_gap"])
        if len(gaps):
            entry.update(mean_final_gap=float(gaps.mean()), min_final_gap=float(gaps.min()),
                         max_final_gap=float(gaps.max()), median_final_gap=float(np.median(gaps)),
                         std_final_gap=float(gaps.std()))
    return summary


def cmd_bench(args):
    prob, fset = _problem_from_args(args)
    algos = args.algos.split(",")
    for a in algos:
        if a not in optimizers.ALGORITHMS:
            raise UsageError(f"unknown algorithm {a!r}")
    seeds = _seeds(args.seeds)
    ref = _reference(prob, fset)
    payloads = [(prob, fset, ref, a, s, args) for a in algos for s in seeds]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_bench_cell, payloads))
    else:
        results = [_bench_cell(p) for p in payloads]

    out = Path(args.out)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    combined = io.StringIO()
    all_rows = []
    for algo, seed, trace, err in results:
        if trace is None:
            continue
        rows = list(trace_rows(trace, seed, timing=not args.no_timing))
        all_rows.extend(rows)
        with open(out / "traces" / f"{algo}_seed{seed}.csv", "w", newline="") as fh:
            write_csv(fh, rows)
    write_csv(combined, all_rows)
    (out / "bench.csv").write_text(combined.getvalue())

    summary = {
        "problem": prob.name, "mu": prob.mu, "set": str(fset), "iters": args.iters,
        "schedule": args.schedule, "stochastic": bool(args.stochastic),
        "f_star": ref.f_star, "reference_residual": ref.residual,
        "backend": kernels.BACKEND,
        "algorithms": summarize(results, max(ref.residual, 1e-16)),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    failed = sum(len(e["failed"]) for e in summary["algorithms"].values())
    for algo, entry in summary["algorithms"].items():
        med = entry.get("median_final_gap", float("nan"))
        print(f"{algo:<8} seeds={len(entry['seeds'])} median final gap {med:.3e}"
              + (f"  FAILED {len(entry['failed'])}" if entry["failed"] else ""))
    return 1 if failed else 0


def cmd_reference(args):
    prob, fset = _problem_from_args(args)
    ref = analysis.reference_optimum(prob, fset, tol=args.tol)
    print(json.dumps({"problem": prob.name, "mu": prob.mu, "set": str(fset),
                      "f_star": ref.f_star, "residual": ref.residual,
                      "certified": ref.certified, "method": ref.method,
                      "w_star": [float(x) for x in ref.w_star]}, indent=2))
    return 0 if ref.certified else 1


def cmd_verify(args):
    try:
        names = verify.resolve(args.suite)
    except KeyError as exc:
        raise UsageError(f"unknown suite {exc.args[0]!r}; have "
                         f"{', '.join(list(verify.SUITES) + list(verify.ALIASES))}") from None
    if args.inject_fault:
        # faults live in the step functions, which only the python loop calls
        with optimizers.inject_fault(args.inject_fault):
            checks = verify.run_suites(names, backend="python", quick=not args.full)
    else:
        checks = verify.run_suites(names, quick=not args.full)
    for c in checks:
        print(c.row())
    bad = sum(not c.passed for c in checks)
    print(f"{len(checks) - bad}/{len(checks)} checks passed")
    return 1 if bad else 0


# --- argument parser -----------------------------------------------------------------

def _add_problem_args(p):
    p.add_argument("--problem", required=True,
                   help="libsvm:PATH | synth-svm:n,d,seed | quad:d[,seed]")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--set", default="free", help="free | ball:R | box:lo:hi")
    p.add_argument("--dim", type=int, default=None, help="feature dimension override (libsvm)")
    p.add_argument("--subsample", type=int, default=None, metavar="N",
                   help="draw N examples without replacement (libsvm)")
    p.add_argument("--subsample-seed", type=int, default=0)


def _add_run_args(p):
    p.add_argument("--schedule", choices=schedules.KINDS, default=schedules.LINEAR)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--stochastic", action="store_true", help="one sampled example per step")
    p.add_argument("--init", default=None, help="zero | v1,v2,... | file (.npy/.txt)")
    p.add_argument("--da-gamma", type=float, default=1.0, help="prox scale for plain DA")
    p.add_argument("--gda-output", choices=("averaged", "last"), default="averaged")
    p.add_argument("--no-timing", action="store_true", help="write 0 in the time_ns column")


def build_parser():
    parser = argparse.ArgumentParser(prog="dualavg", description=__doc__.splitlines()[0])
    parser.add_argument("--verify", metavar="SUITE", default=None,
                        help="shorthand for 'dualavg verify SUITE'")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("run", help="run one algorithm and write a CSV trace")
    p.add_argument("--algo", choices=optimizers.ALGORITHMS, required=True)
    _add_problem_args(p)
    _add_run_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, metavar="DIR", help="output directory (default stdout)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="algorithms x seeds with a JSON summary")
    p.add_argument("--algos", "--algo", dest="algos", default="scpda,gda,pegasos,papsg,scrda")
    _add_problem_args(p)
    _add_run_args(p)
    p.add_argument("--seeds", "--seed", dest="seeds", default="0-4", help="e.g. 0-4 or 1,3,5")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("reference", help="certified minimizer and optimal value")
    _add_problem_args(p)
    p.add_argument("--tol", type=float, default=REFERENCE_TOL)
    p.set_defaults(func=cmd_reference)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("suite", nargs="?", default="all")
    p.add_argument("--full", action="store_true", help="full-size trajectories")
    p.add_argument("--inject-fault", default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verify is not None:
        if args.command is not None:
            parser.error("--verify cannot be combined with a subcommand")
        args = parser.parse_args(["verify", args.verify])
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2
    if getattr(args, "iters", 1) < 1:
        print("error: --iters must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (UsageError, ContractError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
