"""Time the compiled run loop against the pure-Python one.

    python bench/bench_kernels.py [--iters N] [--repeat R] [--json PATH]

Each cell runs the same problem, seed and checkpoints on both backends,
checks that the outputs agree, and reports the best-of-R wall time.
"""
import argparse
import json
import sys
import time

import numpy as np

from dualavg import kernels, runner
from dualavg.problems import make_synthetic_svm

CELLS = [
    # (label, n, d, algo, stochastic)
    ("svm 200x20 full-gradient scpda", 200, 20, "scpda", False),
    ("svm 200x20 full-gradient gda", 200, 20, "gda", False),
    ("svm 2000x20 stochastic scpda", 2000, 20, "scpda", True),
    ("svm 2000x20 stochastic pegasos", 2000, 20, "pegasos", True),
    ("svm 500x100 stochastic papsg", 500, 100, "papsg", True),
]


def best_time(fn, repeat):
    best, result = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iters", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)

    if "cython" not in kernels.available_backends():
        print("compiled core not built; nothing to compare", file=sys.stderr)
        return 1
    rows = []
    print(f"{'cell':<34} {'python s':>10} {'cython s':>10} {'speedup':>8}  max|diff|")
    for label, n, d, algo, stochastic in CELLS:
        prob = make_synthetic_svm(n, d, seed=0)
        times, outs = {}, {}
        for name in ("python", "cython"):
            times[name], outs[name] = best_time(
                lambda: runner.run(prob, None, algo, args.iters, stochastic=stochastic, seed=1,
                                   backend=name), args.repeat)
        diff = float(np.max(np.abs(outs["python"].outputs - outs["cython"].outputs)))
        speedup = times["python"] / times["cython"]
        rows.append({"cell": label, "iters": args.iters, "python_s": times["python"],
                     "cython_s": times["cython"], "speedup": speedup, "max_abs_diff": diff})
        print(f"{label:<34} {times['python']:>10.3f} {times['cython']:>10.3f} "
              f"{speedup:>7.1f}x  {diff:.1e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0 if all(r["max_abs_diff"] <= 1e-10 for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
