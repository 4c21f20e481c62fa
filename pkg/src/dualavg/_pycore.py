"""Pure-Python run loop, used when the compiled core is unavailable.

Drives the step functions of :mod:`dualavg.optimizers` directly, so it is
also the reference the compiled loop is tested against.
"""
import time

import numpy as np

from . import optimizers, schedules
from .problems import example_subgradient, full_subgradient, objective_value

BOUND_ALGOS = ("gda", "scpda")


def run_loop(problem, fset, algo, schedule, iters, indices, w0, checkpoints, w_ref,
             track_weighted, da_gamma, gda_average=True):
    d = problem.dim
    mu = problem.mu
    n_ck = len(checkpoints)
    out_w = np.empty((n_ck, d))
    out_f = np.empty(n_ck)
    bound = np.full(n_ck, np.nan)
    wobj = np.full(n_ck, np.nan)
    maxdist = np.full(n_ck, np.nan)
    time_ns = np.empty(n_ck, dtype=np.int64)
    gnorm2 = np.empty(iters)

    state = optimizers.init_state(algo, d, fset, w0, schedule, da_gamma)
    stochastic = indices is not None and len(indices) > 0
    has_ref = w_ref is not None and len(w_ref) > 0
    A = G = 0
    bsum = wsum = 0.0
    dmax = 0.0
    c = 0
    start = time.perf_counter_ns()
    for t in range(1, iters + 1):
        w = state.w
        if stochastic:
            g = example_subgradient(problem, w, int(indices[t - 1]))
        else:
            g = full_subgradient(problem, w)
        gnorm2[t - 1] = g.norm_sq
        a, gam = schedules.weights(schedule, t)
        A += a
        G += gam
        bsum += (a * a) / (mu * G) * g.norm_sq
        if track_weighted:
            wsum += a * objective_value(problem, w)
        if has_ref:
            dmax = max(dmax, float(np.linalg.norm(w - w_ref)))

        state = optimizers.step(algo, state, problem, fset, g)

        if c < n_ck and checkpoints[c] == t:
            out = optimizers.gda_averaged_output(state) if algo == "gda" and gda_average else w
            out_w[c] = out
            out_f[c] = objective_value(problem, out)
            if algo in BOUND_ALGOS:
                bound[c] = bsum / (2.0 * A)
            if track_weighted:
                wobj[c] = wsum / A
            if has_ref:
                maxdist[c] = dmax
            time_ns[c] = time.perf_counter_ns() - start
            c += 1
    return {"out_w": out_w, "out_f": out_f, "bound": bound, "wobj": wobj,
            "maxdist": maxdist, "time_ns": time_ns, "gnorm2": gnorm2}


def dual_cd_epochs(X, y, C, alpha, w, orders):
    """Dual coordinate ascent sweeps for the hinge SVM (in-place on alpha, w)."""
    sq = np.einsum("ij,ij->i", X, X)
    for order in orders:
        for i in order:
            if sq[i] > 0.0:
                new = alpha[i] - (y[i] * (X[i] @ w) - 1.0) / sq[i]
            else:
                new = C
            new = min(max(new, 0.0), C)
            step = new - alpha[i]
            if step != 0.0:
                alpha[i] = new
                w += step * y[i] * X[i]
