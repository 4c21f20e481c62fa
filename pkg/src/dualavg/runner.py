"""Drive one optimizer for a fixed budget and collect a :class:`RunTrace`."""
from __future__ import annotations

import numpy as np

from . import kernels, optimizers, schedules
from .analysis import RunTrace
from .errors import ContractError
from .problems import SVM_HINGE, sample_indices
from .projections import FeasibleSet


def log_checkpoints(iters, dense=100, per_decade=100) -> np.ndarray:
    """Every t up to ``dense``, then ~``per_decade`` log-spaced t per decade, plus ``iters``."""
    if iters < 1:
        raise ContractError("iteration budget must be >= 1")
    head = np.arange(1, min(dense, iters) + 1)
    if iters <= dense:
        return head.astype(np.int64)
    lo = np.log10(dense)
    count = int(np.ceil((np.log10(iters) - lo) * per_decade)) + 1
    tail = np.rint(10.0 ** (lo + np.arange(1, count + 1) / per_decade)).astype(np.int64)
    tail = tail[tail <= iters]
    return np.unique(np.concatenate([head, tail, [iters]])).astype(np.int64)


def run(problem, fset: FeasibleSet | None, algo, iters, schedule="linear", seed=0,
        stochastic=False, w0=None, f_star=None, w_ref=None, checkpoints=None,
        track_weighted=None, da_gamma=1.0, backend=None, gda_output="averaged") -> RunTrace:
    """Run ``algo`` for ``iters`` gradient evaluations.

    Row t of the trace describes the algorithm's output after consuming
    g_1..g_t: the current iterate w_t for every method except GDA, whose
    output is the a_k-weighted average of w_1..w_t (``gda_output="last"``
    reports the GDA iterate instead). ``bound_rhs`` is filled
    for GDA and SC-PDA only; ``weighted_gap`` holds the GDA objective average
    (1/A_t) sum a_k f(w_k) - f_star when tracking is on (default for
    deterministic GDA runs).
    """
    if algo not in optimizers.ALGORITHMS:
        raise ContractError(f"unknown algorithm {algo!r}; expected one of {optimizers.ALGORITHMS}")
    schedules.weights(schedule, 1)
    if gda_output not in ("averaged", "last"):
        raise ContractError(f"gda_output must be 'averaged' or 'last', got {gda_output!r}")
    if iters < 1:
        raise ContractError("iteration budget must be >= 1")
    fset = fset or FeasibleSet()
    if stochastic:
        if problem.kind != SVM_HINGE:
            raise ContractError("stochastic oracle requires an svm_hinge problem")
        indices = sample_indices(problem, iters, seed)
    else:
        indices = None
    if track_weighted is None:
        track_weighted = algo == "gda" and not stochastic
    ck = log_checkpoints(iters) if checkpoints is None else np.asarray(checkpoints, dtype=np.int64)
    if len(ck) == 0 or np.any(np.diff(ck) <= 0) or ck[0] < 1 or ck[-1] > iters:
        raise ContractError("checkpoints must be strictly increasing within [1, iters]")

    impl = kernels.get_backend(backend)
    out = impl.run_loop(problem, fset, algo, schedule, int(iters), indices, w0, ck,
                        None if w_ref is None else np.asarray(w_ref, dtype=np.float64),
                        bool(track_weighted), float(da_gamma), gda_output == "averaged")
    fs = np.nan if f_star is None else float(f_star)
    gnorm2 = out["gnorm2"]
    return RunTrace(
        t=ck,
        f=out["out_f"],
        gap=out["out_f"] - fs,
        bound_rhs=out["bound"],
        grad_norm=np.sqrt(gnorm2[ck - 1]),
        grad_norm_sq_all=gnorm2,
        weighted_gap=out["wobj"] - fs,
        dist_max=out["maxdist"],
        time_ns=out["time_ns"],
        outputs=out["out_w"],
        meta={"algo": algo, "schedule": schedule, "seed": seed, "stochastic": bool(stochastic),
              "problem": problem.name, "set": str(fset), "mu": problem.mu, "f_star": fs,
              "gda_output": gda_output,
              "backend": backend or kernels.BACKEND},
    )
