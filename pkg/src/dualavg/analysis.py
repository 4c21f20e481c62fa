"""Reference optima, optimality-gap traces, rate fits and bound checks."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import kernels, optimizers, schedules
from .errors import ContractError
from .problems import (QUADRATIC, DiagnosticsRecord, ProblemInstance, example_subgradient,
                       full_subgradient, objective_difference, objective_value,
                       sample_indices)
from .projections import WHOLE_SPACE, FeasibleSet, project


@dataclass(frozen=True, eq=False)
class ReferenceSolution:
    w_star: np.ndarray
    f_star: float
    residual: float          # certified upper bound on f(w_star) - min f
    certified: bool = True
    method: str = ""


@dataclass(eq=False)
class RunTrace:
    """Checkpointed record of one optimizer run.

    ``grad_norm_sq_all`` keeps ||g_k||^2 for every iteration so the bound
    right-hand sides can be recomputed independently of the run loop.
    """

    t: np.ndarray
    f: np.ndarray
    gap: np.ndarray
    bound_rhs: np.ndarray
    grad_norm: np.ndarray
    grad_norm_sq_all: np.ndarray
    weighted_gap: np.ndarray
    dist_max: np.ndarray
    time_ns: np.ndarray
    outputs: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def final_gap(self):
        return float(self.gap[-1])

    @property
    def diagnostics(self) -> DiagnosticsRecord:
        dist = self.dist_max[-1] if len(self.dist_max) and np.isfinite(self.dist_max[-1]) else 0.0
        return DiagnosticsRecord(float(np.sqrt(self.grad_norm_sq_all.max())), float(dist))

    def at(self, t):
        """Row index of checkpoint ``t``."""
        hits = np.flatnonzero(self.t == t)
        if not len(hits):
            raise KeyError(f"t={t} is not a checkpoint")
        return int(hits[0])


# --- reference optimum -----------------------------------------------------

def _svm_whole_space(problem, tol, max_epochs, seed):
    X, y, mu, n = problem.X, problem.y, problem.mu, problem.n
    C = 1.0 / (n * mu)
    alpha = np.zeros(n)
    w = np.zeros(problem.dim)
    rng = np.random.default_rng(seed)
    backend = kernels.get_backend()
    best = None
    done = 0
    chunk = 1
    while done < max_epochs:
        k = min(chunk, max_epochs - done)
        orders = np.ascontiguousarray(np.stack([rng.permutation(n) for _ in range(k)]),
                                      dtype=np.int64)
        backend.dual_cd_epochs(X, y, C, alpha, w, orders)
        done += k
        chunk = min(2 * chunk, 64)
        # rebuild w from alpha so accumulated drift cannot fake the certificate
        w = (alpha * y) @ X
        primal = objective_value(problem, w)
        dual = mu * (alpha.sum() - 0.5 * float(w @ w))
        gap = max(primal - dual, 0.0)
        if best is None or gap < best[2]:
            best = (w.copy(), primal, gap)
        if gap <= tol:
            break
    w_star, f_star, gap = best
    return ReferenceSolution(w_star, f_star, gap, gap <= tol, "dual-cd")


def _svm_constrained(problem, fset, tol, max_iter):
    """Accelerated projected gradient on the dual over a feasible set.

    With beta in [0, 1/n]^n and v = sum_i beta_i y_i x_i, the dual function is
    D(beta) = sum(beta) + min_{w in Q} (mu/2)||w||^2 - <v, w>, attained at
    w = P(v / mu); its gradient is 1 - y_i <x_i, P(v / mu)>.
    """
    X, y, mu, n = problem.X, problem.y, problem.mu, problem.n
    Z = y[:, None] * X
    lip = np.linalg.norm(Z, 2) ** 2 / mu
    hi = 1.0 / n

    def dual(beta):
        v = beta @ Z
        w = project(fset, v / mu)
        return beta.sum() + 0.5 * mu * float(w @ w) - float(v @ w), w

    beta = np.full(n, 0.5 * hi)
    z, s = beta.copy(), 1.0
    best = None
    for k in range(max_iter):
        _, wz = dual(z)
        nxt = np.clip(z + (1.0 - Z @ wz) / lip, 0.0, hi)
        s_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * s * s))
        z = nxt + ((s - 1.0) / s_next) * (nxt - beta)
        beta, s = nxt, s_next
        if k % 25 == 0 or k == max_iter - 1:
            dval, w = dual(beta)
            primal = objective_value(problem, w)
            gap = max(primal - dval, 0.0)
            if best is None or gap < best[2]:
                best = (w, primal, gap)
            if gap <= tol:
                break
    w_star, f_star, gap = best
    return ReferenceSolution(w_star, f_star, gap, gap <= tol, "dual-fista")


def _svm_scpda(problem, fset, tol, max_iter):
    """Deterministic SC-PDA, certified by its own bound B_t (a_k = gamma_k)."""
    ck = np.unique(np.rint(np.geomspace(1, max_iter, 200)).astype(np.int64))
    out = kernels.get_backend().run_loop(problem, fset, "scpda", schedules.LINEAR, int(max_iter),
                                         None, None, ck, None, False, 1.0)
    hit = np.flatnonzero(out["bound"] <= tol)
    k = int(hit[0]) if len(hit) else len(ck) - 1
    return ReferenceSolution(out["out_w"][k].copy(), float(out["out_f"][k]),
                             float(out["bound"][k]), bool(len(hit)), "scpda-bound")


def reference_optimum(problem: ProblemInstance, fset: FeasibleSet | None = None, tol=1e-10,
                      max_epochs=20000, seed=0, method="dual") -> ReferenceSolution:
    """Minimizer of ``problem`` over ``fset`` with an optimality certificate.

    With ``method="dual"`` the ``residual`` is a duality gap, so
    f(w_star) - min f <= residual holds regardless of how w_star was found.
    ``method="scpda"`` instead runs deterministic SC-PDA for up to
    ``max_epochs`` iterations and certifies with its bound; it is slow for
    small ``tol`` because that bound only decays like 1/t. When the budget
    runs out the best point is returned with ``certified=False``.
    """
    if not tol > 0:
        raise ContractError("tol must be positive")
    if method not in ("dual", "scpda"):
        raise ContractError(f"unknown reference method {method!r}")
    fset = fset or FeasibleSet()
    if problem.kind == QUADRATIC:
        w = project(fset, problem.center)
        return ReferenceSolution(w, objective_value(problem, w), 0.0, True, "closed-form")
    if method == "scpda":
        return _svm_scpda(problem, fset, tol, max_epochs)
    if fset.kind == WHOLE_SPACE:
        return _svm_whole_space(problem, tol, max_epochs, seed)
    return _svm_constrained(problem, fset, tol, 50 * max_epochs)


# --- bounds ----------------------------------------------------------------

def _weights_arrays(schedule, T):
    if isinstance(schedule, str):
        schedules.weights(schedule, 1)  # rejects unknown kinds
        t = np.arange(1, T + 1, dtype=np.float64)
        a = t if schedule == schedules.LINEAR else np.ones(T)
        return a, a
    a, gamma = (np.asarray(x, dtype=np.float64) for x in schedule)
    if a.shape != (T,) or gamma.shape != (T,):
        raise ContractError("weight arrays must have one entry per iteration")
    return a, gamma


def theorem2_bound_rhs(trace_or_gnorm2, mu, schedule) -> np.ndarray:
    """B_t = (1 / (2 A_t)) sum_{k<=t} a_k^2 / (mu Gamma_k) ||g_k||^2 for every t.

    ``schedule`` is a schedule kind or an ``(a, gamma)`` pair of arrays. The
    distance-to-optimum term of the bound is dropped, which is only valid
    when a_k == gamma_k for all k; anything else is rejected.
    """
    g2 = getattr(trace_or_gnorm2, "grad_norm_sq_all", trace_or_gnorm2)
    g2 = np.asarray(g2, dtype=np.float64)
    a, gamma = _weights_arrays(schedule, len(g2))
    if not np.array_equal(a, gamma):
        raise ContractError("bound needs a_k == gamma_k; the distance term would require w_*")
    A = np.cumsum(a, dtype=np.longdouble)
    Gam = np.cumsum(gamma, dtype=np.longdouble)
    terms = (a.astype(np.longdouble) ** 2) / (np.longdouble(mu) * Gam) * g2
    return np.asarray(np.cumsum(terms) / (2 * A), dtype=np.float64)


def theorem1_bound_rhs(trace_or_gnorm2, mu, schedule) -> np.ndarray:
    """Right-hand side for the a_k-weighted objective average of GDA.

    Same expression as :func:`theorem2_bound_rhs`; the two results differ
    only in what they bound.
    """
    return theorem2_bound_rhs(trace_or_gnorm2, mu, schedule)


# --- rates -----------------------------------------------------------------

def floor_gaps(gaps, floor):
    return np.maximum(np.asarray(gaps, dtype=np.float64), floor)


def loglog_slope(gaps, t_lo, t_hi, ts=None):
    """OLS fit of log(gap_t) on log(t) over t in [t_lo, t_hi].

    ``gaps[k]`` belongs to ``ts[k]``; ``ts`` defaults to 1, 2, ..., len(gaps).
    Returns ``(slope, r_squared)``.
    """
    gaps = np.asarray(gaps, dtype=np.float64)
    ts = np.arange(1, len(gaps) + 1) if ts is None else np.asarray(ts)
    if t_hi < 2 * t_lo:
        raise ContractError(f"window [{t_lo}, {t_hi}] is narrower than a factor of two")
    sel = (ts >= t_lo) & (ts <= t_hi)
    if sel.sum() < 3:
        raise ContractError("fewer than three points in the fit window")
    bad = sel & ~(gaps > 0)
    if bad.any():
        first = ts[np.flatnonzero(bad)[0]]
        raise ContractError(f"nonpositive gap at t={first}; cannot take its logarithm")
    fit = stats.linregress(np.log(ts[sel]), np.log(gaps[sel]))
    return float(fit.slope), float(fit.rvalue ** 2)


# --- SC-PDA descent inequality along a trajectory ----------------------------

@dataclass(eq=False)
class ScPdaHistory:
    """Full SC-PDA trajectory: w_t, w_t^+, g_t, f(w_t), a_t, A_t for t = 1..T.

    ``f_drop[k]`` optionally holds f(w_k) - f(w_{k+1}) computed without
    cancellation; when absent it is taken from ``f``.
    """

    w: np.ndarray
    w_plus: np.ndarray
    g: np.ndarray
    f: np.ndarray
    a: np.ndarray
    A: np.ndarray
    f_drop: np.ndarray | None = None


def record_scpda_history(problem, fset, iters, schedule="linear", w0=None,
                         stochastic=False, seed=0) -> ScPdaHistory:
    """Run SC-PDA through the step API, keeping every iterate."""
    d = problem.dim
    state = optimizers.init_state("scpda", d, fset, w0, schedule)
    idx = sample_indices(problem, iters, seed) if stochastic else None
    W, WP, G = np.empty((iters, d)), np.empty((iters, d)), np.empty((iters, d))
    F, a, A = np.empty(iters), np.empty(iters), np.empty(iters)
    for k in range(iters):
        w = state.w
        g = example_subgradient(problem, w, int(idx[k])) if stochastic else full_subgradient(problem, w)
        a[k], A[k] = state.sched.a, state.sched.A
        state = optimizers.scpda_step(state, problem, fset, g)
        W[k], WP[k], G[k] = w, state.w_plus, g.vector
        F[k] = objective_value(problem, w)
    drop = np.array([objective_difference(problem, W[k], W[k + 1]) for k in range(iters - 1)])
    return ScPdaHistory(W, WP, G, F, a, A, drop)


def lemma3_violations(history: ScPdaHistory) -> np.ndarray:
    """LHS - RHS of the SC-PDA descent inequality for t = 2..T."""
    if history is None or getattr(history, "w_plus", None) is None:
        raise ContractError("trace has no inner iterates")
    h = history
    g = h.g[1:]
    lhs = h.a[1:] * np.einsum("ij,ij->i", g, h.w[1:] - h.w_plus[1:])
    drop = h.f[:-1] - h.f[1:] if h.f_drop is None else h.f_drop
    rhs = (h.A[:-1] * drop
           + h.a[1:] * np.einsum("ij,ij->i", g, h.w_plus[:-1] - h.w_plus[1:]))
    return lhs - rhs


def verify_lemma3(history: ScPdaHistory, problem=None) -> float:
    """Largest violation of the SC-PDA descent inequality (<= 0 when it holds)."""
    if history is None or not isinstance(history, ScPdaHistory):
        raise ContractError("trace has no inner iterates")
    if len(history.f) < 2:
        return float("-inf")
    return float(lemma3_violations(history).max())
