"""Invariant suites behind ``dualavg verify``.

Each suite is a function returning a list of :class:`Check` rows. Suites
take their sizes as keyword arguments so the CLI can run quick versions
while the test suite runs the full-size ones.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import analysis, optimizers, runner, schedules
from .problems import (full_subgradient, make_synthetic_svm, objective_value,
                       random_quadratic)
from .projections import box, contains, l2_ball, project, whole_space

TOL_BOUND = 1e-8


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    passed: bool
    value: float
    limit: float

    def row(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  {self.suite:<10} {self.name:<44} {self.value: .3e}  (limit {self.limit:.1e})"


def _check(suite, name, value, limit):
    value = float(value)
    return Check(suite, name, bool(value <= limit), value, float(limit))


# --- projections -----------------------------------------------------------

def _random_inside(fset, rng, d):
    u = project(fset, rng.normal(scale=3.0, size=d))
    # pull strictly inside half of the time so interior points are covered too
    return u * rng.uniform(0.2, 1.0) if fset.kind == "l2_ball" and rng.random() < 0.5 else u


def suite_lemma1(trials=1000, seed=0):
    """<v - P(v), u - P(v)> <= 0 for u in Q, plus idempotence and nonexpansiveness."""
    rng = np.random.default_rng(seed)
    worst_vi = worst_idem = worst_ne = 0.0
    sets = [l2_ball(1.0), l2_ball(2.5), box(-0.5, 1.0), box(np.array([0.0, -1, -2, 0, 1]),
                                                           np.array([1.0, 1, 0, 0, 3]))]
    for k in range(trials):
        fset = sets[k % len(sets)]
        d = 5
        v = rng.normal(scale=4.0, size=d)
        pv = project(fset, v)
        u = _random_inside(fset, rng, d)
        worst_vi = max(worst_vi, float((v - pv) @ (u - pv)))
        worst_idem = max(worst_idem, float(np.max(np.abs(project(fset, pv) - pv))))
        v2 = rng.normal(scale=4.0, size=d)
        worst_ne = max(worst_ne, float(np.linalg.norm(pv - project(fset, v2))
                                       - np.linalg.norm(v - v2)))
        if not contains(fset, pv, 1e-12):
            worst_vi = np.inf
    return [_check("lemma1", f"variational inequality ({trials} draws)", worst_vi, 1e-9),
            _check("lemma1", "idempotence (exact)", worst_idem, 0.0),
            _check("lemma1", "nonexpansive", worst_ne, 1e-12)]


# --- argmin equivalence --------------------------------------------------------

def _gda_closed_form_error(rng, d=5, steps=10):
    prob = random_quadratic(d, seed=int(rng.integers(2**31)), mu=float(rng.uniform(0.1, 3.0)))
    fset = whole_space()
    kind = schedules.LINEAR if rng.random() < 0.5 else schedules.CONSTANT
    state = optimizers.init_state("gda", d, fset, rng.normal(size=d), kind)
    ws, gs = [], []
    for _ in range(steps):
        g = full_subgradient(prob, state.w)
        ws.append(state.w)
        gs.append(g.vector)
        state = optimizers.gda_step(state, prob, fset, g)
    t = np.arange(1, steps + 1, dtype=np.float64)
    a = t if kind == schedules.LINEAR else np.ones(steps)
    mu = prob.mu
    direct = (mu * (a @ np.array(ws)) - a @ np.array(gs)) / (mu * a.sum())
    return float(np.linalg.norm(state.w - direct) / max(np.linalg.norm(direct), 1e-300))


def _golden_ball_argmin(objective, radius):
    """Minimize a 2-d convex function over the disc by nested golden-section search."""
    opts = {"xatol": 1e-9}

    def inner(x):
        h = np.sqrt(max(radius * radius - x * x, 0.0))
        r = minimize_scalar(lambda y: objective(np.array([x, y])), bounds=(-h, h),
                            method="bounded", options=opts)
        return r.fun, r.x

    res = minimize_scalar(lambda x: inner(x)[0], bounds=(-radius, radius), method="bounded",
                          options=opts)
    return np.array([res.x, inner(res.x)[1]])


def _grid_ball_argmin(objective, radius, n=801):
    xs = np.linspace(-radius, radius, n)
    best, best_pt = np.inf, None
    for x in xs:
        for y in xs:
            if x * x + y * y <= radius * radius:
                val = objective(np.array([x, y]))
                if val < best:
                    best, best_pt = val, (x, y)
    return np.array(best_pt)


def _oracle_argmin(objective, radius):
    # coarse grid to locate the basin, golden section to refine
    coarse = _grid_ball_argmin(objective, radius, n=41)
    fine = _golden_ball_argmin(objective, radius)
    return fine if objective(fine) <= objective(coarse) + 1e-12 else coarse


def suite_argmin(instances=100, oracle_runs=3, seed=0):
    rng = np.random.default_rng(seed)
    gda_err = max(_gda_closed_form_error(rng) for _ in range(instances))

    da_err = rda_err = 0.0
    radius = 1.0
    fset = l2_ball(radius)
    for _ in range(oracle_runs):
        prob = make_synthetic_svm(30, 2, seed=int(rng.integers(2**31)), mu=float(rng.uniform(0.5, 2)))
        mu = prob.mu
        # DA: iterate minimizes <sum a_k g_k, w> + gamma_t/2 ||w||^2 over the ball
        state = optimizers.init_state("da", 2, fset, schedule=schedules.CONSTANT, da_gamma=0.7)
        total = np.zeros(2)
        for _ in range(5):
            g = full_subgradient(prob, state.w)
            gamma = state.gamma()
            total = total + state.sched.a * g.vector
            state, w = optimizers.da_step(state, fset, g)
            ref = _oracle_argmin(lambda u: total @ u + 0.5 * gamma * (u @ u), radius)
            da_err = max(da_err, float(np.linalg.norm(w - ref)))
        # SC-RDA: iterate minimizes (1/t)<sum l_k, w> + (mu/2)||w||^2 over the ball
        state = optimizers.init_state("scrda", 2, fset)
        total = np.zeros(2)
        for t in range(1, 6):
            g = full_subgradient(prob, state.w)
            total = total + (g.vector - mu * state.w)
            state, w = optimizers.scrda_step(state, fset, mu, g)
            ref = _oracle_argmin(lambda u: (total @ u) / t + 0.5 * mu * (u @ u), radius)
            rda_err = max(rda_err, float(np.linalg.norm(w - ref)))
    return [_check("argmin", f"GDA closed form, whole space ({instances} inst.)", gda_err, 1e-10),
            _check("argmin", "DA vs search oracle on a disc", da_err, 1e-4),
            _check("argmin", "SC-RDA vs search oracle on a disc", rda_err, 1e-4)]


# --- descent inequality along SC-PDA trajectories ------------------------------

def suite_lemma3(iters=10_000, seed=0):
    svm = make_synthetic_svm(200, 20, seed=seed)
    quad = random_quadratic(20, seed=seed)
    out = []
    for label, prob in (("synthetic SVM", svm), ("random quadratic", quad)):
        hist = analysis.record_scpda_history(prob, whole_space(), iters, w0=np.ones(prob.dim))
        out.append(_check("lemma3", f"max violation, {label}, {iters} steps",
                          analysis.verify_lemma3(hist), 1e-8))
    return out


# --- bound validity ------------------------------------------------------------

def _bound_problem(seed):
    prob = make_synthetic_svm(200, 20, seed=seed)
    return prob, analysis.reference_optimum(prob)


def suite_theorem1(iters=10_000, seed=0, backend=None):
    prob, ref = _bound_problem(seed)
    tr = runner.run(prob, whole_space(), "gda", iters, f_star=ref.f_star, backend=backend,
                    track_weighted=True)
    rhs = analysis.theorem1_bound_rhs(tr, prob.mu, schedules.LINEAR)[tr.t - 1]
    return [_check("theorem1", f"GDA weighted gap - bound, {iters} steps",
                   np.max(tr.weighted_gap - rhs), TOL_BOUND)]


def suite_theorem2(iters=10_000, seed=0, backend=None):
    prob, ref = _bound_problem(seed)
    tr = runner.run(prob, whole_space(), "scpda", iters, f_star=ref.f_star, backend=backend)
    rhs = analysis.theorem2_bound_rhs(tr, prob.mu, schedules.LINEAR)[tr.t - 1]
    return [_check("theorem2", f"SC-PDA gap - bound, {iters} steps", np.max(tr.gap - rhs),
                   TOL_BOUND),
            _check("theorem2", "in-loop bound vs recomputed",
                   np.max(np.abs(tr.bound_rhs - rhs) / np.maximum(rhs, 1e-300)), 1e-12)]


# --- unit-weight reduction -------------------------------------------------------

def unit_weight_trajectory(prob, w1, steps):
    """Direct unit-weight update: w_{t+1} = argmin <sum g_k, w> + (mu/2) sum ||w - w_k||^2.

    On the whole space the argmin is (sum w_k - sum g_k / mu) / t.
    """
    mu = np.longdouble(prob.mu)
    sum_w = np.zeros(prob.dim, dtype=np.longdouble)
    sum_g = np.zeros(prob.dim, dtype=np.longdouble)
    w = np.array(w1, dtype=np.float64)
    traj = [w]
    for t in range(1, steps + 1):
        g = full_subgradient(prob, w).vector
        sum_w = sum_w + w
        sum_g = sum_g + g
        w = np.asarray((sum_w - sum_g / mu) / t, dtype=np.float64)
        traj.append(w)
    return np.array(traj)


def gda_trajectory(prob, fset, w1, steps, schedule):
    state = optimizers.init_state("gda", prob.dim, fset, w1, schedule)
    traj = [state.w]
    for _ in range(steps):
        state = optimizers.gda_step(state, prob, fset, full_subgradient(prob, state.w))
        traj.append(state.w)
    return np.array(traj)


def suite_reduction(steps=1000, problems=3, seed=0):
    out = []
    for k in range(problems):
        prob = random_quadratic(6, seed=seed + k, mu=0.5 + k)
        w1 = np.random.default_rng(seed + 100 + k).normal(size=6)
        a = gda_trajectory(prob, whole_space(), w1, steps, schedules.CONSTANT)
        b = unit_weight_trajectory(prob, w1, steps)
        mismatched = int(np.count_nonzero(a != b))
        out.append(_check("reduction", f"constant-weight GDA bitwise, quad #{k}", mismatched, 0))
    return out


# --- replay oracles --------------------------------------------------------------

def suite_replay(steps=10, seed=0):
    rng = np.random.default_rng(seed)
    prob = random_quadratic(5, seed=seed, mu=0.8)
    fset = l2_ball(1.5)
    w1 = rng.normal(size=5)

    # GDA: S_t rebuilt from the explicit history
    state = optimizers.init_state("gda", 5, fset, w1, schedules.LINEAR)
    hist_w, hist_g = [], []
    for _ in range(steps):
        g = full_subgradient(prob, state.w)
        hist_w.append(state.w)
        hist_g.append(g.vector)
        state = optimizers.gda_step(state, prob, fset, g)
    t = np.arange(1, steps + 1, dtype=np.float64)
    explicit = sum(t[k] * (hist_w[k] - hist_g[k] / prob.mu) for k in range(steps))
    s_t = np.asarray(state.weighted_sum(prob.mu), dtype=np.float64)
    gda_err = np.linalg.norm(s_t - explicit) / np.linalg.norm(explicit)
    w_expect = project(fset, explicit / t.sum())
    gda_w_err = np.linalg.norm(state.w - w_expect)

    # SC-PDA: w_t as a convex combination of w_1 and past inner iterates
    state = optimizers.init_state("scpda", 5, fset, w1, schedules.LINEAR)
    inner = []
    for _ in range(steps):
        state = optimizers.scpda_step(state, prob, fset, full_subgradient(prob, state.w))
        inner.append(state.w_plus)
    A_next = (steps + 1) * (steps + 2) / 2
    coef = np.concatenate([[1.0], np.arange(2, steps + 2)]) / A_next
    expanded = coef[0] * w1 + sum(coef[k + 1] * inner[k] for k in range(steps))
    pda_err = np.linalg.norm(state.w - expanded)

    # bound right-hand side against a plain double loop
    g2 = rng.uniform(0, 5, size=steps)
    got = analysis.theorem2_bound_rhs(g2, prob.mu, schedules.LINEAR)
    want = []
    for T in range(1, steps + 1):
        acc = 0.0
        for k in range(1, T + 1):
            acc += k * k / (prob.mu * (k * (k + 1) / 2)) * g2[k - 1]
        want.append(acc / (2 * T * (T + 1) / 2))
    bound_err = np.max(np.abs(got - np.array(want)) / np.array(want))

    return [_check("replay", "GDA running sum vs explicit history", gda_err, 1e-9),
            _check("replay", "GDA iterate vs projected explicit sum", gda_w_err, 1e-12),
            _check("replay", "SC-PDA recursion expansion", pda_err, 1e-12),
            _check("replay", "SC-PDA coefficients sum to one", abs(coef.sum() - 1.0), 1e-12),
            _check("replay", "bound RHS vs direct summation", bound_err, 1e-12)]


SUITES = {
    "lemma1": suite_lemma1,
    "argmin": suite_argmin,
    "lemma3": suite_lemma3,
    "theorem1": suite_theorem1,
    "theorem2": suite_theorem2,
    "reduction": suite_reduction,
    "replay": suite_replay,
}
ALIASES = {"lemma2": "argmin", "bounds": ("theorem1", "theorem2"), "all": tuple(SUITES)}


def resolve(selector: str):
    """Suite names for a comma-separated selector such as ``lemma3`` or ``all``."""
    names = []
    for part in selector.split(","):
        part = part.strip()
        target = ALIASES.get(part, part)
        for name in ((target,) if isinstance(target, str) else target):
            if name not in SUITES:
                raise KeyError(part)
            if name not in names:
                names.append(name)
    return names


def run_suites(names, backend=None, quick=True):
    checks = []
    for name in names:
        fn = SUITES[name]
        kwargs = {}
        if name in ("theorem1", "theorem2"):
            kwargs["backend"] = backend
        if quick and name == "lemma3":
            kwargs["iters"] = 2000
        checks.extend(fn(**kwargs))
    return checks
