"""Step-update state machines for GDA, SC-PDA and the baseline methods.

Every optimizer consumes one :class:`~dualavg.problems.GradientSample`
evaluated at ``state.w`` and returns a fresh state; states are never
mutated in place, so a sequence of states doubles as a replayable history.

Running sums that grow like t^2 (the gamma-weighted iterate sum and the
a-weighted gradient sum) are kept in ``np.longdouble`` and only divided by
Gamma_t when the next point is read out.

Index convention: a state built by :func:`init_state` holds w_1 with its
schedule already advanced to t = 1. Each step uses the weights of the
current t and leaves the schedule at t + 1.
"""
from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, replace

import numpy as np

from . import schedules
from .errors import ContractError
from .projections import FeasibleSet, project
from .schedules import ScheduleAccumulator, advance

ALGORITHMS = ("gda", "scpda", "pegasos", "papsg", "scrda", "da")

_acc = np.longdouble

# Test hook: names of deliberately broken behaviours currently switched on.
_FAULTS: set = set()
FAULT_GDA_SIGN = "gda_sign"


@contextmanager
def inject_fault(name):
    """Temporarily corrupt an update (mutation check for the verify suites).

    Only the pure-Python step path honours faults; callers must force the
    ``python`` backend while a fault is active.
    """
    if name != FAULT_GDA_SIGN:
        raise ContractError(f"unknown fault {name!r}")
    _FAULTS.add(name)
    try:
        yield
    finally:
        _FAULTS.discard(name)


def _zeros(d):
    return np.zeros(d, dtype=_acc)


def _read(total, scale):
    return np.asarray(total / scale, dtype=np.float64)


def _require_weights(sched: ScheduleAccumulator):
    if sched.t < 1 or sched.Gamma == 0:
        raise ContractError("schedule must be advanced (t >= 1, Gamma_t > 0) before a step")


@dataclass(frozen=True, eq=False)
class GdaState:
    w: np.ndarray
    primal_sum: np.ndarray       # sum_k gamma_k w_k
    grad_sum: np.ndarray         # sum_k a_k g_k
    sched: ScheduleAccumulator
    averaged_num: np.ndarray     # sum_k a_k w_k
    averaged_den: int            # A_t of the averaged output

    def weighted_sum(self, mu):
        """S_t = sum_k (gamma_k w_k - (a_k / mu) g_k)."""
        return self.primal_sum - self.grad_sum / mu


@dataclass(frozen=True, eq=False)
class ScPdaState:
    w: np.ndarray                # primal average, where gradients are taken
    w_plus: np.ndarray           # latest inner iterate
    primal_sum: np.ndarray
    grad_sum: np.ndarray
    sched: ScheduleAccumulator

    def weighted_sum(self, mu):
        return self.primal_sum - self.grad_sum / mu


@dataclass(frozen=True, eq=False)
class PegasosState:
    w: np.ndarray
    t: int = 1


@dataclass(frozen=True, eq=False)
class PaPsgState:
    w: np.ndarray
    w_plus_prev: np.ndarray
    sched: ScheduleAccumulator


@dataclass(frozen=True, eq=False)
class ScRdaState:
    w: np.ndarray
    grad_sum: np.ndarray         # sum of loss-part subgradients
    t: int = 1


@dataclass(frozen=True, eq=False)
class DaState:
    w: np.ndarray
    grad_sum: np.ndarray         # sum_k a_k g_k
    sched: ScheduleAccumulator
    gamma_scale: float = 1.0

    def gamma(self):
        """Prox weight gamma_t = gamma_scale * A_t / sqrt(t).

        With unit weights this is the usual gamma_scale * sqrt(t); with
        a_t = t it keeps the effective step a_t / gamma_t of order 1/sqrt(t).
        """
        return self.gamma_scale * self.sched.A / np.sqrt(self.sched.t)


def init_state(algo, dim, fset: FeasibleSet, w0=None, schedule="linear", da_gamma=1.0):
    """Optimizer state holding w_1 = P(w0) (zero vector by default)."""
    w = np.zeros(dim) if w0 is None else np.asarray(w0, dtype=np.float64)
    if w.shape != (dim,):
        raise ContractError(f"initial point must have length {dim}")
    w = project(fset, w)
    sched = advance(schedules.fresh(schedule))
    if algo == "gda":
        return GdaState(w, _zeros(dim), _zeros(dim), sched, _zeros(dim), 0)
    if algo == "scpda":
        return ScPdaState(w, w.copy(), _zeros(dim), _zeros(dim), sched)
    if algo == "pegasos":
        return PegasosState(w, 1)
    if algo == "papsg":
        return PaPsgState(w, w.copy(), sched)
    if algo == "scrda":
        return ScRdaState(w, _zeros(dim), 1)
    if algo == "da":
        if not da_gamma > 0:
            raise ContractError("da_gamma must be positive")
        return DaState(w, _zeros(dim), sched, float(da_gamma))
    raise ContractError(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")


def _inner_average(primal_sum, grad_sum, sched, mu, w, g, fset):
    primal_sum = primal_sum + _acc(sched.gamma) * w
    grad_sum = grad_sum + _acc(sched.a) * g.vector
    point = project(fset, _read(primal_sum - grad_sum / _acc(mu), sched.Gamma))
    return primal_sum, grad_sum, point


def _primal_average(sched, w, w_plus):
    """w_{t+1} = (A_t w_t + a_{t+1} w_t^+) / A_{t+1}; returns it and the next schedule."""
    nxt = advance(sched)
    return (sched.A / nxt.A) * w + (nxt.a / nxt.A) * w_plus, nxt


def gda_step(state: GdaState, problem, fset: FeasibleSet, g) -> GdaState:
    sched = state.sched
    _require_weights(sched)
    if FAULT_GDA_SIGN in _FAULTS:
        g = replace(g, vector=-g.vector)
    primal_sum, grad_sum, w_next = _inner_average(state.primal_sum, state.grad_sum, sched,
                                                  problem.mu, state.w, g, fset)
    return GdaState(w_next, primal_sum, grad_sum, advance(sched),
                    state.averaged_num + _acc(sched.a) * state.w,
                    state.averaged_den + sched.a)


def gda_averaged_output(state: GdaState) -> np.ndarray:
    """a_k-weighted average sum_k a_k w_k / A_t of the iterates consumed so far."""
    if state.averaged_den == 0:
        raise ContractError("no GDA steps taken yet")
    return _read(state.averaged_num, state.averaged_den)


def scpda_step(state: ScPdaState, problem, fset: FeasibleSet, g) -> ScPdaState:
    sched = state.sched
    _require_weights(sched)
    primal_sum, grad_sum, w_plus = _inner_average(state.primal_sum, state.grad_sum, sched,
                                                  problem.mu, state.w, g, fset)
    w_next, nxt = _primal_average(sched, state.w, w_plus)
    return ScPdaState(w_next, w_plus, primal_sum, grad_sum, nxt)


def pegasos_step(state: PegasosState, fset: FeasibleSet, mu, g) -> PegasosState:
    w = project(fset, state.w - (1.0 / (mu * state.t)) * g.vector)
    return PegasosState(w, state.t + 1)


def papsg_delta(a, mu):
    return 1.0 / (1.0 + a * mu)


def papsg_step(state: PaPsgState, fset: FeasibleSet, mu, g) -> PaPsgState:
    sched = state.sched
    _require_weights(sched)
    delta = papsg_delta(sched.a, mu)
    w_plus = project(fset, delta * state.w_plus_prev
                     - (sched.a * delta) * (g.vector - mu * state.w))
    w_next, nxt = _primal_average(sched, state.w, w_plus)
    return PaPsgState(w_next, w_plus, nxt)


def scrda_step(state: ScRdaState, fset: FeasibleSet, mu, g):
    """Closed-form RDA step with r(w) = (mu/2)||w||^2 and no extra prox term.

    Only the loss part ``g - mu*w`` of the subgradient enters the dual
    average; the regularizer is handled exactly by the argmin.
    """
    grad_sum = state.grad_sum + (g.vector - mu * state.w)
    w = project(fset, _read(-grad_sum, _acc(mu) * state.t))
    return ScRdaState(w, grad_sum, state.t + 1), w


def da_step(state: DaState, fset: FeasibleSet, g):
    sched = state.sched
    if sched.t < 1:
        raise ContractError("schedule must be advanced before a DA step")
    gamma = state.gamma()
    if gamma == 0:
        raise ContractError("gamma_t is zero")
    grad_sum = state.grad_sum + _acc(sched.a) * g.vector
    w = project(fset, _read(-grad_sum, gamma))
    return DaState(w, grad_sum, advance(sched), state.gamma_scale), w


def step(algo, state, problem, fset, g):
    """Uniform dispatch: one gradient in, next state out."""
    if algo == "gda":
        return gda_step(state, problem, fset, g)
    if algo == "scpda":
        return scpda_step(state, problem, fset, g)
    if algo == "pegasos":
        return pegasos_step(state, fset, problem.mu, g)
    if algo == "papsg":
        return papsg_step(state, fset, problem.mu, g)
    if algo == "scrda":
        return scrda_step(state, fset, problem.mu, g)[0]
    if algo == "da":
        return da_step(state, fset, g)[0]
    raise ContractError(f"unknown algorithm {algo!r}")
