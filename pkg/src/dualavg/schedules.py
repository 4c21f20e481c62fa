"""Weight sequences a_t, gamma_t and their running sums A_t, Gamma_t.

Only the two schedules with a_t == gamma_t are provided: ``linear``
(a_t = gamma_t = t) and ``constant`` (a_t = gamma_t = 1). With a_t == gamma_t
the distance term of the convergence bounds vanishes, which is what lets the
bound be evaluated without knowing the optimum.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ContractError

LINEAR = "linear"
CONSTANT = "constant"
KINDS = (LINEAR, CONSTANT)


def weights(kind: str, t: int) -> tuple[int, int]:
    """(a_t, gamma_t) for iteration ``t`` >= 1."""
    if kind == LINEAR:
        return t, t
    if kind == CONSTANT:
        return 1, 1
    raise ContractError(f"unknown schedule {kind!r}; expected one of {KINDS}")


def a_equals_gamma(kind: str) -> bool:
    a, g = weights(kind, 2)
    return a == g


@dataclass(frozen=True)
class ScheduleAccumulator:
    kind: str = LINEAR
    t: int = 0
    a: int = 0
    gamma: int = 0
    A: int = 0
    Gamma: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractError(f"unknown schedule {self.kind!r}; expected one of {KINDS}")


def fresh(kind: str = LINEAR) -> ScheduleAccumulator:
    return ScheduleAccumulator(kind)


def advance(sched: ScheduleAccumulator) -> ScheduleAccumulator:
    t = sched.t + 1
    a, g = weights(sched.kind, t)
    return ScheduleAccumulator(sched.kind, t, a, g, sched.A + a, sched.Gamma + g)


def step_size(sched: ScheduleAccumulator, mu: float) -> float:
    """Gradient step a_t / (mu * gamma_t) used inside the weighted average."""
    if sched.t < 1:
        raise ContractError("schedule has not been advanced; weights are undefined at t=0")
    return sched.a / (mu * sched.gamma)
