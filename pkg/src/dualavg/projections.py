"""Feasible sets and Euclidean projection onto them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError

WHOLE_SPACE = "whole_space"
L2_BALL = "l2_ball"
BOX = "box"


@dataclass(frozen=True, eq=False)
class FeasibleSet:
    kind: str = WHOLE_SPACE
    radius: float | None = None
    lower: np.ndarray | float | None = None
    upper: np.ndarray | float | None = None

    def __post_init__(self):
        if self.kind == L2_BALL:
            if self.radius is None or not self.radius > 0:
                raise ContractError(f"ball radius must be positive, got {self.radius!r}")
        elif self.kind == BOX:
            if self.lower is None or self.upper is None:
                raise ContractError("box needs lower and upper bounds")
            if np.any(np.asarray(self.lower) > np.asarray(self.upper)):
                raise ContractError("box bounds must satisfy lower <= upper")
        elif self.kind != WHOLE_SPACE:
            raise ContractError(f"unknown feasible set kind {self.kind!r}")

    def __str__(self):
        if self.kind == L2_BALL:
            return f"ball:{self.radius:g}"
        if self.kind == BOX:
            lo, hi = np.asarray(self.lower), np.asarray(self.upper)
            if lo.ndim == 0 and hi.ndim == 0:
                return f"box:{float(lo):g}:{float(hi):g}"
            return "box"
        return "free"


def whole_space():
    return FeasibleSet(WHOLE_SPACE)


def l2_ball(radius):
    return FeasibleSet(L2_BALL, radius=float(radius))


def box(lower, upper):
    def _bound(b):
        b = np.asarray(b, dtype=np.float64)
        return float(b) if b.ndim == 0 else b.copy()
    return FeasibleSet(BOX, lower=_bound(lower), upper=_bound(upper))


def parse_feasible_set(text: str) -> FeasibleSet:
    """Parse ``free``, ``ball:R`` or ``box:lo:hi``."""
    parts = text.strip().split(":")
    try:
        if parts == ["free"]:
            return whole_space()
        if parts[0] == "ball" and len(parts) == 2:
            return l2_ball(float(parts[1]))
        if parts[0] == "box" and len(parts) == 3:
            return box(float(parts[1]), float(parts[2]))
    except ValueError as exc:
        raise ContractError(f"bad feasible set {text!r}: {exc}") from None
    raise ContractError(f"bad feasible set {text!r}; expected free, ball:R or box:lo:hi")


def _check_finite(v):
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ContractError("projection input must be finite")
    return v


def project(fset: FeasibleSet, v) -> np.ndarray:
    """Euclidean projection of ``v`` onto ``fset``.

    Points already inside the set are returned unchanged, which makes the
    operator exactly idempotent.
    """
    v = _check_finite(v)
    if fset.kind == WHOLE_SPACE:
        return v.copy()
    if fset.kind == BOX:
        return np.clip(v, fset.lower, fset.upper)
    R = fset.radius
    nrm = np.linalg.norm(v)
    if nrm <= R:
        return v.copy()
    out = v * (R / nrm)
    # rounding can leave ||out|| a few ulps above R
    while np.linalg.norm(out) > R:
        out = out * (1.0 - np.finfo(np.float64).eps)
    return out


def contains(fset: FeasibleSet, v, tol=0.0) -> bool:
    v = _check_finite(v)
    if fset.kind == WHOLE_SPACE:
        return True
    if fset.kind == L2_BALL:
        return bool(np.linalg.norm(v) <= fset.radius + tol)
    return bool(np.all(v >= np.asarray(fset.lower) - tol) and np.all(v <= np.asarray(fset.upper) + tol))


def svm_ball(mu: float, max_slope: float = 1.0) -> FeasibleSet:
    """Ball of radius ``max_slope / mu`` that contains the SVM minimizer.

    At the optimum mu*w_* equals minus a convex combination of loss
    subgradients, each of norm at most ``max_slope`` (the largest ||x_i||).
    """
    return l2_ball(max_slope / mu)
