"""Problem instances and their subgradient oracles.

Two families are supported:

``svm_hinge``
    f(w) = (mu/2)||w||^2 + (1/n) sum_i max(0, 1 - y_i <w, x_i>)

``quadratic``
    f(w) = (mu/2)||w - center||^2

The hinge loss is averaged over the examples rather than summed, so that a
single uniformly sampled example gives an unbiased estimate of the loss
subgradient (the usual Pegasos formulation). At a margin of exactly one the
loss subgradient is taken to be zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ContractError

SVM_HINGE = "svm_hinge"
QUADRATIC = "quadratic"


def _frozen(a, dtype=np.float64):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Immutable strongly convex objective with its oracles' data.

    Use :func:`svm_problem`, :func:`quadratic_problem` or
    :func:`make_synthetic_svm` rather than calling this directly.
    """

    kind: str
    mu: float
    dim: int
    X: np.ndarray | None = None
    y: np.ndarray | None = None
    center: np.ndarray | None = None
    planted: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        if not (self.mu > 0 and np.isfinite(self.mu)):
            raise ContractError(f"mu must be positive and finite, got {self.mu!r}")
        if self.dim < 1:
            raise ContractError(f"dim must be >= 1, got {self.dim}")
        if self.kind == SVM_HINGE:
            if self.X is None or self.y is None:
                raise ContractError("svm_hinge problem needs X and y")
            if self.X.ndim != 2 or self.X.shape[1] != self.dim:
                raise ContractError(f"X must have shape (n, {self.dim}), got {self.X.shape}")
            if self.y.shape != (self.X.shape[0],):
                raise ContractError("y must have one label per row of X")
            if not np.all(np.abs(self.y) == 1.0):
                raise ContractError("labels must be -1 or +1")
        elif self.kind == QUADRATIC:
            if self.center is None or self.center.shape != (self.dim,):
                raise ContractError(f"quadratic problem needs a center of length {self.dim}")
        else:
            raise ContractError(f"unknown problem kind {self.kind!r}")

    @property
    def n(self) -> int:
        return 0 if self.X is None else self.X.shape[0]

    @property
    def examples(self):
        """The training set as ``(feature_vector, label)`` pairs."""
        if self.kind != SVM_HINGE:
            return []
        return [(self.X[i], int(self.y[i])) for i in range(self.n)]


@dataclass(frozen=True)
class GradientSample:
    vector: np.ndarray
    norm_sq: float
    sampled_index: int | None = None


def _gradient(vector, index=None):
    vector = np.asarray(vector, dtype=np.float64)
    return GradientSample(vector, float(vector @ vector), index)


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Running maxima of ||g_t|| and ||w_t - w_*|| over a run."""

    max_grad_norm: float = 0.0
    max_dist_to_opt: float = 0.0

    def update(self, grad_norm, dist_to_opt=0.0):
        return DiagnosticsRecord(max(self.max_grad_norm, float(grad_norm)),
                                 max(self.max_dist_to_opt, float(dist_to_opt)))


def svm_problem(X, y, mu, name=""):
    X = _frozen(X)
    if X.ndim != 2:
        raise ContractError("X must be a 2-d array")
    return ProblemInstance(SVM_HINGE, float(mu), X.shape[1], X=X, y=_frozen(y),
                           name=name)


def quadratic_problem(center, mu):
    center = _frozen(center)
    if center.ndim != 1:
        raise ContractError("center must be a vector")
    return ProblemInstance(QUADRATIC, float(mu), center.shape[0], center=center,
                           name=f"quad{center.shape[0]}")


def random_quadratic(d, seed=0, mu=1.0):
    """Quadratic with a standard-normal center drawn from ``seed``."""
    if d < 1:
        raise ContractError(f"d must be >= 1, got {d}")
    center = np.random.default_rng(seed).standard_normal(d)
    return quadratic_problem(center, mu)


def _check_point(problem, w):
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (problem.dim,):
        raise ContractError(f"expected a vector of length {problem.dim}, got shape {w.shape}")
    return w


def objective_value(problem: ProblemInstance, w) -> float:
    w = _check_point(problem, w)
    if problem.kind == QUADRATIC:
        r = w - problem.center
        return 0.5 * problem.mu * float(r @ r)
    margins = problem.y * (problem.X @ w)
    hinge = np.maximum(0.0, 1.0 - margins)
    return 0.5 * problem.mu * float(w @ w) + float(hinge.mean())


def objective_difference(problem: ProblemInstance, u, v) -> float:
    """f(u) - f(v), evaluated from u - v so nearby points keep their digits.

    Subtracting two rounded objective values loses everything below
    ~1e-16 * f; here each term is formed from the difference vector
    directly, so the error scales with ||u - v|| instead.
    """
    u, v = _check_point(problem, u), _check_point(problem, v)
    delta = u - v
    if problem.kind == QUADRATIC:
        return 0.5 * problem.mu * float(delta @ (u + v - 2.0 * problem.center))
    reg = 0.5 * problem.mu * float(delta @ (u + v))
    mu_, mv = problem.y * (problem.X @ u), problem.y * (problem.X @ v)
    dm = problem.y * (problem.X @ delta)          # mu_ - mv, without cancellation
    both = (mu_ < 1.0) & (mv < 1.0)
    mixed = (mu_ < 1.0) != (mv < 1.0)
    hinge = -dm[both].sum() + (np.maximum(0.0, 1.0 - mu_[mixed])
                               - np.maximum(0.0, 1.0 - mv[mixed])).sum()
    return reg + hinge / problem.n


def full_subgradient(problem: ProblemInstance, w) -> GradientSample:
    w = _check_point(problem, w)
    if problem.kind == QUADRATIC:
        return _gradient(problem.mu * (w - problem.center))
    margins = problem.y * (problem.X @ w)
    active = margins < 1.0
    loss = problem.y[active] @ problem.X[active]
    return _gradient(problem.mu * w - loss / problem.n)


def example_subgradient(problem: ProblemInstance, w, index: int) -> GradientSample:
    """mu*w plus the hinge subgradient of example ``index`` alone."""
    w = _check_point(problem, w)
    if problem.kind != SVM_HINGE:
        raise ContractError("stochastic subgradients are defined for svm_hinge only")
    if problem.n == 0:
        raise ContractError("empty dataset")
    x, label = problem.X[index], problem.y[index]
    g = problem.mu * w
    if label * (x @ w) < 1.0:
        g = g - label * x
    return _gradient(g, int(index))


def stochastic_subgradient(problem: ProblemInstance, w, rng) -> GradientSample:
    if problem.kind != SVM_HINGE:
        raise ContractError("stochastic subgradients are defined for svm_hinge only")
    if problem.n == 0:
        raise ContractError("empty dataset")
    return example_subgradient(problem, w, int(rng.integers(problem.n)))


def sample_indices(problem: ProblemInstance, count: int, seed) -> np.ndarray:
    """Pre-drawn uniform example indices for a stochastic run."""
    if problem.kind != SVM_HINGE or problem.n == 0:
        raise ContractError("stochastic runs need a non-empty svm_hinge problem")
    return np.random.default_rng(seed).integers(0, problem.n, size=count, dtype=np.int64)


def make_synthetic_svm(n, d, margin=1.0, seed=0, mu=1.0, noise=1.0, flip=0.05):
    """Seeded two-class dataset around a planted direction.

    Each example is ``y_i * margin * u + noise * z_i`` with ``z_i`` standard
    normal, and a fraction ``flip`` of labels is then inverted. The stored
    ``planted`` separator is the multiple of ``u`` that minimizes the
    objective along that ray, so it always beats the zero vector.
    """
    if n < 1 or d < 1:
        raise ContractError(f"n and d must be positive, got n={n}, d={d}")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(d)
    u /= np.linalg.norm(u)
    y = rng.choice(np.array([-1.0, 1.0]), size=n)
    X = margin * y[:, None] * u[None, :] + noise * rng.standard_normal((n, d))
    y[rng.random(n) < flip] *= -1.0

    along = y * (X @ u)

    def ray_objective(c):
        return 0.5 * mu * c * c + np.maximum(0.0, 1.0 - c * along).mean()

    res = minimize_scalar(ray_objective, bounds=(0.0, np.sqrt(2.0 / mu)), method="bounded",
                          options={"xatol": 1e-10})
    planted = res.x * u
    problem = svm_problem(X, y, mu, name=f"synth-svm:{n},{d},{seed}")
    object.__setattr__(problem, "planted", _frozen(planted))
    return problem


def with_mu(problem: ProblemInstance, mu) -> ProblemInstance:
    """Same data, different strong-convexity modulus."""
    return ProblemInstance(problem.kind, float(mu), problem.dim, X=problem.X, y=problem.y,
                           center=problem.center, planted=problem.planted, name=problem.name)
