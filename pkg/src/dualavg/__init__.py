"""Gradient descent averaging and strongly convex primal-dual averaging.

Quick start::

    from dualavg import make_synthetic_svm, reference_optimum, run
    prob = make_synthetic_svm(200, 20, seed=0)
    ref = reference_optimum(prob)
    trace = run(prob, None, "scpda", 10_000, f_star=ref.f_star)
    trace.final_gap
"""
from .analysis import (ReferenceSolution, RunTrace, loglog_slope, reference_optimum,
                       theorem1_bound_rhs, theorem2_bound_rhs, verify_lemma3)
from .errors import ContractError, ParseError
from .kernels import BACKEND
from .optimizers import ALGORITHMS, init_state, step
from .problems import (ProblemInstance, full_subgradient, make_synthetic_svm, objective_value,
                       quadratic_problem, random_quadratic, stochastic_subgradient, svm_problem)
from .projections import FeasibleSet, box, l2_ball, project, whole_space
from .runner import log_checkpoints, run

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS", "BACKEND", "ContractError", "FeasibleSet", "ParseError", "ProblemInstance",
    "ReferenceSolution", "RunTrace", "box", "full_subgradient", "init_state", "l2_ball",
    "log_checkpoints", "loglog_slope", "make_synthetic_svm", "objective_value", "project",
    "quadratic_problem", "random_quadratic", "reference_optimum", "run", "step",
    "stochastic_subgradient", "svm_problem", "theorem1_bound_rhs", "theorem2_bound_rhs",
    "verify_lemma3", "whole_space",
]
