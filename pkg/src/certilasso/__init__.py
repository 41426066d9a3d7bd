"""Certified LASSO feature selection from inexact input.

The package works over exact rationals (``fractions.Fraction``).  The
main entry point is :func:`fsul`, which reads a problem through
precision-indexed oracles and returns the support of the LASSO minimiser
together with an upper bound on the condition number, or reports that
its budget ran out.
"""
from .baseline import FloatSolveConfig, failure_sweep, float_lasso, threshold_support
from .conditioning import (
    IllPosedWitness,
    StspBounds,
    make_ill_posed,
    q_poly,
    stsp_bounds,
    stsp_lower_bound,
    stsp_search,
    stsp_upper_bounds,
)
from .exact import ContractViolation, SingularMatrixError, ldl, posdef, solve_spd
from .fsul import BudgetExhausted, FsulBudget, FsulResult, fsul
from .lasso import (
    DegenerateInstance,
    KKTRejection,
    LassoCertificate,
    ulasso,
    ulasso_enumerate,
    ulasso_purified,
    verify_kkt,
)
from .oracle import GroundTruth, InexactInput, adversarial_oracle, dyadic_oracle, exact_oracle
from .sigma import SigmaReport, sigma_report, sigma_test

__all__ = [
    "BudgetExhausted",
    "ContractViolation",
    "DegenerateInstance",
    "FloatSolveConfig",
    "FsulBudget",
    "FsulResult",
    "GroundTruth",
    "IllPosedWitness",
    "InexactInput",
    "KKTRejection",
    "LassoCertificate",
    "SigmaReport",
    "SingularMatrixError",
    "StspBounds",
    "adversarial_oracle",
    "dyadic_oracle",
    "exact_oracle",
    "failure_sweep",
    "float_lasso",
    "fsul",
    "ldl",
    "make_ill_posed",
    "posdef",
    "q_poly",
    "sigma_report",
    "sigma_test",
    "solve_spd",
    "stsp_bounds",
    "stsp_lower_bound",
    "stsp_search",
    "stsp_upper_bounds",
    "threshold_support",
    "ulasso",
    "ulasso_enumerate",
    "ulasso_purified",
    "verify_kkt",
]
