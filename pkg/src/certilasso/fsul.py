"""Certified feature selection for LASSO from inexact input.

The loop asks the oracles for ever more precise data, solves each
approximation exactly, and stops once sigma of the approximation clears
the threshold C^2 with C = 6 delta^(1/4) N (lam + 1/lam) H^2.  At that
point the support of the exact solution equals the support of the true
problem and 1/delta bounds its condition number.  On ill-posed data the
threshold is never cleared; a budget turns that into ``BudgetExhausted``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .exact import truncated_max_norm, truncated_one_norm
from .lasso import DegenerateInstance, InstanceTooLarge, LassoCertificate, ulasso
from .oracle import InexactInput, PrecisionCapExceeded
from .sigma import SigmaReport, sigma_report


@dataclass(frozen=True)
class FsulBudget:
    max_iterations: int = 64
    wall_clock_limit: float | None = None  # seconds

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class IterationEvent:
    n: int
    delta: Fraction
    C: Fraction | None
    sigma: SigmaReport | None
    support: tuple[int, ...] | None
    terminated: bool = False


@dataclass(frozen=True)
class FsulResult:
    support: tuple[int, ...]
    eta: Fraction
    iterations: int
    max_precision_bits: int
    certificate: LassoCertificate
    trace: tuple[IterationEvent, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class BudgetExhausted:
    iterations: int
    reason: str
    last_sigma: SigmaReport | None
    trace: tuple[IterationEvent, ...] = field(default=(), repr=False)


def fsul(
    inp: InexactInput,
    budget: FsulBudget | None = None,
    on_iteration: Callable[[IterationEvent], None] | None = None,
) -> FsulResult | BudgetExhausted:
    budget = budget or FsulBudget()
    lam = inp.lam
    m, N = inp.m, inp.N
    lam_sum = lam + 1 / lam
    mN = m * N
    delta = Fraction(1)
    delta_q = Fraction(1)  # delta^(1/4)
    n = 0
    trace: list[IterationEvent] = []
    last_sigma = None
    hint = None
    started = time.monotonic()

    def emit(event):
        trace.append(event)
        if on_iteration is not None:
            on_iteration(event)

    while True:
        if n >= budget.max_iterations:
            return BudgetExhausted(n, "max_iterations", last_sigma, tuple(trace))
        if budget.wall_clock_limit is not None and time.monotonic() - started > budget.wall_clock_limit:
            return BudgetExhausted(n, "wall_clock_limit", last_sigma, tuple(trace))
        n += 1
        delta /= 16
        try:
            A = inp.get_matrix(4 * n)
            y = inp.get_vector(4 * n)
        except PrecisionCapExceeded:
            return BudgetExhausted(n - 1, "precision_cap", last_sigma, tuple(trace))
        delta_q /= 2
        try:
            cert = ulasso(y, A, lam, hint=hint)
        except (DegenerateInstance, InstanceTooLarge):
            # no certified minimiser of this approximation: treat sigma as possibly 0
            emit(IterationEvent(n, delta, None, None, None))
            continue
        hint = (cert.support, cert.sign_on_support)
        G = truncated_max_norm(y, A)
        H = truncated_one_norm(y, A)
        C = 6 * delta_q * N * lam_sum * H * H
        report = sigma_report(y, A, cert, lam, C)
        last_sigma = report
        done = not report.sigma_leq_C2 and G * G >= 4 * delta * delta * mN
        emit(IterationEvent(n, delta, C, report, cert.support, done))
        if done:
            return FsulResult(cert.support, 1 / delta, n, 4 * n, cert, tuple(trace))


def condition_upper_bound(inp: InexactInput, budget: FsulBudget | None = None) -> Fraction | BudgetExhausted:
    """An upper bound on the condition number, or BudgetExhausted."""
    out = fsul(inp, budget)
    return out if isinstance(out, BudgetExhausted) else out.eta


def _ceil_log2(x: Fraction) -> int:
    j = 0
    while (1 << j) < x:
        j += 1
    return j


def iteration_budget_hint(lam, N, tone_estimate, cond_guess, multiplier: int = 8) -> int:
    """multiplier * ceil(log2 max{lam + 1/lam, N, tone, cond_guess})."""
    lam = Fraction(lam)
    top = max(lam + 1 / lam, Fraction(N), Fraction(tone_estimate), Fraction(cond_guess))
    return multiplier * _ceil_log2(top)
