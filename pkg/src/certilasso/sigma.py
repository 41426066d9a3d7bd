"""The sigma quantities of a certified minimiser and the threshold test.

For a minimiser x with support S and g = A^T (Ax - y):

    sigma1 = lam/2 - max_{i not in S} |g_i|      (lam/2 when S is everything)
    sigma2 = smallest eigenvalue of A_S^T A_S    (infinite when S is empty)
    sigma3 = min_{i in S} |x_i|                   (infinite when S is empty)
    sigma  = min(sigma1, sigma2^2, sigma3)

sigma2 is never computed; only "sigma2 > C" is decided, by checking
that A_S^T A_S - C I is positive definite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exact import ZERO, Matrix, Vector, gram, matvec, posdef, rmatvec, shift_diagonal, sub, to_fraction
from .lasso import LassoCertificate

INF = math.inf


@dataclass(frozen=True)
class SigmaReport:
    sigma1: Fraction | float
    sigma3: Fraction | float
    sigma2_exceeds_C: bool
    sigma_leq_C2: bool
    degenerate: bool
    C: Fraction


def _support_and_margin(y: Vector, A: Matrix, x: Sequence[Fraction], lam: Fraction):
    S = tuple(i for i, v in enumerate(x) if v != 0)
    g = rmatvec(A, sub(matvec(A, x), y))
    off = max((abs(g[i]) for i in range(len(x)) if x[i] == 0), default=ZERO)
    return S, lam / 2 - off


def _x_of(cert_or_x) -> tuple[Fraction, ...]:
    if isinstance(cert_or_x, LassoCertificate):
        return cert_or_x.x
    return tuple(to_fraction(v) for v in cert_or_x)


def sigma_values(cert, y: Vector, A: Matrix, lam):
    """(sigma1, sigma3, S) read off a certified minimiser."""
    lam = to_fraction(lam)
    x = _x_of(cert)
    S, margin = _support_and_margin(y, A, x, lam)
    sigma3 = min((abs(x[i]) for i in S), default=INF)
    return margin, sigma3, S


def sigma_report(y: Vector, A: Matrix, cert, lam, C) -> SigmaReport:
    """Decide sigma(y, A) <= C^2 for the minimiser ``cert``.

    The early branch (zero margin or singular A_S^T A_S) means sigma = 0.
    """
    lam, C = to_fraction(lam), to_fraction(C)
    if C <= 0:
        raise ValueError("C must be positive")
    x = _x_of(cert)
    S, margin = _support_and_margin(y, A, x, lam)
    G = gram(A, S)
    sigma3 = min((abs(x[i]) for i in S), default=INF)
    if margin <= 0 or not posdef(G):
        return SigmaReport(margin, sigma3, False, True, True, C)
    C2 = C * C
    exceeds = posdef(shift_diagonal(G, C))
    leq = margin <= C2 or sigma3 <= C2 or not exceeds
    return SigmaReport(margin, sigma3, exceeds, leq, False, C)


def sigma_test(y: Vector, A: Matrix, cert, lam, C) -> bool:
    """True iff sigma(y, A) <= C^2."""
    return sigma_report(y, A, cert, lam, C).sigma_leq_C2


def sigma2_enclosure(G: Matrix, bits: int = 40):
    """Rational (lo, hi] around the smallest eigenvalue of a PSD matrix G.

    posdef(G - t I) holds exactly when every eigenvalue exceeds t, so
    bisection on t brackets the smallest eigenvalue; hi - lo <= 2^-bits * hi0.
    """
    if not G:
        return INF, INF
    if not posdef(G):
        return ZERO, ZERO
    lo = ZERO
    hi = min(G[i][i] for i in range(len(G)))  # Rayleigh quotient at e_i
    width = hi
    while hi - lo > width / (1 << bits):
        mid = (lo + hi) / 2
        if posdef(shift_diagonal(G, mid)):
            lo = mid
        else:
            hi = mid
    return lo, hi
