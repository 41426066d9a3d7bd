"""Exact unconstrained LASSO: KKT certificates and certified solvers.

The objective is ||Ax - y||^2 + lam ||x||_1.  A vector x is a minimiser
iff the KKT conditions hold:

    2 A_S^T (Ax - y) = -lam sign(x_S)       on the support S,
    |A_i^T (Ax - y)| <= lam / 2             off the support.

Every check here is an exact rational comparison.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .exact import (
    ZERO,
    ContractViolation,
    Matrix,
    SingularMatrixError,
    Vector,
    column,
    dot,
    gram,
    ldl,
    matvec,
    norm1,
    norm2_sq,
    rmatvec,
    shape,
    sub,
    to_fraction,
)

DEFAULT_ENUMERATION_CAP = 12


class KKTRejection(ValueError):
    """x is not a minimiser; ``reason`` names the violated condition."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason
        self.detail = detail


class DegenerateInstance(ArithmeticError):
    """No candidate support with an invertible Gram matrix passed the KKT test."""


class InstanceTooLarge(ValueError):
    """N exceeds the enumeration cap of the certified fallback."""


@dataclass(frozen=True)
class LassoCertificate:
    x: Vector
    support: tuple[int, ...]
    sign_on_support: tuple[int, ...]
    kkt_on_support_residual: Vector
    kkt_off_support_margin: Fraction

    def to_json(self, one_based: bool = False) -> dict:
        """Exact rational strings; ``one_based`` shifts support indices for reports."""
        shift = 1 if one_based else 0
        return {
            "x": [_rat(v) for v in self.x],
            "support": [i + shift for i in self.support],
            "sign_on_support": list(self.sign_on_support),
            "kkt_on_support_residual": [_rat(v) for v in self.kkt_on_support_residual],
            "kkt_off_support_margin": _rat(self.kkt_off_support_margin),
        }

    @classmethod
    def from_json(cls, doc: dict, one_based: bool = False) -> "LassoCertificate":
        shift = 1 if one_based else 0
        return cls(
            tuple(Fraction(v) for v in doc["x"]),
            tuple(i - shift for i in doc["support"]),
            tuple(doc["sign_on_support"]),
            tuple(Fraction(v) for v in doc["kkt_on_support_residual"]),
            Fraction(doc["kkt_off_support_margin"]),
        )


def _rat(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _sign(v: Fraction) -> int:
    return (v > 0) - (v < 0)


def lasso_objective(y: Vector, A: Matrix, lam, x: Sequence[Fraction]) -> Fraction:
    r = sub(matvec(A, x), y)
    return norm2_sq(r) + to_fraction(lam) * norm1(x)


def _check_dims(y, A, x=None):
    m, N = shape(A)
    if len(y) != m:
        raise ContractViolation(f"y has {len(y)} entries, A has {m} rows")
    if x is not None and len(x) != N:
        raise ContractViolation(f"x has {len(x)} entries, A has {N} columns")


def verify_kkt(y: Vector, A: Matrix, lam, x: Sequence) -> LassoCertificate:
    """Certify x as a LASSO minimiser or raise KKTRejection."""
    lam = to_fraction(lam)
    x = tuple(to_fraction(v) for v in x)
    _check_dims(y, A, x)
    g = rmatvec(A, sub(matvec(A, x), y))
    S = tuple(i for i, v in enumerate(x) if v != 0)
    signs = tuple(_sign(x[i]) for i in S)
    residual = tuple(2 * g[i] + lam * s for i, s in zip(S, signs))
    if any(residual):
        k = next(j for j, r in enumerate(residual) if r)
        raise KKTRejection("on-support residual", f"index {S[k]} has 2A_i^T(Ax-y) + lam*s = {residual[k]}")
    off = [abs(g[i]) for i in range(len(x)) if x[i] == 0]
    margin = lam / 2 - max(off, default=ZERO)
    if margin < 0:
        raise KKTRejection("off-support margin", f"lam/2 - max|A_i^T(Ax-y)| = {margin}")
    return LassoCertificate(x, S, signs, residual, margin)


def is_minimiser(y: Vector, A: Matrix, lam, x: Sequence) -> bool:
    try:
        verify_kkt(y, A, lam, x)
    except KKTRejection:
        return False
    return True


# -- candidate solves ---------------------------------------------------------

class _SupportSystem:
    """LDL^T of A_S^T A_S plus the pieces needed to solve for any sign vector."""

    def __init__(self, y: Vector, A: Matrix, S: tuple[int, ...]):
        self.S = S
        L, d = ldl(gram(A, S))  # SingularMatrixError when columns are dependent
        self.L, self.d = L, d
        self.Aty = tuple(dot(column(A, j), y) for j in S)

    def solve(self, rhs: Sequence[Fraction]) -> Vector:
        n = len(rhs)
        L, d = self.L, self.d
        z = [ZERO] * n
        for i in range(n):
            z[i] = rhs[i] - sum((L[i][j] * z[j] for j in range(i)), ZERO)
        w = [ZERO] * n
        for i in reversed(range(n)):
            w[i] = z[i] / d[i] - sum((L[j][i] * w[j] for j in range(i + 1, n)), ZERO)
        return tuple(w)

    def candidate(self, signs: Sequence[int], lam: Fraction) -> Vector:
        half = lam / 2
        return self.solve([a - half * s for a, s in zip(self.Aty, signs)])


def _embed(N: int, S: Sequence[int], xs: Sequence[Fraction]) -> Vector:
    x = [ZERO] * N
    for i, v in zip(S, xs):
        x[i] = v
    return tuple(x)


def _accept(y, A, lam, N, S, signs, xs) -> LassoCertificate | None:
    if any(_sign(v) != s for v, s in zip(xs, signs)):
        return None
    try:
        return verify_kkt(y, A, lam, _embed(N, S, xs))
    except KKTRejection:
        return None


def certify_guess(y: Vector, A: Matrix, lam, support: Sequence[int], signs: Sequence[int]):
    """Solve the restricted normal equations for (S, s) and certify; None on failure."""
    lam = to_fraction(lam)
    S = tuple(support)
    N = shape(A)[1]
    try:
        system = _SupportSystem(y, A, S)
    except SingularMatrixError:
        return None
    return _accept(y, A, lam, N, S, signs, system.candidate(signs, lam))


def _sign_vectors(k: int) -> Iterator[tuple[int, ...]]:
    for bits in range(1 << k):
        yield tuple(-1 if (bits >> (k - 1 - j)) & 1 else 1 for j in range(k))


def kkt_candidates(y: Vector, A: Matrix, lam, cap: int = DEFAULT_ENUMERATION_CAP):
    """Yield every minimal-support minimiser, supports in lexicographic order.

    Supports are visited depth-first over increasing index tuples, which is
    lexicographic order.  A support whose columns are dependent cannot be
    part of a larger independent set, so its whole subtree is skipped.
    """
    lam = to_fraction(lam)
    _check_dims(y, A)
    N = shape(A)[1]
    if N > cap:
        raise InstanceTooLarge(f"N = {N} exceeds the enumeration cap {cap}")

    def visit(S: tuple[int, ...]):
        if S:
            try:
                system = _SupportSystem(y, A, S)
            except SingularMatrixError:
                return
            for signs in _sign_vectors(len(S)):
                cert = _accept(y, A, lam, N, S, signs, system.candidate(signs, lam))
                if cert is not None:
                    yield cert
        else:
            cert = _accept(y, A, lam, N, S, (), ())
            if cert is not None:
                yield cert
        start = S[-1] + 1 if S else 0
        for j in range(start, N):
            yield from visit(S + (j,))

    yield from visit(())


def ulasso_enumerate(y: Vector, A: Matrix, lam, cap: int = DEFAULT_ENUMERATION_CAP) -> LassoCertificate:
    """Exact minimiser with the lexicographically smallest support."""
    for cert in kkt_candidates(y, A, lam, cap):
        return cert
    raise DegenerateInstance("no KKT-certified candidate with an invertible Gram matrix")


def minimal_support_solutions(y: Vector, A: Matrix, lam, cap: int = DEFAULT_ENUMERATION_CAP):
    return list(kkt_candidates(y, A, lam, cap))


def minimal_support_pair(y: Vector, A: Matrix, lam, cap: int = DEFAULT_ENUMERATION_CAP):
    """Two certificates with different supports, or None if the support is unique."""
    first = None
    for cert in kkt_candidates(y, A, lam, cap):
        if first is None:
            first = cert
        elif cert.support != first.support:
            return first, cert
    return None


def ulasso_purified(
    y: Vector,
    A: Matrix,
    lam,
    float_guess=None,
    cfg=None,
    max_retries: int = 2,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> LassoCertificate:
    """Certify a floating-point guess, escalating precision, else enumerate.

    The guess is thresholded into a support and sign pattern, the
    restricted normal equations are solved exactly and the result is run
    through the KKT check.  On rejection the float solve is repeated at
    twice the working precision with half the threshold.
    """
    from .baseline import FloatSolveConfig, float_lasso

    lam = to_fraction(lam)
    cfg = cfg or FloatSolveConfig(threshold=1e-9)
    guess = float_guess
    for attempt in range(max_retries + 1):
        if guess is None:
            guess = float_lasso(y, A, lam, cfg)
        S = tuple(i for i, v in enumerate(guess) if abs(v) >= cfg.threshold)
        signs = tuple(1 if guess[i] > 0 else -1 for i in S)
        cert = certify_guess(y, A, lam, S, signs)
        if cert is not None:
            return cert
        cfg = cfg.escalated()
        guess = None
    if shape(A)[1] > cap:
        raise InstanceTooLarge("instance too large for the certified path")
    return ulasso_enumerate(y, A, lam, cap)


def ulasso(y: Vector, A: Matrix, lam, hint=None, cap: int = DEFAULT_ENUMERATION_CAP) -> LassoCertificate:
    """Certified solve: try ``hint`` (support, signs) first, then purify, then enumerate."""
    if hint is not None:
        cert = certify_guess(y, A, lam, *hint)
        if cert is not None:
            return cert
    return ulasso_purified(y, A, lam, max_retries=0, cap=cap)


# -- QP reformulation ---------------------------------------------------------

@dataclass(frozen=True)
class QpReformulation:
    """min z^T M z + linear^T z + ||y||^2 over z >= 0, with x = z[:N] - z[N:]."""

    M: Matrix
    linear: Vector
    constant: Fraction


def qp_reformulation(y: Vector, A: Matrix, lam) -> QpReformulation:
    lam = to_fraction(lam)
    _check_dims(y, A)
    N = shape(A)[1]
    G = gram(A, range(N))
    M = tuple(
        tuple((1 if (i < N) == (j < N) else -1) * G[i % N][j % N] for j in range(2 * N))
        for i in range(2 * N)
    )
    Aty = rmatvec(A, y)
    By = Aty + tuple(-v for v in Aty)
    linear = tuple(lam - 2 * v for v in By)
    return QpReformulation(M, linear, norm2_sq(y))


def qp_objective(qp: QpReformulation, z: Sequence[Fraction]) -> Fraction:
    Mz = matvec(qp.M, z)
    return dot(z, Mz) + dot(qp.linear, z) + qp.constant
