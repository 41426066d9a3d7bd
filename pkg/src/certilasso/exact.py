"""Exact rational linear algebra on tuples of ``Fraction``.

Vectors are tuples of ``Fraction`` and matrices are tuples of row tuples,
so dimensions are fixed once built and every access is bounds-checked by
Python itself.  Nothing in this module touches floating point, except
``to_fraction`` which lifts a float to the exact binary value it stores.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import isqrt
from typing import Iterable, Sequence

Vector = tuple[Fraction, ...]
Matrix = tuple[tuple[Fraction, ...], ...]

ZERO = Fraction(0)
ONE = Fraction(1)


class ContractViolation(ValueError):
    """An input broke a documented precondition (shape, symmetry, sign)."""


class SingularMatrixError(ArithmeticError):
    """A linear solve hit a zero pivot."""


def to_fraction(value) -> Fraction:
    """Coerce ints, Fractions, floats and literals like ``"3/7"`` or ``"1e-3"``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def vector(entries: Iterable) -> Vector:
    return tuple(to_fraction(v) for v in entries)


def matrix(rows: Iterable[Iterable]) -> Matrix:
    out = tuple(vector(r) for r in rows)
    if out and len({len(r) for r in out}) != 1:
        raise ContractViolation("ragged matrix rows")
    return out


def shape(A: Matrix) -> tuple[int, int]:
    return len(A), (len(A[0]) if A else 0)


def zeros(n: int) -> Vector:
    return (ZERO,) * n


def identity(n: int) -> Matrix:
    return tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))


def transpose(A: Matrix) -> Matrix:
    return tuple(zip(*A))


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    if len(u) != len(v):
        raise ContractViolation(f"length mismatch {len(u)} != {len(v)}")
    return sum((a * b for a, b in zip(u, v)), ZERO)


def matvec(A: Matrix, x: Sequence[Fraction]) -> Vector:
    return tuple(dot(row, x) for row in A)


def rmatvec(A: Matrix, r: Sequence[Fraction]) -> Vector:
    """A^T r."""
    m, n = shape(A)
    if len(r) != m:
        raise ContractViolation(f"length mismatch {len(r)} != {m}")
    return tuple(sum((A[i][j] * r[i] for i in range(m)), ZERO) for j in range(n))


def matmul(A: Matrix, B: Matrix) -> Matrix:
    Bt = transpose(B)
    return tuple(tuple(dot(row, col) for col in Bt) for row in A)


def add(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vector:
    if len(u) != len(v):
        raise ContractViolation("length mismatch")
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vector:
    if len(u) != len(v):
        raise ContractViolation("length mismatch")
    return tuple(a - b for a, b in zip(u, v))


def scale(c: Fraction, v: Sequence[Fraction]) -> Vector:
    return tuple(c * a for a in v)


def mat_sub(A: Matrix, B: Matrix) -> Matrix:
    if shape(A) != shape(B):
        raise ContractViolation("shape mismatch")
    return tuple(sub(a, b) for a, b in zip(A, B))


def mat_add(A: Matrix, B: Matrix) -> Matrix:
    if shape(A) != shape(B):
        raise ContractViolation("shape mismatch")
    return tuple(add(a, b) for a, b in zip(A, B))


def norm_inf(v: Iterable[Fraction]) -> Fraction:
    return max((abs(a) for a in v), default=ZERO)


def norm1(v: Iterable[Fraction]) -> Fraction:
    return sum((abs(a) for a in v), ZERO)


def norm2_sq(v: Iterable[Fraction]) -> Fraction:
    return sum((a * a for a in v), ZERO)


def max_abs(A: Matrix) -> Fraction:
    """||A||_max, the largest entry magnitude."""
    return max((abs(a) for row in A for a in row), default=ZERO)


def columns(A: Matrix, idx: Sequence[int]) -> Matrix:
    return tuple(tuple(row[j] for j in idx) for row in A)


def column(A: Matrix, j: int) -> Vector:
    return tuple(row[j] for row in A)


def gram(A: Matrix, idx: Sequence[int]) -> Matrix:
    """A_S^T A_S for the column subset ``idx``."""
    cols = [column(A, j) for j in idx]
    r = len(cols)
    G = [[ZERO] * r for _ in range(r)]
    for a in range(r):
        for b in range(a, r):
            G[a][b] = G[b][a] = dot(cols[a], cols[b])
    return tuple(tuple(row) for row in G)


def shift_diagonal(X: Matrix, t: Fraction) -> Matrix:
    """X - t I."""
    return tuple(
        tuple(v - t if i == j else v for j, v in enumerate(row)) for i, row in enumerate(X)
    )


def is_symmetric(X: Matrix) -> bool:
    n, k = shape(X)
    if n != k:
        return False
    return all(X[i][j] == X[j][i] for i in range(n) for j in range(i + 1, n))


def _ldl_pivots(X: Matrix, stop_at_nonpositive: bool):
    """Yield (L, d) of X = L D L^T without pivoting; d may contain zeros."""
    n = len(X)
    L = [[ZERO] * n for _ in range(n)]
    d = [ZERO] * n
    for k in range(n):
        dk = X[k][k] - sum((L[k][j] * L[k][j] * d[j] for j in range(k)), ZERO)
        d[k] = dk
        L[k][k] = ONE
        if dk <= 0 and stop_at_nonpositive:
            return L, d[: k + 1]
        if dk == 0:
            return L, d[: k + 1]
        for i in range(k + 1, n):
            s = X[i][k] - sum((L[i][j] * L[k][j] * d[j] for j in range(k)), ZERO)
            L[i][k] = s / dk
    return L, d


def posdef(X: Matrix) -> bool:
    """Exact positive-definiteness test by square-root-free LDL^T.

    X is positive definite iff elimination without pivoting runs to the
    end with every pivot strictly positive.  The 0x0 matrix counts as
    positive definite.
    """
    if not is_symmetric(X):
        raise ContractViolation("posdef needs a symmetric matrix")
    n = len(X)
    _, d = _ldl_pivots(X, stop_at_nonpositive=True)
    return len(d) == n and all(p > 0 for p in d)


def ldl(X: Matrix) -> tuple[Matrix, Vector]:
    """Return (L, D) with X = L diag(D) L^T; raises on a zero pivot."""
    if not is_symmetric(X):
        raise ContractViolation("ldl needs a symmetric matrix")
    L, d = _ldl_pivots(X, stop_at_nonpositive=False)
    if len(d) != len(X) or any(p == 0 for p in d):
        raise SingularMatrixError("zero pivot in LDL^T")
    return tuple(tuple(r) for r in L), tuple(d)


def solve_spd(X: Matrix, v: Sequence[Fraction]) -> Vector:
    """Solve X w = v exactly for symmetric X; raises SingularMatrixError."""
    n = len(X)
    if len(v) != n:
        raise ContractViolation("length mismatch")
    L, d = ldl(X)
    z = [ZERO] * n
    for i in range(n):
        z[i] = v[i] - sum((L[i][j] * z[j] for j in range(i)), ZERO)
    w = [ZERO] * n
    for i in reversed(range(n)):
        w[i] = z[i] / d[i] - sum((L[j][i] * w[j] for j in range(i + 1, n)), ZERO)
    return tuple(w)


def det(X: Matrix) -> Fraction:
    """Determinant by fraction-free Gaussian elimination with row swaps."""
    n, k = shape(X)
    if n != k:
        raise ContractViolation("det needs a square matrix")
    M = [list(r) for r in X]
    sign = 1
    result = ONE
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            return ZERO
        if p != c:
            M[c], M[p] = M[p], M[c]
            sign = -sign
        piv = M[c][c]
        result *= piv
        for r in range(c + 1, n):
            f = M[r][c] / piv
            if f:
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return sign * result


def is_psd(X: Matrix) -> bool:
    """Positive semidefinite iff every principal minor is >= 0 (small r only)."""
    if not is_symmetric(X):
        raise ContractViolation("is_psd needs a symmetric matrix")
    n = len(X)
    if posdef(X):
        return True
    for r in range(1, n + 1):
        for idx in combinations(range(n), r):
            if det(tuple(tuple(X[i][j] for j in idx) for i in idx)) < 0:
                return False
    return True


# -- truncated norms ------------------------------------------------------

def truncated_max_norm(y: Vector, A: Matrix) -> Fraction:
    """max{||A||_max, ||y||_inf, 1}."""
    _check_pair(y, A)
    return max(max_abs(A), norm_inf(y), ONE)


def truncated_one_norm(y: Vector, A: Matrix) -> Fraction:
    """max{sum |A_ij|, sum |y_i|, 1}."""
    _check_pair(y, A)
    return max(sum((norm1(r) for r in A), ZERO), norm1(y), ONE)


def _check_pair(y: Vector, A: Matrix) -> None:
    if len(y) != len(A):
        raise ContractViolation(f"y has {len(y)} entries but A has {len(A)} rows")


def bit_size(x: Fraction) -> int:
    """Bits needed to write x.

    For a dyadic p/2^k in lowest terms this is (bits of the integer part)
    + k, i.e. the length of its binary expansion.  Other rationals count
    numerator and denominator bits.
    """
    x = to_fraction(x)
    p, q = abs(x.numerator), x.denominator
    if q & (q - 1) == 0:
        k = q.bit_length() - 1
        return (p >> k).bit_length() + k
    return p.bit_length() + q.bit_length()


@dataclass(frozen=True)
class NormReport:
    tmax: Fraction
    tone: Fraction
    bit_size_max: int


def norm_report(y: Vector, A: Matrix) -> NormReport:
    bits = max((bit_size(v) for v in (*y, *(a for r in A for a in r))), default=0)
    return NormReport(truncated_max_norm(y, A), truncated_one_norm(y, A), bits)


# -- dyadic square-root enclosures ----------------------------------------

def sqrt_floor(x: Fraction, bits: int = 32) -> Fraction:
    """Largest k/2^bits with (k/2^bits)^2 <= x."""
    x = to_fraction(x)
    if x < 0:
        raise ContractViolation("square root of a negative number")
    scaled = (x.numerator << (2 * bits)) // x.denominator
    return Fraction(isqrt(scaled), 1 << bits)


def sqrt_ceil(x: Fraction, bits: int = 32) -> Fraction:
    """Smallest k/2^bits with (k/2^bits)^2 >= x."""
    lo = sqrt_floor(x, bits)
    return lo if lo * lo == x else lo + Fraction(1, 1 << bits)
