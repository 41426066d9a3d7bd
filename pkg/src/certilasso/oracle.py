"""Variable-precision input oracles.

An ``InexactInput`` hands out rational approximations of the true data
(b, U): ``get_matrix(n)`` and ``get_vector(n)`` return dyadic rationals
within 2^-n of every true entry.  Ground truth may contain integer square
roots, so every constant knows how to compute floor(value * 2^n) exactly.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Callable, Sequence

from .exact import ContractViolation, Matrix, Vector, bit_size, to_fraction

MAX_BITS_ENV = "CERTILASSO_MAX_BITS"


class OracleToleranceError(ValueError):
    """An oracle output is further than 2^-n from the truth, or too long."""


class PrecisionCapExceeded(RuntimeError):
    """A request asked for more bits than CERTILASSO_MAX_BITS allows."""


# -- constants ------------------------------------------------------------

@dataclass(frozen=True)
class RationalConstant:
    value: Fraction

    def floor_scaled(self, n: int) -> int:
        """floor(value * 2^n)."""
        return (self.value.numerator << n) // self.value.denominator

    def compare(self, v: Fraction) -> int:
        """sign(value - v)."""
        return (self.value > v) - (self.value < v)

    def log2_one_plus(self) -> int:
        """ceil(log2(1 + |value|))."""
        target = 1 + abs(self.value)
        j = 0
        while (1 << j) < target:
            j += 1
        return j

    def exact(self) -> Fraction:
        return self.value

    def tag(self) -> str:
        v = self.value
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


@dataclass(frozen=True)
class SqrtConstant:
    """sign * sqrt(radicand) for a non-negative integer radicand."""

    radicand: int
    negative: bool = False

    def __post_init__(self):
        if self.radicand < 0:
            raise ContractViolation("negative radicand")

    def floor_scaled(self, n: int) -> int:
        r = isqrt(self.radicand << (2 * n))
        if not self.negative:
            return r
        exact = r * r == self.radicand << (2 * n)
        return -r if exact else -r - 1

    def compare(self, v: Fraction) -> int:
        # compare sqrt(k) against |v| by squares, then apply the sign
        if self.radicand == 0:
            return (0 > v) - (0 < v)
        if not self.negative:
            if v < 0:
                return 1
            sq = v * v
            return (self.radicand > sq) - (self.radicand < sq)
        if v >= 0:
            return -1
        sq = v * v
        return (sq > self.radicand) - (sq < self.radicand)

    def log2_one_plus(self) -> int:
        j = 0
        while ((1 << j) - 1) ** 2 < self.radicand:
            j += 1
        return j

    def exact(self) -> Fraction:
        r = isqrt(self.radicand)
        if r * r != self.radicand:
            raise ValueError(f"sqrt({self.radicand}) is irrational")
        return Fraction(-r if self.negative else r)

    def tag(self) -> str:
        return ("-" if self.negative else "") + f"sqrt:{self.radicand}"


Constant = RationalConstant | SqrtConstant


def parse_constant(text) -> Constant:
    """Parse ``"3/4"``, ``"0.1"``, ``"sqrt:2"`` or ``"-sqrt:2"``."""
    if isinstance(text, (RationalConstant, SqrtConstant)):
        return text
    if not isinstance(text, str):
        return RationalConstant(to_fraction(text))
    s = text.strip()
    neg = s.startswith("-")
    body = s[1:] if neg else s
    if body.startswith("sqrt:"):
        try:
            k = int(body[5:])
        except ValueError as exc:
            raise ValueError(f"bad radicand in {text!r}") from exc
        return SqrtConstant(k, neg)
    try:
        return RationalConstant(Fraction(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse constant {text!r}") from exc


def within(c: Constant, v: Fraction, tol: Fraction) -> bool:
    """|c - v| <= tol, decided exactly."""
    return c.compare(v - tol) >= 0 and c.compare(v + tol) <= 0


def nearest_dyadic(c: Constant, n: int) -> Fraction:
    """Round-to-nearest at n fractional bits; error at most 2^-(n+1)."""
    return Fraction((c.floor_scaled(n + 1) + 1) >> 1, 1 << n)


def bit_bound(c: Constant, n: int) -> int:
    """Allowed bit-size of an n-bit approximation of c."""
    return c.log2_one_plus() + n


# -- ground truth ---------------------------------------------------------

@dataclass(frozen=True)
class GroundTruth:
    y: tuple[Constant, ...]
    A: tuple[tuple[Constant, ...], ...]
    lam: Fraction

    def __post_init__(self):
        if len(self.y) != len(self.A) or not self.A:
            raise ContractViolation("y and A must have the same, nonzero, number of rows")
        if len({len(r) for r in self.A}) != 1 or not self.A[0]:
            raise ContractViolation("A must be rectangular with N >= 1")
        if self.lam <= 0:
            raise ContractViolation("lambda must be positive")

    @property
    def m(self) -> int:
        return len(self.A)

    @property
    def N(self) -> int:
        return len(self.A[0])

    @classmethod
    def from_values(cls, y, A, lam) -> "GroundTruth":
        return cls(
            tuple(parse_constant(v) for v in y),
            tuple(tuple(parse_constant(v) for v in row) for row in A),
            to_fraction(lam),
        )

    def is_rational(self) -> bool:
        try:
            self.exact()
        except ValueError:
            return False
        return True

    def exact(self) -> tuple[Vector, Matrix]:
        """Exact (y, A); raises ValueError when an entry is irrational."""
        return (
            tuple(c.exact() for c in self.y),
            tuple(tuple(c.exact() for c in row) for row in self.A),
        )

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "N": self.N,
            "lambda": RationalConstant(self.lam).tag(),
            "y": [c.tag() for c in self.y],
            "A": [[c.tag() for c in row] for row in self.A],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "GroundTruth":
        try:
            m, N = int(doc["m"]), int(doc["N"])
            truth = cls.from_values(doc["y"], doc["A"], doc["lambda"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed ground-truth document: {exc}") from exc
        if (truth.m, truth.N) != (m, N):
            raise ValueError(f"declared shape {(m, N)} != data shape {(truth.m, truth.N)}")
        return truth


def load_ground_truth(path) -> GroundTruth:
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError("ground-truth file must hold a JSON object")
    return GroundTruth.from_json(doc)


def dump_ground_truth(truth: GroundTruth, path) -> None:
    with open(path, "w") as fh:
        json.dump(truth.to_json(), fh, indent=2)
        fh.write("\n")


# -- oracles --------------------------------------------------------------

def max_bits_cap() -> int | None:
    raw = os.environ.get(MAX_BITS_ENV)
    return int(raw) if raw else None


class InexactInput:
    """A pair of deterministic, instrumented oracles for (b, U).

    Results are cached per precision, so repeated requests for the same n
    give identical answers.  One instance belongs to one thread.
    """

    def __init__(
        self,
        m: int,
        N: int,
        lam,
        vector_fn: Callable[[int], Vector],
        matrix_fn: Callable[[int], Matrix],
        truth: GroundTruth | None = None,
        max_bits: int | None = None,
    ):
        self.m, self.N = m, N
        self.lam = to_fraction(lam)
        if self.lam <= 0:
            raise ContractViolation("lambda must be positive")
        self.truth = truth
        self._vector_fn = vector_fn
        self._matrix_fn = matrix_fn
        self._vcache: dict[int, Vector] = {}
        self._mcache: dict[int, Matrix] = {}
        self.max_bits = max_bits if max_bits is not None else max_bits_cap()
        self.max_precision = 0
        self.calls = 0

    def _record(self, n: int) -> None:
        if n < 1:
            raise ContractViolation("precision must be a positive integer")
        if self.max_bits is not None and n > self.max_bits:
            raise PrecisionCapExceeded(f"requested {n} bits, cap is {self.max_bits}")
        self.calls += 1
        self.max_precision = max(self.max_precision, n)

    def get_vector(self, n: int) -> Vector:
        self._record(n)
        if n not in self._vcache:
            self._vcache[n] = self._vector_fn(n)
        return self._vcache[n]

    def get_matrix(self, n: int) -> Matrix:
        self._record(n)
        if n not in self._mcache:
            self._mcache[n] = self._matrix_fn(n)
        return self._mcache[n]


def call_count(inp: InexactInput) -> tuple[int, int]:
    """(largest precision requested, number of oracle calls)."""
    return inp.max_precision, inp.calls


def dyadic_oracle(truth: GroundTruth, max_bits: int | None = None) -> InexactInput:
    """Round-to-nearest dyadic approximations at the requested precision."""

    def vec(n):
        return tuple(nearest_dyadic(c, n) for c in truth.y)

    def mat(n):
        return tuple(tuple(nearest_dyadic(c, n) for c in row) for row in truth.A)

    return InexactInput(truth.m, truth.N, truth.lam, vec, mat, truth=truth, max_bits=max_bits)


def truncation_oracle(truth: GroundTruth, max_bits: int | None = None) -> InexactInput:
    """Round toward minus infinity at the requested precision."""

    def trunc(c, n):
        return Fraction(c.floor_scaled(n), 1 << n)

    def vec(n):
        return tuple(trunc(c, n) for c in truth.y)

    def mat(n):
        return tuple(tuple(trunc(c, n) for c in row) for row in truth.A)

    return InexactInput(truth.m, truth.N, truth.lam, vec, mat, truth=truth, max_bits=max_bits)


def exact_oracle(y: Sequence, A: Sequence[Sequence], lam) -> InexactInput:
    """Dyadic oracle for rational data given as plain values."""
    return dyadic_oracle(GroundTruth.from_values(y, A, lam))


# -- adversaries ----------------------------------------------------------

class AdversaryStrategy:
    """Proposes (y_n, A_n) for each precision n; validated against the truth."""

    def propose(self, truth: GroundTruth, n: int) -> tuple[Vector, Matrix]:
        raise NotImplementedError


class ZeroPerturbation(AdversaryStrategy):
    def propose(self, truth, n):
        return dyadic_oracle(truth)._vector_fn(n), dyadic_oracle(truth)._matrix_fn(n)


class Steer(AdversaryStrategy):
    """Pick, entry by entry, the admissible n-bit grid point closest to a target.

    Admissible means within 2^-n of the truth and inside the bit-size bound,
    so the adversary never breaks the oracle contract.
    """

    def __init__(self, target_y: Sequence, target_A: Sequence[Sequence]):
        self.target_y = tuple(to_fraction(v) for v in target_y)
        self.target_A = tuple(tuple(to_fraction(v) for v in row) for row in target_A)

    @staticmethod
    def _pick(c: Constant, target: Fraction, n: int) -> Fraction:
        tol = Fraction(1, 1 << n)
        f = c.floor_scaled(n)
        best = None
        for k in (f - 1, f, f + 1, f + 2):
            v = Fraction(k, 1 << n)
            if not within(c, v, tol) or bit_size(v) > bit_bound(c, n):
                continue
            key = (abs(v - target), -v)  # ties go up, like nearest_dyadic
            if best is None or key < best[0]:
                best = (key, v)
        if best is None:  # unreachable: the nearest dyadic is always admissible
            return nearest_dyadic(c, n)
        return best[1]

    def propose(self, truth, n):
        if len(self.target_y) != truth.m or len(self.target_A) != truth.m:
            raise ContractViolation("target shape does not match the truth")
        y = tuple(self._pick(c, t, n) for c, t in zip(truth.y, self.target_y))
        A = tuple(
            tuple(self._pick(c, t, n) for c, t in zip(row, trow))
            for row, trow in zip(truth.A, self.target_A)
        )
        return y, A


class Schedule(AdversaryStrategy):
    """Round a per-precision target instance to n bits.

    ``targets(n)`` returns (y, A); every target must sit within 2^-(n+1)
    of the truth for the result to pass validation.
    """

    def __init__(self, targets: Callable[[int], tuple[Sequence, Sequence[Sequence]]]):
        self.targets = targets

    def propose(self, truth, n):
        ty, tA = self.targets(n)
        y = tuple(nearest_dyadic(RationalConstant(to_fraction(v)), n) for v in ty)
        A = tuple(
            tuple(nearest_dyadic(RationalConstant(to_fraction(v)), n) for v in row) for row in tA
        )
        return y, A


def check_approximation(truth: GroundTruth, n: int, y: Vector, A: Matrix) -> None:
    """Raise OracleToleranceError unless (y, A) meets both oracle guarantees at n."""
    tol = Fraction(1, 1 << n)
    if len(y) != truth.m or len(A) != truth.m or any(len(r) != truth.N for r in A):
        raise OracleToleranceError(f"shape mismatch at n={n}")
    pairs = list(zip(truth.y, y)) + [
        (c, v) for crow, vrow in zip(truth.A, A) for c, v in zip(crow, vrow)
    ]
    for c, v in pairs:
        if not within(c, v, tol):
            raise OracleToleranceError(f"entry {v} is not within 2^-{n} of {c.tag()}")
        if bit_size(v) > bit_bound(c, n):
            raise OracleToleranceError(f"entry {v} exceeds the bit-size bound at n={n}")


def adversarial_oracle(
    truth: GroundTruth,
    strategy: AdversaryStrategy,
    check_upto: int = 64,
    max_bits: int | None = None,
) -> InexactInput:
    """Oracle whose answers are chosen by ``strategy`` but still honour the contract.

    Proposals for n = 1..check_upto are validated here; later precisions
    are validated when requested.
    """
    for n in range(1, check_upto + 1):
        check_approximation(truth, n, *strategy.propose(truth, n))

    def vec(n):
        y, A = strategy.propose(truth, n)
        check_approximation(truth, n, y, A)
        return y

    def mat(n):
        y, A = strategy.propose(truth, n)
        check_approximation(truth, n, y, A)
        return A

    return InexactInput(truth.m, truth.N, truth.lam, vec, mat, truth=truth, max_bits=max_bits)
