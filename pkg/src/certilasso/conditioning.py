"""Condition numbers of LASSO feature selection: bounds, search, witnesses.

The stability support stsp(y, A) is the smallest max-norm perturbation of
(y, A) that changes the support of some minimiser.  It is bracketed by
the sigma quantities:

    stsp <= 4 ||A||_max sigma1 / lam     (when sigma1 < lam/4)
    stsp <= sqrt(sigma2)
    stsp <= ||A||_max sigma3
    stsp >= (mN)^(-1/2) min{ sigma^2 / q(alpha, sigma), sqrt(sigma) / (6 alpha), alpha }

with alpha = max(||A||_2, ||y||_2, 1).  Square roots are replaced by
dyadic enclosures rounded in the safe direction, so the lower bound is a
rational that is provably below stsp.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .exact import (
    ZERO,
    ContractViolation,
    Matrix,
    Vector,
    column,
    gram,
    is_psd,
    max_abs,
    norm2_sq,
    norm_inf,
    posdef,
    shape,
    shift_diagonal,
    sqrt_ceil,
    sqrt_floor,
    to_fraction,
)
from .lasso import (
    LassoCertificate,
    certify_guess,
    kkt_candidates,
    minimal_support_solutions,
    ulasso_enumerate,
    verify_kkt,
)
from .oracle import GroundTruth
from .sigma import INF, sigma2_enclosure, sigma_values

DEFAULT_ROOT_BITS = 32


# -- the q polynomial and the certified lower bound ---------------------------

def q_poly(nu, xi, lam, N: int, bits: int = DEFAULT_ROOT_BITS) -> Fraction:
    """96 nu^5 + 12 nu^3 (1 + lam sqrt N) sqrt xi + xi (2 nu^3 / lam + 3 nu).

    Both roots are rounded up to a multiple of 2^-bits, so the result is an
    upper bound on q (exact when the roots are dyadic at that precision).
    """
    nu, xi, lam = to_fraction(nu), to_fraction(xi), to_fraction(lam)
    if nu <= 0 or xi <= 0 or lam <= 0 or N < 1:
        raise ContractViolation("q is defined for positive nu, xi, lam and N >= 1")
    rN, rxi = sqrt_ceil(Fraction(N), bits), sqrt_ceil(xi, bits)
    nu3 = nu ** 3
    return 96 * nu ** 5 + 12 * nu3 * (1 + lam * rN) * rxi + xi * (2 * nu3 / lam + 3 * nu)


def alpha_bounds(y: Vector, A: Matrix, bits: int = DEFAULT_ROOT_BITS) -> tuple[Fraction, Fraction]:
    """(lower, upper) rational bounds on max(||A||_2, ||y||_2, 1).

    ||A||_2 lies between the largest column or row 2-norm and the
    Frobenius norm, and all of those are square roots of rationals.
    """
    m, N = shape(A)
    fro = sum((norm2_sq(row) for row in A), ZERO)
    widest = max(
        max((norm2_sq(row) for row in A), default=ZERO),
        max((norm2_sq(column(A, j)) for j in range(N)), default=ZERO),
    )
    ysq = norm2_sq(y)
    lo = max(sqrt_floor(widest, bits), sqrt_floor(ysq, bits), Fraction(1))
    hi = max(sqrt_ceil(fro, bits), sqrt_ceil(ysq, bits), Fraction(1))
    return lo, hi


def stsp_lower_bound(
    alpha_ub,
    sigma_lb,
    m: int,
    N: int,
    lam,
    alpha_lb=None,
    bits: int = DEFAULT_ROOT_BITS,
) -> Fraction:
    """Certified rational lower bound on stsp.

    ``alpha_ub`` enters the two terms that shrink as alpha grows and
    ``alpha_lb`` (defaulting to alpha_ub) the bare alpha term.  Every root
    is rounded so the result can only go down.
    """
    alpha_ub, sigma_lb, lam = to_fraction(alpha_ub), to_fraction(sigma_lb), to_fraction(lam)
    alpha_lb = alpha_ub if alpha_lb is None else to_fraction(alpha_lb)
    if sigma_lb <= 0:
        return ZERO
    if alpha_lb > alpha_ub:
        raise ContractViolation("alpha lower bound exceeds alpha upper bound")
    t1 = sigma_lb * sigma_lb / q_poly(alpha_ub, sigma_lb, lam, N, bits)
    t2 = sqrt_floor(sigma_lb, bits) / (6 * alpha_ub)
    t3 = alpha_lb
    return min(t1, t2, t3) / sqrt_ceil(Fraction(m * N), bits)


# -- the sigma upper bounds -------------------------------------------------

@dataclass(frozen=True)
class StspBounds:
    """Certified bounds on stsp.

    ub_sigma2 is sqrt(sigma2), which is usually irrational.  It is kept
    as the support Gram matrix ``sigma2_gram``; ``below_ub_sigma2(r)``
    decides r <= sqrt(sigma2) exactly through r^2 <= sigma2.
    """

    ub_sigma1: Fraction | None
    sigma2_gram: Matrix | None
    ub_sigma3: Fraction | None
    lb: Fraction | None = None

    def below_ub_sigma2(self, r) -> bool:
        if self.sigma2_gram is None:
            return True
        r = to_fraction(r)
        return is_psd(shift_diagonal(self.sigma2_gram, r * r))

    def below_upper_bounds(self, r) -> bool:
        """r <= every applicable upper bound, decided exactly."""
        r = to_fraction(r)
        if self.ub_sigma1 is not None and r > self.ub_sigma1:
            return False
        if self.ub_sigma3 is not None and r > self.ub_sigma3:
            return False
        return self.below_ub_sigma2(r)

    def ub_sigma2_enclosure(self, bits: int = 40) -> tuple[Fraction, Fraction] | None:
        if self.sigma2_gram is None:
            return None
        lo, hi = sigma2_enclosure(self.sigma2_gram, bits)
        return sqrt_floor(lo, bits), sqrt_ceil(hi, bits)


def stsp_upper_bounds(cert, y: Vector, A: Matrix, lam) -> StspBounds:
    """The three sigma bounds for a certified minimiser (lower bound left empty)."""
    lam = to_fraction(lam)
    sigma1, sigma3, S = sigma_values(cert, y, A, lam)
    amax = max_abs(A)
    ub1 = 4 * amax * sigma1 / lam if sigma1 < lam / 4 else None
    G = gram(A, S) if S else None
    ub3 = amax * sigma3 if S else None
    return StspBounds(ub1, G, ub3)


def sigma_lower_bound(cert, y: Vector, A: Matrix, lam, bits: int = 40) -> Fraction:
    """A rational below sigma = min(sigma1, sigma2^2, sigma3); 0 when ill-posed."""
    lam = to_fraction(lam)
    sigma1, sigma3, S = sigma_values(cert, y, A, lam)
    if sigma1 <= 0:
        return ZERO
    parts = [sigma1]
    if S:
        lo, _ = sigma2_enclosure(gram(A, S), bits)
        parts += [lo * lo, sigma3]
    return min(parts)


def stsp_bounds(cert, y: Vector, A: Matrix, lam, bits: int = DEFAULT_ROOT_BITS) -> StspBounds:
    """Upper bounds plus the certified lower bound."""
    lam = to_fraction(lam)
    m, N = shape(A)
    ubs = stsp_upper_bounds(cert, y, A, lam)
    a_lo, a_hi = alpha_bounds(y, A, bits)
    lb = stsp_lower_bound(a_hi, sigma_lower_bound(cert, y, A, lam), m, N, lam, a_lo, bits)
    return StspBounds(ubs.ub_sigma1, ubs.sigma2_gram, ubs.ub_sigma3, lb)


# -- perturbations and the empirical search ---------------------------------

Perturbation = tuple[Vector, Matrix, str]


def perturbation_size(y: Vector, A: Matrix, y2: Vector, A2: Matrix) -> Fraction:
    dy = norm_inf(a - b for a, b in zip(y, y2))
    dA = max((abs(a - b) for r1, r2 in zip(A, A2) for a, b in zip(r1, r2)), default=ZERO)
    return max(dy, dA)


def _scale_columns(A: Matrix, factors: Sequence[Fraction]) -> Matrix:
    return tuple(tuple(a * f for a, f in zip(row, factors)) for row in A)


def _min_eigvec(G: Matrix) -> tuple[Fraction, ...]:
    w, V = np.linalg.eigh(np.array([[float(v) for v in row] for row in G]))
    return tuple(Fraction(float(v)).limit_denominator(1 << 30) for v in V[:, 0])


def targeted_perturbations(y: Vector, A: Matrix, lam, cert: LassoCertificate, r) -> Iterator[Perturbation]:
    """Perturbations of max-norm <= r aimed at each sigma quantity.

    sigma1: grow an off-support column until its correlation crosses lam/2.
    sigma3: remove x_i A_i from y so that coordinate i can drop out.
    sigma2: subtract A v v^T / |v|^2 for a near-null direction v of A_S.
    Also grow or shrink all off-support columns together.
    """
    r = to_fraction(r)
    if r <= 0:
        return
    m, N = shape(A)
    S = cert.support
    off = [i for i in range(N) if i not in S]
    for i in off:
        amax = norm_inf(column(A, i))
        if amax:
            f = [Fraction(1)] * N
            f[i] = 1 + r / amax
            yield y, _scale_columns(A, f), f"sigma1-column-{i}"
    if off:
        amax = max(norm_inf(column(A, i)) for i in off)
        if amax:
            for sgn, tag in ((1, "grow"), (-1, "shrink")):
                d = min(r / amax, Fraction(1, 2))
                f = [Fraction(1)] * N
                for i in off:
                    f[i] = 1 + sgn * d
                yield y, _scale_columns(A, f), f"offsupport-{tag}"
    for i in S:
        size = abs(cert.x[i]) * norm_inf(column(A, i))
        if size and size <= r:
            c = r / size  # overshoot as far as the radius allows
            Ai = column(A, i)
            yield tuple(v - c * cert.x[i] * a for v, a in zip(y, Ai)), A, f"sigma3-coordinate-{i}"
    if S:
        v = _min_eigvec(gram(A, S))
        vv = norm2_sq(v)
        if vv:
            Av = tuple(sum((A[k][j] * vj for j, vj in zip(S, v)), ZERO) for k in range(m))
            E = [[ZERO] * N for _ in range(m)]
            for k in range(m):
                for j, vj in zip(S, v):
                    E[k][j] = Av[k] * vj / vv
            B = tuple(tuple(A[k][j] - E[k][j] for j in range(N)) for k in range(m))
            if perturbation_size(y, A, y, B) <= r:
                yield y, B, "sigma2-rank-one"


def random_perturbations(
    y: Vector, A: Matrix, r, count: int, rng: np.random.Generator, resolution: int = 1 << 16
) -> Iterator[Perturbation]:
    """Uniform dyadic perturbations in [-r, r] followed by random corners."""
    r = to_fraction(r)
    if r <= 0:
        return
    m, N = shape(A)
    n_corner = count // 4
    for t in range(count):
        k = m + m * N
        if t < count - n_corner:
            raw = rng.integers(-resolution, resolution, size=k, endpoint=True)
            d = [r * int(v) / resolution for v in raw]
            tag = "random"
        else:
            d = [r if b else -r for b in rng.integers(0, 2, size=k)]
            tag = "corner"
        y2 = tuple(a + b for a, b in zip(y, d[:m]))
        A2 = tuple(tuple(A[i][j] + d[m + i * N + j] for j in range(N)) for i in range(m))
        yield y2, A2, tag


def perturbations(
    y: Vector, A: Matrix, lam, r, count: int, rng: np.random.Generator, cert: LassoCertificate | None = None
) -> Iterator[Perturbation]:
    """Targeted then random perturbations, all of max-norm <= r."""
    cert = cert or ulasso_enumerate(y, A, lam)
    yield from targeted_perturbations(y, A, lam, cert, r)
    yield from random_perturbations(y, A, r, count, rng)


def support_changed(y: Vector, A: Matrix, lam, cert: LassoCertificate) -> bool:
    """Does (y, A) admit a minimiser whose support differs from cert.support?

    If (support, signs) still certifies with a strict margin and an
    invertible Gram matrix the minimiser is unique and nothing changed.
    Otherwise every minimal-support minimiser is enumerated.
    """
    new = certify_guess(y, A, lam, cert.support, cert.sign_on_support)
    if new is not None and new.kkt_off_support_margin > 0:
        return False
    return any(c.support != cert.support for c in kkt_candidates(y, A, lam))


@dataclass(frozen=True)
class StspInterval:
    """Empirical bracket: no change seen up to ``no_change``; a change of size ``change``."""

    no_change: Fraction
    change: Fraction | float
    witness_tag: str | None = None


def stsp_search(
    y: Vector,
    A: Matrix,
    lam,
    radius_grid: Sequence,
    trials: int = 200,
    seed: int = 0,
) -> StspInterval:
    """Search for support changes on a grid of radii.

    ``change`` is the exact max-norm of the smallest changing
    perturbation found; it is a true upper bound on stsp.  ``no_change``
    is the largest grid radius below it where nothing changed, which is
    only evidence.
    """
    lam = to_fraction(lam)
    grid = sorted({to_fraction(r) for r in radius_grid})
    certs = minimal_support_solutions(y, A, lam)
    if len({c.support for c in certs}) > 1:
        return StspInterval(ZERO, ZERO, "multiple-supports")
    cert = certs[0]
    rng = np.random.Generator(np.random.Philox(key=[seed, len(grid)]))
    quiet = []
    best, tag = INF, None
    for r in grid:
        if r > 0:
            for y2, A2, kind in perturbations(y, A, lam, r, trials, rng, cert):
                if support_changed(y2, A2, lam, cert):
                    size = perturbation_size(y, A, y2, A2)
                    if size < best:
                        best, tag = size, kind
        if best < INF:
            break
        quiet.append(r)
    no_change = max((r for r in quiet if r < best), default=ZERO)
    return StspInterval(no_change, best, tag)


# -- ill-posed witnesses -----------------------------------------------------

ILL_POSED_KINDS = ("duplicate-columns", "boundary-kkt", "singular-gram", "vanishing-coordinate")


@dataclass(frozen=True)
class IllPosedWitness:
    kind: str
    y: Vector
    A: Matrix
    lam: Fraction
    cert_a: LassoCertificate
    cert_b: LassoCertificate | None = None
    family: Callable[[Fraction], tuple[Vector, Matrix]] | None = field(default=None, compare=False, repr=False)

    def truth(self) -> GroundTruth:
        return GroundTruth.from_values(self.y, self.A, self.lam)

    def artifacts(self) -> dict:
        """Verification sidecar: certificates (1-based supports) plus the exact quantities that make it ill-posed."""
        S = self.cert_a.support
        doc = {
            "kind": self.kind,
            "cert_a": self.cert_a.to_json(one_based=True),
            "cert_b": self.cert_b.to_json(one_based=True) if self.cert_b else None,
            "kkt_off_support_margin": str(self.cert_a.kkt_off_support_margin),
            "support_gram_posdef": posdef(gram(self.A, S)),
        }
        if self.family is not None:
            doc["family"] = "y = (lam/2 + t), A = (1, 1/2); x = (t, 0)"
        return doc

    def dump(self, path, sidecar_path=None) -> None:
        with open(path, "w") as fh:
            json.dump(self.truth().to_json(), fh, indent=2)
            fh.write("\n")
        sidecar_path = sidecar_path or _sidecar_name(str(path))
        with open(sidecar_path, "w") as fh:
            json.dump(self.artifacts(), fh, indent=2)
            fh.write("\n")


def _sidecar_name(path: str) -> str:
    return path[:-5] + ".witness.json" if path.endswith(".json") else path + ".witness.json"


def _vanishing(lam: Fraction) -> Callable[[Fraction], tuple[Vector, Matrix]]:
    def instance(t) -> tuple[Vector, Matrix]:
        return (lam / 2 + to_fraction(t),), ((Fraction(1), Fraction(1, 2)),)

    return instance


def make_ill_posed(kind: str, lam=Fraction(1, 10), t=Fraction(1, 1024)) -> IllPosedWitness:
    """Small exact instances with stsp = 0 (or a family approaching it)."""
    lam = to_fraction(lam)
    F = Fraction
    if kind == "duplicate-columns":
        y, A = (F(1),), ((F(1), F(1)),)
        certs = minimal_support_solutions(y, A, lam)
        a = certs[0]
        b = next(c for c in certs if c.support != a.support)
        return IllPosedWitness(kind, y, A, lam, a, b)
    if kind == "boundary-kkt":
        y, A = (F(1),), ((lam / 2, lam / 4),)
        return IllPosedWitness(kind, y, A, lam, verify_kkt(y, A, lam, (ZERO, ZERO)))
    if kind == "singular-gram":
        # two proportional rows of identical columns; x splits its weight evenly
        y, A = (F(2), F(1)), ((F(1), F(1)), (F(1, 2), F(1, 2)))
        x = _even_split(y, A, lam)
        return IllPosedWitness(kind, y, A, lam, verify_kkt(y, A, lam, x))
    if kind == "vanishing-coordinate":
        fam = _vanishing(lam)
        t = to_fraction(t)
        y, A = fam(t)
        return IllPosedWitness(kind, y, A, lam, verify_kkt(y, A, lam, (t, ZERO)), family=fam)
    raise ValueError(f"unknown witness kind {kind!r}; choose from {ILL_POSED_KINDS}")


def _even_split(y: Vector, A: Matrix, lam: Fraction) -> Vector:
    # with identical columns a, the minimiser puts total weight w on them with
    # 2 a^T (a w - y) = -lam, i.e. w = (a^T y - lam/2) / |a|^2
    a = column(A, 0)
    w = (sum((p * q for p, q in zip(a, y)), ZERO) - lam / 2) / norm2_sq(a)
    return (w / 2, w / 2)


def perturb_to_select(A: Matrix, x: Sequence[Fraction], delta) -> Matrix:
    """A (I - delta E) with E the indicator of the off-support coordinates of x.

    For a minimal-support minimiser x and delta in (0, 1) this makes x the
    unique minimiser of the perturbed problem.
    """
    delta = to_fraction(delta)
    if not 0 < delta < 1:
        raise ContractViolation("delta must lie in (0, 1)")
    f = [Fraction(1) if v != 0 else 1 - delta for v in x]
    return _scale_columns(A, f)


def random_rational_matrix(rng: np.random.Generator, m: int, N: int, scale: int = 8) -> Matrix:
    """Entries k/scale with k uniform in [-2 scale, 2 scale]."""
    raw = rng.integers(-2 * scale, 2 * scale, size=(m, N), endpoint=True)
    return tuple(tuple(Fraction(int(v), scale) for v in row) for row in raw)


def random_rational_vector(rng: np.random.Generator, m: int, scale: int = 8) -> Vector:
    raw = rng.integers(-2 * scale, 2 * scale, size=m, endpoint=True)
    return tuple(Fraction(int(v), scale) for v in raw)


def multi_solution_instance(rng: np.random.Generator, m: int = 2, N: int = 3, lam=Fraction(1, 10), tries: int = 200):
    """(y, A) with at least two minimal-support minimisers of different support.

    Built by copying a column (possibly negated) so that any minimiser
    using it can shift its weight onto the copy.
    """
    lam = to_fraction(lam)
    if N < 2:
        raise ContractViolation("need N >= 2 to duplicate a column")
    for _ in range(tries):
        base = random_rational_matrix(rng, m, N - 1)
        y = random_rational_vector(rng, m)
        j = int(rng.integers(0, N - 1))
        sgn = 1 if rng.integers(0, 2) else -1
        A = tuple(row + (sgn * row[j],) for row in base)
        certs = minimal_support_solutions(y, A, lam)
        if len({c.support for c in certs}) > 1:
            return y, A, certs
    raise RuntimeError("no multi-solution instance found; increase tries")
