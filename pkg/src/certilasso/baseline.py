"""Floating-point LASSO baseline and the threshold-then-support procedure.

``float_lasso`` is plain FISTA with step 1/L, where L estimates the
largest eigenvalue of 2 A^T A by power iteration.  It stops when the
relative change of the objective drops below ``objective_tolerance``,
which is exactly the kind of stopping rule that makes float solvers
report the wrong support on badly conditioned data.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

CSV_HEADER = ("param", "threshold", "trials", "successes", "success_rate")
FAMILIES = ("deterministic-epsilon", "uniform", "exponential", "normal")
DEFAULT_EPSILONS = tuple(10.0 ** -k for k in range(1, 7))
DEFAULT_NS = tuple(range(10, 501, 10))


class FloatEscalation(ArithmeticError):
    """Non-finite arithmetic; retry at a higher working precision."""


@dataclass(frozen=True)
class FloatSolveConfig:
    working_precision_bits: int = 53
    max_iters: int = 10_000
    objective_tolerance: float = 1e-10
    threshold: float = 1e-2

    def __post_init__(self):
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    def escalated(self) -> "FloatSolveConfig":
        """Double the working precision and halve the threshold."""
        return replace(
            self,
            working_precision_bits=2 * self.working_precision_bits,
            threshold=self.threshold / 2,
            objective_tolerance=self.objective_tolerance / 2 ** self.working_precision_bits,
        )


def _soft(u, t):
    return np.sign(u) * np.maximum(np.abs(u) - t, 0.0)


def _lipschitz(A: np.ndarray, iters: int = 100) -> np.ndarray:
    """Power-iteration estimate of the top eigenvalue of 2 A^T A, per batch item."""
    T, m, N = A.shape
    v = np.full((T, N), 1.0 / np.sqrt(N))
    est = np.zeros(T)
    for _ in range(iters):
        Av = (A * v[:, None, :]).sum(-1)
        w = 2.0 * (A * Av[:, :, None]).sum(1)
        norm = np.sqrt((w * w).sum(-1))
        est = norm
        safe = np.where(norm > 0, norm, 1.0)
        v = w / safe[:, None]
    return est * 1.01


def fista_batch(A: np.ndarray, y: np.ndarray, lam: float, cfg: FloatSolveConfig) -> np.ndarray:
    """FISTA on a stack of problems: A is (T, m, N), y is (T, m).

    Each problem stops on its own; the returned row is its best iterate.
    """
    A = np.asarray(A, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    T, m, N = A.shape
    L = _lipschitz(A)
    step = np.where(L > 0, 1.0 / np.where(L > 0, L, 1.0), 0.0)[:, None]

    def apply(M, v):
        return np.matmul(M, v[:, :, None])[:, :, 0]

    def objective(A, y, x):
        r = apply(A, x) - y
        return (r * r).sum(-1) + lam * np.abs(x).sum(-1)

    best = np.zeros((T, N))
    # only unfinished problems stay in the working arrays
    idx = np.flatnonzero(L > 0)
    A, y, step = A[idx], y[idx], step[idx]
    At = A.transpose(0, 2, 1)
    x = np.zeros((len(idx), N))
    z = x.copy()
    tk = np.ones(len(idx))
    f = objective(A, y, x)
    fbest = f.copy()
    with np.errstate(over="raise", invalid="raise"):
        try:
            for _ in range(cfg.max_iters):
                if not len(idx):
                    break
                grad = 2.0 * apply(At, apply(A, z) - y)
                xn = _soft(z - step * grad, step * lam)
                tn = (1.0 + np.sqrt(1.0 + 4.0 * tk * tk)) / 2.0
                z = xn + ((tk - 1.0) / tn)[:, None] * (xn - x)
                fn = objective(A, y, xn)
                better = fn < fbest
                best[idx[better]] = xn[better]
                fbest = np.where(better, fn, fbest)
                keep = np.abs(f - fn) > cfg.objective_tolerance * np.maximum(1.0, np.abs(f))
                x, tk, f = xn, tn, fn
                if not keep.all():
                    idx, A, At, y, step = idx[keep], A[keep], At[keep], y[keep], step[keep]
                    x, z, tk, f, fbest = x[keep], z[keep], tk[keep], f[keep], fbest[keep]
        except FloatingPointError as exc:
            raise FloatEscalation(str(exc)) from exc
    if not np.isfinite(best).all():
        raise FloatEscalation("non-finite iterate")
    return best


def _fista_mp(A, y, lam, cfg: FloatSolveConfig) -> list:
    """Same iteration in mpmath at cfg.working_precision_bits."""
    import mpmath

    ctx = mpmath.mp.clone()
    ctx.prec = cfg.working_precision_bits
    m, N = len(A), len(A[0])
    A = [[ctx.mpf(Fraction(v).numerator) / Fraction(v).denominator for v in row] for row in A]
    y = [ctx.mpf(Fraction(v).numerator) / Fraction(v).denominator for v in y]
    lam = ctx.mpf(Fraction(lam).numerator) / Fraction(lam).denominator

    def Ax(x):
        return [ctx.fsum(A[i][j] * x[j] for j in range(N)) for i in range(m)]

    def grad(x):
        r = [a - b for a, b in zip(Ax(x), y)]
        return [2 * ctx.fsum(A[i][j] * r[i] for i in range(m)) for j in range(N)]

    def objective(x):
        r = [a - b for a, b in zip(Ax(x), y)]
        return ctx.fsum(v * v for v in r) + lam * ctx.fsum(abs(v) for v in x)

    def gram_mul(v):
        Av = Ax(v)
        return [2 * ctx.fsum(A[i][j] * Av[i] for i in range(m)) for j in range(N)]

    v = [ctx.mpf(1)] * N
    L = ctx.mpf(0)
    for _ in range(100):
        w = gram_mul(v)
        L = ctx.sqrt(ctx.fsum(a * a for a in w))
        if L == 0:
            return [0.0] * N
        v = [a / L for a in w]
    L *= ctx.mpf("1.01")
    step = 1 / L
    x = [ctx.mpf(0)] * N
    z = list(x)
    tk = ctx.mpf(1)
    f = objective(x)
    best, fbest = list(x), f
    for _ in range(cfg.max_iters):
        g = grad(z)
        u = [a - step * b for a, b in zip(z, g)]
        xn = [ctx.sign(a) * max(abs(a) - step * lam, 0) for a in u]
        tn = (1 + ctx.sqrt(1 + 4 * tk * tk)) / 2
        z = [a + (tk - 1) / tn * (a - b) for a, b in zip(xn, x)]
        fn = objective(xn)
        if fn < fbest:
            best, fbest = list(xn), fn
        stop = abs(f - fn) <= cfg.objective_tolerance * max(1, abs(f))
        x, tk, f = xn, tn, fn
        if stop:
            break
    return best


def float_lasso(y: Sequence, A: Sequence[Sequence], lam, cfg: FloatSolveConfig | None = None):
    """Approximate LASSO minimiser as a list of floats (or mpf above 53 bits)."""
    cfg = cfg or FloatSolveConfig()
    if cfg.working_precision_bits > 53:
        return _fista_mp(A, y, lam, cfg)
    An = np.array([[float(v) for v in row] for row in A], dtype=np.float64)[None]
    yn = np.array([float(v) for v in y], dtype=np.float64)[None]
    return list(fista_batch(An, yn, float(lam), cfg)[0])


def threshold_support(x_hat: Iterable, threshold: float) -> tuple[int, ...]:
    """Zero every |x_i| < threshold and return the remaining indices."""
    return tuple(i for i, v in enumerate(x_hat) if abs(v) >= threshold)


# -- near-duplicate and random-family sweeps ---------------------------------

def example_instance(eps) -> tuple[tuple[Fraction], tuple[tuple[Fraction, Fraction]], Fraction]:
    """b = 1, U = (1 - eps, 1), lam = 1/10 with eps taken as an exact decimal."""
    e = Fraction(str(eps)) if isinstance(eps, float) else Fraction(eps)
    return (Fraction(1),), ((1 - e, Fraction(1)),), Fraction(1, 10)


def single_measurement_supports(a: Sequence, lam) -> set[tuple[int, ...]]:
    """All minimiser supports for b = 1 and one row a, computed exactly.

    With one measurement the fit only uses columns of largest |a_j|; if
    2 max|a_j| <= lam the minimiser is 0.
    """
    a = [Fraction(v) for v in a]
    lam = Fraction(lam)
    top = max(abs(v) for v in a)
    if 2 * top <= lam:
        return {()}
    return {(j,) for j, v in enumerate(a) if abs(v) == top}


def _generator(seed: int, family: str, N: int, trial: int) -> np.random.Generator:
    # Philox is counter-based: each (seed, family, N, trial) owns an independent stream
    fam = FAMILIES.index(family)
    key = [seed & 0xFFFFFFFFFFFFFFFF, (fam << 56) | (N << 24) | trial]
    return np.random.Generator(np.random.Philox(key=key))


def draw_row(family: str, N: int, rng: np.random.Generator) -> np.ndarray:
    if family == "uniform":
        return rng.uniform(0.0, 1.0, N)
    if family == "exponential":
        return rng.exponential(1.0, N)
    if family == "normal":
        return rng.normal(1.0, 1e-2, N)
    raise ValueError(f"unknown random family {family!r}")


def failure_sweep(
    family: str,
    thresholds: Sequence[float],
    trials: int,
    seed: int = 0,
    params: Sequence | None = None,
    cfg: FloatSolveConfig | None = None,
    lam: float | None = None,
) -> list[tuple]:
    """Success rates of threshold-then-support against exact ground truth.

    Rows are (param, threshold, trials, successes, success_rate) where
    param is epsilon for the deterministic family and N otherwise.
    """
    cfg = cfg or FloatSolveConfig()
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
    if trials <= 0:
        return []
    rows = []
    if family == "deterministic-epsilon":
        lam = 0.1 if lam is None else lam
        for eps in params or DEFAULT_EPSILONS:
            y, A, _ = example_instance(eps)
            An = np.array([[float(v) for v in A[0]]])
            x = fista_batch(np.repeat(An[None], trials, 0), np.ones((trials, 1)), lam, cfg)
            for thr in thresholds:
                ok = sum(threshold_support(row, thr) == (1,) for row in x)
                rows.append((eps, thr, trials, ok, ok / trials))
        return rows
    lam = 1e-2 if lam is None else lam
    for N in params or DEFAULT_NS:
        a = np.stack([draw_row(family, N, _generator(seed, family, N, t)) for t in range(trials)])
        x = fista_batch(a[:, None, :], np.ones((trials, 1)), lam, cfg)
        truth = [single_measurement_supports([Fraction(v) for v in row], Fraction(lam)) for row in a]
        for thr in thresholds:
            ok = sum(threshold_support(xr, thr) in t for xr, t in zip(x, truth))
            rows.append((N, thr, trials, ok, ok / trials))
    return rows


def sweep_csv(rows: Sequence[tuple]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for param, thr, trials, ok, rate in rows:
        w.writerow((repr(param) if isinstance(param, float) else param, repr(float(thr)), trials, ok, repr(float(rate))))
    return buf.getvalue()
