from fractions import Fraction

import numpy as np
import pytest
from hypothesis import settings

from certilasso.lasso import minimal_support_solutions

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

DENOMS = (1, 2, 3, 4, 5, 6, 7, 8, 9)


def random_instance(rng, m, N, lo=-3, hi=3):
    """Small rationals p/q with q in 1..9; most are not dyadic."""

    def entry():
        q = int(rng.choice(DENOMS))
        return Fraction(int(rng.integers(lo * q, hi * q, endpoint=True)), q)

    y = tuple(entry() for _ in range(m))
    A = tuple(tuple(entry() for _ in range(N)) for _ in range(m))
    return y, A


def unique_instances(seed, count, m_max=3, N_max=5, lam=Fraction(1, 2)):
    """Seeded random instances whose minimal-support solution is unique."""
    rng = np.random.Generator(np.random.Philox(key=[seed, 0]))
    out = []
    while len(out) < count:
        m = int(rng.integers(1, m_max, endpoint=True))
        N = int(rng.integers(1, N_max, endpoint=True))
        y, A = random_instance(rng, m, N)
        certs = minimal_support_solutions(y, A, lam)
        if len(certs) == 1 and certs[0].kkt_off_support_margin > 0:
            out.append((y, A, lam, certs[0]))
    return out


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=[2024, 1]))


_ACCEPTANCE = []


def record_acceptance(line):
    _ACCEPTANCE.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
