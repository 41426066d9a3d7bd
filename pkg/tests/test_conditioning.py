import json
from fractions import Fraction as F

import numpy as np
import pytest

from conftest import unique_instances
from certilasso.conditioning import (
    ILL_POSED_KINDS,
    StspBounds,
    alpha_bounds,
    make_ill_posed,
    multi_solution_instance,
    perturb_to_select,
    perturbation_size,
    perturbations,
    q_poly,
    sigma_lower_bound,
    stsp_bounds,
    stsp_lower_bound,
    stsp_search,
    stsp_upper_bounds,
    support_changed,
)
from certilasso.exact import ContractViolation, posdef, shift_diagonal
from certilasso.lasso import minimal_support_solutions, ulasso_enumerate, verify_kkt
from certilasso.oracle import load_ground_truth

LAM = F(1, 10)
NEAR_TWIN = ((F(1),), ((F(9, 10), F(1)),))
GRID = [F(0)] + [F(1, 1 << k) for k in range(24, -1, -1)]


def test_q_poly_examples():
    assert q_poly(1, 1, 1, 1) == 125
    assert q_poly(1, 4, 1, 4) == 188
    assert q_poly(1, 1, 1, 1) < q_poly(1, 4, 1, 1)


def test_q_poly_rejects_nonpositive():
    with pytest.raises(ContractViolation):
        q_poly(0, 1, 1, 1)
    with pytest.raises(ContractViolation):
        q_poly(1, -1, 1, 1)


def test_q_poly_rounds_up():
    exact = 96 + 12 * (1 + F(1, 2) * 2 ** 0.5) * 2 ** 0.5 + 2 * (4 + 3)
    assert q_poly(1, 2, F(1, 2), 2) >= exact - 1e-9
    assert q_poly(1, 2, F(1, 2), 2, bits=8) >= q_poly(1, 2, F(1, 2), 2, bits=40)


def test_upper_bounds_near_twin():
    cert = ulasso_enumerate(*NEAR_TWIN, LAM)
    b = stsp_upper_bounds(cert, *NEAR_TWIN, LAM)
    assert b.ub_sigma1 == F(1, 5)
    assert b.ub_sigma3 == F(19, 20)
    assert b.below_ub_sigma2(1) and not b.below_ub_sigma2(1 + F(1, 10 ** 9))


def test_sigma1_guard_is_strict():
    # single column with sigma1 = lam/4 exactly: y = 0, A = (a), x = 0 gives |g| = 0; build via margin
    y, A = (F(1),), ((F(1, 40),),)
    cert = verify_kkt(y, A, LAM, (0,))
    assert cert.kkt_off_support_margin == LAM / 4
    assert stsp_upper_bounds(cert, y, A, LAM).ub_sigma1 is None


def test_zero_matrix_has_no_sigma1_bound():
    y, A = (F(1),), ((F(0), F(0)),)
    cert = ulasso_enumerate(y, A, LAM)
    assert cert.kkt_off_support_margin == LAM / 2
    b = stsp_upper_bounds(cert, y, A, LAM)
    assert b.ub_sigma1 is None and b.ub_sigma3 is None and b.sigma2_gram is None


def test_lower_bound_near_twin_is_positive_and_safe():
    cert = ulasso_enumerate(*NEAR_TWIN, LAM)
    lo, hi = alpha_bounds(*NEAR_TWIN)
    assert 1 <= lo <= hi <= 2
    assert sigma_lower_bound(cert, *NEAR_TWIN, LAM) == F(1, 200)
    lb = stsp_bounds(cert, *NEAR_TWIN, LAM).lb
    assert 0 < lb < F(1, 5)
    rng = np.random.Generator(np.random.Philox(key=[31, 0]))
    for y2, A2, _ in perturbations(*NEAR_TWIN, LAM, lb, 10 ** 4, rng, cert):
        assert perturbation_size(*NEAR_TWIN, y2, A2) <= lb
        assert not support_changed(y2, A2, LAM, cert)


def test_lower_bound_min_selection():
    # huge sigma: the alpha term wins
    big = stsp_lower_bound(1, 10 ** 12, 1, 1, 1)
    assert big == 1
    assert stsp_lower_bound(1, 10 ** 12, 2, 2, 1) == F(1, 2)


def test_lower_bound_monotone_in_sigma():
    vals = [stsp_lower_bound(2, F(1, k), 1, 2, LAM) for k in (10 ** 6, 1000, 200, 10, 1)]
    assert vals == sorted(vals)


def test_lower_bound_precision_safety():
    for sigma in (F(1, 200), F(1, 3), F(7, 2)):
        coarse = [stsp_lower_bound(F(3, 2), sigma, 2, 3, LAM, bits=b) for b in (4, 8, 16, 32, 48)]
        assert coarse == sorted(coarse)


def test_search_radius_zero_never_changes():
    iv = stsp_search(*NEAR_TWIN, LAM, [0], trials=50)
    assert iv.no_change == 0 and iv.change == float("inf")


def test_search_on_ill_posed_witness():
    w = make_ill_posed("duplicate-columns")
    iv = stsp_search(w.y, w.A, w.lam, GRID, trials=20)
    assert iv.no_change == 0 and iv.change == 0


def test_search_on_boundary_witness_changes_at_smallest_radius():
    w = make_ill_posed("boundary-kkt")
    iv = stsp_search(w.y, w.A, w.lam, GRID, trials=20)
    assert iv.no_change == 0 and iv.change <= GRID[1]


def test_search_near_twin_sandwich():
    cert = ulasso_enumerate(*NEAR_TWIN, LAM)
    b = stsp_bounds(cert, *NEAR_TWIN, LAM)
    iv = stsp_search(*NEAR_TWIN, LAM, GRID, trials=100)
    assert b.lb <= iv.change
    assert b.below_upper_bounds(iv.no_change)
    assert iv.no_change < iv.change <= F(1, 5)


def test_sandwich_on_random_instances():
    for y, A, lam, cert in unique_instances(seed=21, count=15):
        b = stsp_bounds(cert, y, A, lam)
        iv = stsp_search(y, A, lam, GRID, trials=20)
        assert b.lb <= iv.change
        assert b.below_upper_bounds(iv.no_change)


def test_witnesses():
    dup = make_ill_posed("duplicate-columns")
    assert dup.cert_b is not None and dup.cert_a.support != dup.cert_b.support
    verify_kkt(dup.y, dup.A, dup.lam, dup.cert_b.x)
    bd = make_ill_posed("boundary-kkt")
    assert bd.cert_a.kkt_off_support_margin == 0
    sg = make_ill_posed("singular-gram")
    assert sg.cert_a.x == (F(49, 50), F(49, 50))
    G = ((F(5, 4), F(5, 4)), (F(5, 4), F(5, 4)))
    for C in (F(0), F(1, 10 ** 6), F(1)):
        assert not posdef(shift_diagonal(G, C))
    vc = make_ill_posed("vanishing-coordinate")
    for k in (1, 5, 20):
        t = F(1, 1 << k)
        y, A = vc.family(t)
        cert = ulasso_enumerate(y, A, vc.lam)
        assert cert.x == (t, 0)
    y0, A0 = vc.family(F(0))
    assert ulasso_enumerate(y0, A0, vc.lam).support == ()


def test_unknown_witness_kind():
    with pytest.raises(ValueError):
        make_ill_posed("bogus")


def test_witness_export(tmp_path):
    for kind in ILL_POSED_KINDS:
        w = make_ill_posed(kind)
        p = tmp_path / f"{kind}.json"
        w.dump(p)
        truth = load_ground_truth(p)
        assert truth.exact() == (w.y, w.A) and truth.lam == w.lam
        side = json.loads((tmp_path / f"{kind}.witness.json").read_text())
        assert side["kind"] == kind and side["cert_a"]["x"]


def test_perturb_to_select_duplicate_columns():
    w = make_ill_posed("duplicate-columns")
    A2 = perturb_to_select(w.A, w.cert_a.x, F(1, 8))
    sols = minimal_support_solutions(w.y, A2, w.lam)
    assert len(sols) == 1 and sols[0].x == w.cert_a.x


def test_perturb_to_select_property():
    rng = np.random.Generator(np.random.Philox(key=[77, 0]))
    for _ in range(12):
        y, A, certs = multi_solution_instance(rng, m=int(rng.integers(1, 4)), N=int(rng.integers(2, 5)))
        for cert in certs:
            for delta in (F(1, 2), F(1, 4), F(1, 8)):
                sols = minimal_support_solutions(y, perturb_to_select(A, cert.x, delta), F(1, 10))
                assert [s.x for s in sols] == [cert.x]


def test_perturb_to_select_rejects_bad_delta():
    with pytest.raises(ContractViolation):
        perturb_to_select(NEAR_TWIN[1], (0, 1), F(1))


def test_bounds_dataclass_without_support():
    b = StspBounds(None, None, None)
    assert b.below_upper_bounds(10 ** 9)
    assert b.ub_sigma2_enclosure() is None
