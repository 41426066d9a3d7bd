"""How far can the data move before the selected features change?

For eps = 1/10 the computable upper bounds come straight from the
certificate, the lower bound from the sigma quantities, and the search
brackets the true distance with actual perturbations.

    python demos/02_condition_bounds.py
"""
from fractions import Fraction

from certilasso import GroundTruth, dyadic_oracle, fsul, stsp_bounds, stsp_search, ulasso_enumerate
from certilasso.baseline import example_instance

y, A, lam = example_instance(Fraction(1, 10))
cert = ulasso_enumerate(y, A, lam)
b = stsp_bounds(cert, y, A, lam)
lo, hi = b.ub_sigma2_enclosure()

print(f"minimiser x = {tuple(str(v) for v in cert.x)}, KKT margin {cert.kkt_off_support_margin}")
print(f"upper bound via sigma1:  {b.ub_sigma1}")
print(f"upper bound via sigma2:  in [{float(lo):.6f}, {float(hi):.6f}]")
print(f"upper bound via sigma3:  {b.ub_sigma3}")
print(f"certified lower bound:   {float(b.lb):.3e}")

grid = [Fraction(1, 1 << k) for k in range(20, -1, -1)]
iv = stsp_search(y, A, lam, grid, trials=100)
print(f"search: no change up to {iv.no_change}, change found at size {iv.change} ({iv.witness_tag})")

out = fsul(dyadic_oracle(GroundTruth.from_values(y, A, lam)))
print(f"FSUL: support {[i + 1 for i in out.support]}, eta = 16^{out.iterations}, "
      f"so no perturbation below {float(1 / out.eta):.3e} changes it")
