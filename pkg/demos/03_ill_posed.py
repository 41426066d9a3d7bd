"""Ill-posed data never get an answer, steered data never get a wrong one.

    python demos/03_ill_posed.py
"""
from fractions import Fraction

from certilasso import BudgetExhausted, FsulBudget, GroundTruth, adversarial_oracle, dyadic_oracle, fsul
from certilasso.conditioning import ILL_POSED_KINDS, make_ill_posed, perturb_to_select
from certilasso.lasso import ulasso_enumerate
from certilasso.oracle import Steer

for kind in ILL_POSED_KINDS[:3]:
    w = make_ill_posed(kind)
    out = fsul(dyadic_oracle(w.truth()), FsulBudget(max_iterations=64))
    print(f"{kind:>18}: {type(out).__name__} after {out.iterations} iterations ({out.reason})")

# the vanishing family approaches the boundary as t -> 0; eta grows as t shrinks
w = make_ill_posed("vanishing-coordinate")
for k in (2, 6, 10, 14):
    y, A = w.family(Fraction(1, 1 << k))
    out = fsul(dyadic_oracle(GroundTruth.from_values(y, A, w.lam)))
    print(f"vanishing t=2^-{k:<2}: support {[i + 1 for i in out.support]}, eta = 16^{out.iterations}")

# an oracle that answers as close to the other solution as it is allowed to
dup = make_ill_posed("duplicate-columns")
print()
for k in (4, 8, 12):
    d = Fraction(1, 1 << k)
    A = perturb_to_select(dup.A, dup.cert_b.x, d)
    target = perturb_to_select(dup.A, dup.cert_a.x, d)
    truth = GroundTruth.from_values(dup.y, A, dup.lam)
    out = fsul(adversarial_oracle(truth, Steer(dup.y, target)))
    true = [i + 1 for i in ulasso_enumerate(dup.y, A, dup.lam).support]
    got = "BudgetExhausted" if isinstance(out, BudgetExhausted) else [i + 1 for i in out.support]
    print(f"steered, delta=2^-{k:<2}: true support {true}, FSUL says {got}")
