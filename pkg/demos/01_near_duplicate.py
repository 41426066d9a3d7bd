"""Two nearly identical features: a float solver loses the right one, FSUL does not.

The data are b = 1 and one measurement row (1 - eps, 1) with lam = 1/10.
The exact minimiser is x = (0, 19/20), so the support is feature 2.

    python demos/01_table1.py
"""
from fractions import Fraction

from certilasso import FloatSolveConfig, GroundTruth, dyadic_oracle, float_lasso, fsul, threshold_support
from certilasso.baseline import example_instance
from certilasso.lasso import certify_guess

cfg = FloatSolveConfig(threshold=1e-2)
print(f"{'eps':>6}  {'float x':>26}  {'float support':>13}  {'exact check':>12}  {'FSUL':>5}  {'n':>3}")
for k in range(1, 7):
    y, A, lam = example_instance(Fraction(1, 10 ** k))
    xh = float_lasso(y, A, lam, cfg)
    S = threshold_support(xh, cfg.threshold)
    signs = [1 if xh[i] > 0 else -1 for i in S]
    check = "certified" if certify_guess(y, A, lam, S, signs) else "rejected"
    out = fsul(dyadic_oracle(GroundTruth.from_values(y, A, lam)))
    shown = "{" + ",".join(str(i + 1) for i in S) + "}"
    fs = "{" + ",".join(str(i + 1) for i in out.support) + "}"
    print(f"1e-{k:<3}  {xh[0]:12.3e} {xh[1]:12.3e}  {shown:>13}  {check:>12}  {fs:>5}  {out.iterations:>3}")

print()
print("The float values depend on the solver.  The exact check solves the")
print("reported support and signs in rationals and runs the KKT test on it.")
