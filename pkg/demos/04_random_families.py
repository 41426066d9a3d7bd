"""Threshold-then-support on random single-measurement data.

With one measurement the exact minimiser only uses the largest feature,
so the float answer can be scored exactly.  This runs a few N values; the
full sweep is `certilasso sweep --family <name> --out file.csv`.

    python demos/04_random_families.py
"""
from certilasso.baseline import failure_sweep

Ns = [10, 100, 250, 500]
print("success rate at threshold 1e-3, 100 trials")
print(f"{'family':>12}  " + "  ".join(f"N={n:<4}" for n in Ns))
for fam in ("exponential", "normal", "uniform"):
    rows = failure_sweep(fam, [1e-3], 100, seed=0, params=Ns)
    print(f"{fam:>12}  " + "  ".join(f"{r[4]:6.2f}" for r in rows))
