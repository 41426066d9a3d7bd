"""Write the ground-truth JSON files the other demos and the CLI examples use.

    python demos/00_make_inputs.py
"""
from fractions import Fraction
from pathlib import Path

from certilasso.baseline import example_instance
from certilasso.conditioning import ILL_POSED_KINDS, make_ill_posed
from certilasso.oracle import GroundTruth, dump_ground_truth

out = Path(__file__).parent / "data"
out.mkdir(exist_ok=True)

# the two-feature instance with features (1 - eps, 1), for eps = 10^-1 .. 10^-6
for k in range(1, 7):
    y, A, lam = example_instance(Fraction(1, 10 ** k))
    dump_ground_truth(GroundTruth.from_values(y, A, lam), out / f"example3_1_eps1e-{k}.json")

dump_ground_truth(GroundTruth.from_values(["0"], [["0", "0"]], "1/10"), out / "zero.json")

# an irrational input: sqrt(2) and sqrt(3) as features
dump_ground_truth(GroundTruth.from_values(["1"], [["sqrt:2", "sqrt:3"]], "1/10"), out / "irrational.json")

for kind in ILL_POSED_KINDS:
    make_ill_posed(kind).dump(out / f"{kind.replace('-', '_')}.json")

for p in sorted(out.iterdir()):
    print(p.relative_to(out.parent.parent))
