"""Race a classical walker against a sink-detected quantum walker on random
node pairs of the reduced torus lattice.

Both walkers are declared to have arrived when their watched probability
(the target occupation for the classical walk, the sink population for the
quantum one) reaches 1/log(n).  The sampler is a seeded splitmix64 stream,
so re-running with the same seed reproduces the CSV byte for byte.
"""

import io
import math

from qwfold import ExperimentConfig, GraphFamilySpec, TimeGrid, run_hitting_races
from qwfold.harness import races_to_csv

R2 = math.sqrt(2)

config = ExperimentConfig(
    source=GraphFamilySpec(
        "weighted_lattice", row_couplings=(R2, 1.0, R2), col_couplings=(R2, 1.0, R2)
    ),
    seed=42,
    pair_count=40,
    grid=TimeGrid(20.0, 0.1),
    gamma=1.0,
)
records, summary = run_hitting_races(config)

print(f"threshold 1/ln(16) = {summary['threshold']:.4f}")
print("wins:", summary["wins"])
print("by distance:")
for d, bucket in summary["by_distance"].items():
    print(f"  d={d}: {bucket}")

buf = io.StringIO()
races_to_csv(records[:10], buf)
print("\nfirst ten records:")
print(buf.getvalue())

never = all(r.classical_steps is None for r in records)
print("classical walker crossed the threshold at least once:", not never)
print("(its occupation peaks near 0.21 on this lattice, below the 0.36 level,")
print(" so detection-by-threshold races are decided by the quantum walker here)")
