"""Spectral fingerprints of reducibility.

A graph's walk compresses onto as many nodes as it has distinct adjacency
eigenvalues when enough symmetry is present: the reduced line's spectrum is
exactly the de-duplicated spectrum of the original.  The minimality report
compares the trajectory-group count with the distinct-eigenvalue count and
flags where the two criteria disagree.
"""

import json

import numpy as np

from qwfold import (
    build_cycle,
    build_hypercube,
    cycle_to_line,
    distinct_eigenvalues,
    equiprobable_groups,
    hypercube_to_line,
    hypercycle_to_lattice,
    minimality_report,
    spectrum,
)

for name, g, conv in (
    ("square", build_hypercube(2), hypercube_to_line(2)),
    ("cube", build_hypercube(3), hypercube_to_line(3)),
    ("8-ring", build_cycle(8), cycle_to_line(8)),
):
    s = spectrum(g)
    d = distinct_eigenvalues(s, 1e-6)
    line_s = spectrum(conv.reduced)
    print(f"{name}: eigenvalues {np.round(s.values, 4).tolist()}")
    print(f"   distinct {np.round(d, 4).tolist()}")
    print(f"   reduced line spectrum {np.round(line_s.values, 4).tolist()}")

print()
print("equiprobable groups of the cube from a corner:")
part = equiprobable_groups(build_hypercube(3), 0)
for nodes, d in zip(part.groups, part.distances):
    print(f"  d={d}: nodes {list(nodes)}")

print()
print("minimality verdicts:")
for name, g in (
    ("cube", build_hypercube(3)),
    ("8-ring", build_cycle(8)),
    ("conv-torus 4x4 lattice", hypercycle_to_lattice(2, 6).reduced),
):
    rep = minimality_report(g, 0)
    print(f"  {name}: groups {rep['group_count']}, "
          f"distinct {rep['distinct_eigenvalue_count']} -> {rep['verdict']}")

print()
print("full report for the lattice case:")
rep = minimality_report(hypercycle_to_lattice(2, 6).reduced, 0)
print(json.dumps({k: rep[k] for k in ("group_count", "distinct_eigenvalue_count", "verdict")}, indent=1))
