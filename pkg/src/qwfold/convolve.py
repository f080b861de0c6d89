"""Dynamics-preserving graph reductions.

Each reduction returns the smaller weighted graph together with the GroupMap
that witnesses which original nodes merge.  Starting the walk at the
distinguished corner (all-zeros hypercube vertex, ring node 0, torus origin),
the group-summed probabilities on the original graph coincide with the node
probabilities on the reduced one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import (
    Graph,
    GraphValidationError,
    GroupMap,
    build_cycle,
    build_weighted_line,
    cartesian_power,
    cartesian_product,
)


@dataclass(frozen=True)
class ConvolutionResult:
    """A reduced graph plus the original-node -> reduced-node witness."""

    reduced: Graph
    map: GroupMap
    method: str

    def __post_init__(self):
        if self.map.target_count != self.reduced.node_count:
            raise GraphValidationError(
                f"map targets {self.map.target_count} nodes but reduced graph has "
                f"{self.reduced.node_count}"
            )


def hypercube_to_line(dim: int) -> ConvolutionResult:
    """Collapse the dim-hypercube onto a (dim+1)-node weighted line.

    Line node h collects every hypercube vertex at Hamming weight h from the
    all-zeros corner; the coupling between line nodes h and h+1 is
    sqrt((h+1) * (dim - h)) for h = 0..dim-1.
    """
    if dim < 1:
        raise GraphValidationError(f"hypercube dimension must be >= 1, got {dim}")
    couplings = [math.sqrt((h + 1) * (dim - h)) for h in range(dim)]
    line = build_weighted_line(couplings)
    n = 1 << dim
    assignment = tuple(bin(u).count("1") for u in range(n))
    return ConvolutionResult(line, GroupMap(n, dim + 1, assignment), "hypercube_line")


def cycle_couplings(k: int) -> list[float]:
    """Couplings of the k-ring's reduced line: sqrt(2) at both ends, 1 inside."""
    if k < 4 or k % 2 != 0:
        raise GraphValidationError(f"cycle size must be an even integer >= 4, got {k}")
    kappa = k // 2 + 1
    # a kappa-node path has kappa-1 edges; ends (first and k/2-th) carry sqrt(2)
    return [math.sqrt(2.0) if i in (1, k // 2) else 1.0 for i in range(1, kappa)]


def cycle_to_line(k: int) -> ConvolutionResult:
    """Collapse the k-ring onto a (k/2 + 1)-node line by ring distance from node 0."""
    line = build_weighted_line(cycle_couplings(k))
    assignment = tuple(min(j, k - j) for j in range(k))
    return ConvolutionResult(line, GroupMap(k, k // 2 + 1, assignment), "cycle_line")


def hypercycle_to_lattice(dim: int, k: int) -> ConvolutionResult:
    """Collapse the (dim, k)-hypercycle onto the dim-fold power of its reduced line.

    Every ring factor is mapped by ring distance independently, so the torus
    coordinate tuple (j_1, ..., j_D) lands on (min(j_a, k - j_a))_a in the
    kappa x ... x kappa lattice.
    """
    if dim < 1:
        raise GraphValidationError(f"hypercycle dimension must be >= 1, got {dim}")
    base = cycle_to_line(k)
    lattice = cartesian_power(base.reduced, dim)
    kappa = base.reduced.node_count
    n = k**dim
    assignment = []
    for u in range(n):
        coords = []
        rest = u
        for _ in range(dim):
            rest, j = divmod(rest, k)
            coords.append(j)
        coords.reverse()  # row-major: first coordinate is most significant
        idx = 0
        for j in coords:
            idx = idx * kappa + min(j, k - j)
        assignment.append(idx)
    return ConvolutionResult(lattice, GroupMap(n, kappa**dim, tuple(assignment)), "product_of_lines")


def partial_hypercycle_convolution(k: int) -> ConvolutionResult:
    """Collapse only one ring factor of the 2D hypercycle, leaving a cylinder.

    The torus (j1, j2) maps to (ring distance of j1, j2) on the product of the
    reduced line with the untouched k-ring.
    """
    base = cycle_to_line(k)
    cylinder = cartesian_product(base.reduced, build_cycle(k))
    assignment = tuple(min(j1, k - j1) * k + j2 for j1 in range(k) for j2 in range(k))
    return ConvolutionResult(
        cylinder, GroupMap(k * k, cylinder.node_count, assignment), "cycle_line"
    )


def _lattice_coords(g: Graph, side: int) -> None:
    """Validate that g is a side x side grid graph in row-major node order."""
    if g.node_count != side * side:
        raise GraphValidationError(
            f"expected a {side}x{side} lattice ({side * side} nodes), got {g.node_count}"
        )
    for i, j, _ in g.edges:
        a, b = divmod(i, side)
        c, d = divmod(j, side)
        if not ((abs(a - c) == 1 and b == d) or (a == c and abs(b - d) == 1)):
            raise GraphValidationError(
                f"edge ({i},{j}) connects non-neighboring lattice sites ({a},{b})-({c},{d})"
            )


def lattice_fold(lattice: Graph, side: int, tol: float = 1e-12) -> ConvolutionResult:
    """Fold a swap-symmetric side x side lattice across its main diagonal.

    Requires the mirror symmetry (a, b) -> (b, a) to preserve edge weights.
    Sites (a, b) and (b, a) merge into the unordered pair {a, b}; the folded
    graph lives on the side*(side+1)/2 pairs a <= b.  An edge pair exchanged
    by the mirror collapses to a single edge.  Where the pair meets the
    diagonal the two incident weights combine in quadrature,
    sqrt(w_side1^2 + w_side2^2); between two off-diagonal pair-nodes the
    common weight is kept, which is exactly the coupling of the normalized
    mirror-symmetric basis states.  The fold preserves walk dynamics only for
    walks started on the diagonal (corner (0, 0) in the experiments here).
    """
    _lattice_coords(lattice, side)
    a_mat = lattice.adjacency_matrix()

    def mirror(node: int) -> int:
        r, c = divmod(node, side)
        return c * side + r

    for i, j, w in lattice.edges:
        wm = a_mat[mirror(i), mirror(j)]
        if abs(wm - w) > tol:
            raise GraphValidationError(
                f"lattice is not swap-symmetric: edge ({i},{j}) weight {w} vs mirrored {wm}"
            )

    pairs = [(a, b) for a in range(side) for b in range(a, side)]
    index = {ab: p for p, ab in enumerate(pairs)}
    orbit_size = [1 if a == b else 2 for a, b in pairs]

    def fold_node(node: int) -> int:
        r, c = divmod(node, side)
        return index[(min(r, c), max(r, c))]

    m = len(pairs)
    coupling_sum = np.zeros((m, m))
    for i, j, w in lattice.edges:
        p, q = fold_node(i), fold_node(j)
        coupling_sum[p, q] += w
        coupling_sum[q, p] += w

    edges = []
    for p in range(m):
        for q in range(p + 1, m):
            if coupling_sum[p, q] > 0:
                w = coupling_sum[p, q] / math.sqrt(orbit_size[p] * orbit_size[q])
                edges.append((p, q, w))
    folded = Graph(m, tuple(edges), labels=tuple(pairs), meta={"family": "folded_lattice", "side": side})
    assignment = tuple(fold_node(v) for v in range(lattice.node_count))
    return ConvolutionResult(folded, GroupMap(lattice.node_count, m, assignment), "lattice_fold")


def compose_maps(outer: GroupMap, inner: GroupMap) -> GroupMap:
    """Composition witness of two sequential reductions (inner applied first)."""
    if inner.target_count != outer.source_count:
        raise GraphValidationError(
            f"cannot compose: inner targets {inner.target_count} nodes, "
            f"outer expects {outer.source_count}"
        )
    assignment = tuple(outer.assignment[t] for t in inner.assignment)
    return GroupMap(inner.source_count, outer.target_count, assignment)
