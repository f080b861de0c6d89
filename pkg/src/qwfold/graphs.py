"""Weighted undirected graphs for continuous-time walk experiments.

Graphs are stored as canonical edge lists (i < j, sorted) with strictly
positive weights, no self-loops and no parallel edges, so the induced
adjacency matrix is always real symmetric with zero diagonal.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

# Constructors refuse graphs larger than this: everything downstream works on
# dense matrices and should stay desk-scale.
MAX_NODES = 4096

# Hypercubes get their own documented limit (2^20 nodes is already absurd for
# dense dynamics).
MAX_HYPERCUBE_DIM = 19


class GraphValidationError(ValueError):
    """A graph document or constructor argument violates an invariant."""


def _check_scale(n: int) -> None:
    if n > MAX_NODES:
        raise GraphValidationError(
            f"graph would have {n} nodes, above the {MAX_NODES}-node dense-matrix limit"
        )


@dataclass(frozen=True)
class Graph:
    """Weighted undirected graph with a canonical edge list.

    node_count : number of nodes, indexed 0..node_count-1
    edges      : tuple of (i, j, w) with i < j, sorted by (i, j), w > 0
    labels     : optional coordinate tuple per node (bitstring, torus coords, ...)
    meta       : free-form provenance (family name, parameters); ignored by ==
    """

    node_count: int
    edges: tuple[tuple[int, int, float], ...]
    labels: tuple[tuple[int, ...], ...] | None = None
    meta: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.node_count < 1:
            raise GraphValidationError("node_count must be positive")
        canonical = []
        seen = set()
        for i, j, w in self.edges:
            if not (0 <= i < self.node_count and 0 <= j < self.node_count):
                raise GraphValidationError(f"edge ({i},{j}) out of range for {self.node_count} nodes")
            if i == j:
                raise GraphValidationError(f"self-loop on node {i}")
            if w <= 0:
                raise GraphValidationError(f"edge ({i},{j}) has non-positive weight {w}")
            a, b = (i, j) if i < j else (j, i)
            if (a, b) in seen:
                raise GraphValidationError(f"duplicate edge for pair ({a},{b})")
            seen.add((a, b))
            canonical.append((a, b, float(w)))
        canonical.sort(key=lambda e: (e[0], e[1]))
        object.__setattr__(self, "edges", tuple(canonical))
        if self.labels is not None:
            if len(self.labels) != self.node_count:
                raise GraphValidationError("labels length must equal node_count")
            object.__setattr__(self, "labels", tuple(tuple(int(c) for c in lab) for lab in self.labels))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def adjacency_matrix(self) -> np.ndarray:
        """Dense symmetric adjacency matrix A with A[i, j] = A[j, i] = w."""
        a = np.zeros((self.node_count, self.node_count))
        for i, j, w in self.edges:
            a[i, j] = w
            a[j, i] = w
        return a

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for i, j, _ in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def degrees(self) -> np.ndarray:
        """Unweighted degree of every node."""
        d = np.zeros(self.node_count, dtype=int)
        for i, j, _ in self.edges:
            d[i] += 1
            d[j] += 1
        return d

    def strengths(self) -> np.ndarray:
        """Weighted degree (total incident weight) of every node."""
        s = np.zeros(self.node_count)
        for i, j, w in self.edges:
            s[i] += w
            s[j] += w
        return s

    def is_connected(self) -> bool:
        return all(d is not None for d in bfs_distances(self, 0))


@dataclass(frozen=True)
class GroupMap:
    """Surjection from original node indices onto reduced node indices.

    The witness of a graph reduction: assignment[v] is the reduced node that
    original node v merges into.
    """

    source_count: int
    target_count: int
    assignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(a) for a in self.assignment))
        if len(self.assignment) != self.source_count:
            raise GraphValidationError(
                f"assignment has {len(self.assignment)} entries for {self.source_count} source nodes"
            )
        hit = set()
        for v, t in enumerate(self.assignment):
            if not 0 <= t < self.target_count:
                raise GraphValidationError(f"node {v} mapped to out-of-range target {t}")
            hit.add(t)
        if len(hit) != self.target_count:
            missing = sorted(set(range(self.target_count)) - hit)
            raise GraphValidationError(f"map not surjective, unhit targets {missing}")

    def preimages(self) -> list[list[int]]:
        pre: list[list[int]] = [[] for _ in range(self.target_count)]
        for v, t in enumerate(self.assignment):
            pre[t].append(v)
        return pre

    @staticmethod
    def identity(n: int) -> "GroupMap":
        return GroupMap(n, n, tuple(range(n)))


# ---------------------------------------------------------------------------
# constructors


def build_cycle(k: int) -> Graph:
    """k-node ring with unit weights; k must be even and at least 4."""
    if k < 4 or k % 2 != 0:
        raise GraphValidationError(f"cycle size must be an even integer >= 4, got {k}")
    _check_scale(k)
    edges = [(j, (j + 1) % k, 1.0) for j in range(k)]
    labels = tuple((j,) for j in range(k))
    return Graph(k, tuple(edges), labels, meta={"family": "cycle", "k": k})


def build_hypercube(dim: int) -> Graph:
    """Binary hypercube: 2^dim nodes labelled by bitstrings, unit weights.

    Node index equals the integer value of its bitstring; two nodes are
    adjacent iff their labels differ in exactly one bit.
    """
    if dim < 1:
        raise GraphValidationError(f"hypercube dimension must be >= 1, got {dim}")
    if dim > MAX_HYPERCUBE_DIM:
        raise GraphValidationError(
            f"hypercube dimension {dim} above the documented limit {MAX_HYPERCUBE_DIM}"
        )
    n = 1 << dim
    edges = []
    for u in range(n):
        for b in range(dim):
            v = u ^ (1 << b)
            if u < v:
                edges.append((u, v, 1.0))
    labels = tuple(tuple((u >> (dim - 1 - p)) & 1 for p in range(dim)) for u in range(n))
    return Graph(n, tuple(edges), labels, meta={"family": "hypercube", "dim": dim})


def build_weighted_line(couplings) -> Graph:
    """Path graph on len(couplings)+1 nodes; edge (i, i+1) carries couplings[i]."""
    couplings = [float(c) for c in couplings]
    if not couplings:
        raise GraphValidationError("couplings list must be non-empty")
    if any(c <= 0 for c in couplings):
        raise GraphValidationError("all couplings must be strictly positive")
    n = len(couplings) + 1
    _check_scale(n)
    edges = tuple((i, i + 1, couplings[i]) for i in range(n - 1))
    labels = tuple((i,) for i in range(n))
    return Graph(n, edges, labels, meta={"family": "weighted_line", "couplings": couplings})


def cartesian_product(g: Graph, h: Graph) -> Graph:
    """Cartesian (box) product: A(G x H) = A(G) (x) I + I (x) A(H).

    Node (u, v) gets index u * |H| + v; it couples to (u', v) with weight
    A_G(u, u') and to (u, v') with weight A_H(v, v').  Labels of the factors
    are concatenated, so iterated products carry full coordinate tuples.
    """
    n = g.node_count * h.node_count
    _check_scale(n)
    edges = []
    for u1, u2, w in g.edges:
        for v in range(h.node_count):
            edges.append((u1 * h.node_count + v, u2 * h.node_count + v, w))
    for v1, v2, w in h.edges:
        for u in range(g.node_count):
            edges.append((u * h.node_count + v1, u * h.node_count + v2, w))
    glab = g.labels if g.labels is not None else tuple((u,) for u in range(g.node_count))
    hlab = h.labels if h.labels is not None else tuple((v,) for v in range(h.node_count))
    labels = tuple(glab[u] + hlab[v] for u in range(g.node_count) for v in range(h.node_count))
    return Graph(n, tuple(edges), labels)


def cartesian_power(g: Graph, times: int) -> Graph:
    if times < 1:
        raise GraphValidationError("cartesian_power needs at least one factor")
    out = g
    for _ in range(times - 1):
        out = cartesian_product(out, g)
    return out


def build_hypercycle(dim: int, k: int) -> Graph:
    """dim-fold Cartesian power of the k-ring: k^dim nodes, 2*dim-regular.

    dim = 2 is the torus.  Coordinate tuples are encoded row-major, so node
    (j_1, ..., j_D) has index ((j_1 * k + j_2) * k + ...) + j_D.
    """
    if dim < 1:
        raise GraphValidationError(f"hypercycle dimension must be >= 1, got {dim}")
    if k < 4 or k % 2 != 0:
        raise GraphValidationError(f"hypercycle needs even k >= 4, got {k}")
    _check_scale(k**dim)
    g = cartesian_power(build_cycle(k), dim)
    return Graph(g.node_count, g.edges, g.labels, meta={"family": "hypercycle", "dim": dim, "k": k})


def build_weighted_lattice(row_couplings, col_couplings) -> Graph:
    """Cartesian product of two weighted lines (a 2D lattice)."""
    return cartesian_product(build_weighted_line(row_couplings), build_weighted_line(col_couplings))


@dataclass(frozen=True)
class GraphFamilySpec:
    """Parametric description of a graph family, buildable on demand."""

    family: str
    dim: int | None = None
    k: int | None = None
    couplings: tuple[float, ...] | None = None
    row_couplings: tuple[float, ...] | None = None
    col_couplings: tuple[float, ...] | None = None

    def build(self) -> Graph:
        if self.family == "hypercube":
            if self.dim is None:
                raise GraphValidationError("hypercube needs dim")
            return build_hypercube(self.dim)
        if self.family == "cycle":
            if self.k is None:
                raise GraphValidationError("cycle needs k")
            return build_cycle(self.k)
        if self.family == "hypercycle":
            if self.dim is None or self.k is None:
                raise GraphValidationError("hypercycle needs dim and k")
            return build_hypercycle(self.dim, self.k)
        if self.family == "weighted_line":
            if not self.couplings:
                raise GraphValidationError("weighted_line needs couplings")
            return build_weighted_line(self.couplings)
        if self.family == "weighted_lattice":
            if not self.row_couplings or not self.col_couplings:
                raise GraphValidationError("weighted_lattice needs row and column couplings")
            return build_weighted_lattice(self.row_couplings, self.col_couplings)
        raise GraphValidationError(f"unknown graph family {self.family!r}")


# ---------------------------------------------------------------------------
# queries


def bfs_distances(g: Graph, source: int) -> list[int | None]:
    """Unweighted shortest-path distance from source to every node (None if unreachable)."""
    if not 0 <= source < g.node_count:
        raise GraphValidationError(f"node {source} out of range")
    adj = g.neighbors()
    dist: list[int | None] = [None] * g.node_count
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if dist[v] is None:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def graph_distance(g: Graph, u: int, v: int) -> int | None:
    """Shortest-path edge count between u and v, ignoring weights.

    Returns None for a disconnected pair (an explicit "unreachable" answer
    rather than a sentinel number).
    """
    if not 0 <= v < g.node_count:
        raise GraphValidationError(f"node {v} out of range")
    return bfs_distances(g, u)[v]


def distance_matrix(g: Graph) -> np.ndarray:
    """All-pairs unweighted distances; unreachable pairs become -1."""
    out = np.full((g.node_count, g.node_count), -1, dtype=int)
    for u in range(g.node_count):
        for v, d in enumerate(bfs_distances(g, u)):
            if d is not None:
                out[u, v] = d
    return out


# ---------------------------------------------------------------------------
# serialization

# Graph document: {"nodes": n, "edges": [[i, j, w], ...] (i < j, sorted),
#                  "labels": [[...], ...]?, "meta": {...}?}


def graph_to_document(g: Graph) -> dict:
    doc = {
        "nodes": g.node_count,
        "edges": [[i, j, w] for i, j, w in g.edges],
    }
    if g.labels is not None:
        doc["labels"] = [list(lab) for lab in g.labels]
    if g.meta is not None:
        doc["meta"] = g.meta
    return doc


def graph_from_document(doc) -> Graph:
    if not isinstance(doc, dict):
        raise GraphValidationError("graph document must be a JSON object")
    for key in ("nodes", "edges"):
        if key not in doc:
            raise GraphValidationError(f"graph document missing required key {key!r}")
    nodes = doc["nodes"]
    if not isinstance(nodes, int) or nodes < 1:
        raise GraphValidationError(f"'nodes' must be a positive integer, got {nodes!r}")
    edges = []
    for pos, entry in enumerate(doc["edges"]):
        if not (isinstance(entry, (list, tuple)) and len(entry) == 3):
            raise GraphValidationError(f"edge #{pos} is not an [i, j, w] triple: {entry!r}")
        i, j, w = entry
        if not (isinstance(i, int) and isinstance(j, int)):
            raise GraphValidationError(f"edge #{pos} endpoints must be integers: {entry!r}")
        if not isinstance(w, (int, float)):
            raise GraphValidationError(f"edge #{pos} weight must be a number: {entry!r}")
        edges.append((i, j, float(w)))
    labels = doc.get("labels")
    if labels is not None:
        labels = tuple(tuple(lab) for lab in labels)
    meta = doc.get("meta")
    if meta is not None and not isinstance(meta, dict):
        raise GraphValidationError("'meta' must be an object")
    return Graph(nodes, tuple(edges), labels, meta)


def save_graph(g: Graph, destination) -> None:
    """Write the graph document as UTF-8 JSON to a path or file object."""
    doc = graph_to_document(g)
    text = json.dumps(doc, indent=1)
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8") as fh:
            fh.write(text)


def load_graph(source) -> Graph:
    """Read a graph document from a path or file object; validates invariants."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphValidationError(f"malformed graph document: {exc}") from exc
    return graph_from_document(doc)


def save_group_map(m: GroupMap, destination) -> None:
    """Write a map document: {"assignment": [...]} of length source_count."""
    text = json.dumps({"assignment": list(m.assignment)})
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8") as fh:
            fh.write(text)


def load_group_map(source) -> GroupMap:
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphValidationError(f"malformed map document: {exc}") from exc
    if not isinstance(doc, dict) or "assignment" not in doc:
        raise GraphValidationError("map document must be an object with an 'assignment' array")
    assignment = doc["assignment"]
    if not assignment:
        raise GraphValidationError("'assignment' must be a non-empty array")
    target = max(int(a) for a in assignment) + 1
    return GroupMap(len(assignment), target, tuple(assignment))
