"""Continuous-time walk dynamics on weighted graphs.

Conventions: hbar = 1 and the hopping frequency is normalized to 1, so all
times, rates and couplings are dimensionless.  The quantum Hamiltonian is the
adjacency matrix itself; detection attaches an absorbing sink node to the
target via a single collapse operator |sink><target| with rate gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graphs import Graph, GraphValidationError

DEFAULT_SUBSTEP = 1e-3


class EigendecompositionError(RuntimeError):
    """Symmetric eigendecomposition failed or is not orthonormal enough."""


class IntegrationAccuracyError(RuntimeError):
    """Integrator drifted beyond tolerance; retry with a smaller step."""


class NumericalFailureError(RuntimeError):
    """State left the physical set (negative population beyond tolerance)."""


class ThresholdConfigError(ValueError):
    """Hitting threshold is not a usable probability level."""


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sample times 0, dt, 2*dt, ..., t_max."""

    t_max: float
    dt: float

    def __post_init__(self):
        if self.dt <= 0 or self.t_max <= 0:
            raise ValueError("t_max and dt must be positive")
        if self.dt > self.t_max:
            raise ValueError(f"dt={self.dt} exceeds t_max={self.t_max}")
        ratio = self.t_max / self.dt
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(f"t_max/dt = {ratio} is not an integer")

    @property
    def sample_count(self) -> int:
        return round(self.t_max / self.dt) + 1

    def times(self) -> np.ndarray:
        return np.arange(self.sample_count) * self.dt


@dataclass(frozen=True)
class SinkSpec:
    """Absorbing detector: sink node appended after the graph, fed from target."""

    target: int
    sink: int
    rate: float = 1.0

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"decay rate must be nonnegative, got {self.rate}")
        if self.target >= self.sink:
            raise ValueError("sink must be the appended node (target < sink)")


@dataclass(frozen=True)
class ThresholdPolicy:
    """Hitting threshold 1/log(n) with a configurable logarithm base."""

    base: str = "natural"

    _LOGS = {"natural": math.log, "base2": math.log2, "base10": math.log10}

    def __post_init__(self):
        if self.base not in self._LOGS:
            raise ThresholdConfigError(f"unknown threshold base {self.base!r}")

    def value(self, n: int) -> float:
        if n < 2:
            raise ThresholdConfigError(f"threshold needs at least 2 nodes, got {n}")
        p = 1.0 / self._LOGS[self.base](n)
        if p >= 1.0:
            raise ThresholdConfigError(
                f"threshold 1/log({n}) = {p:.4f} >= 1 under base {self.base!r}; "
                "use a larger graph or a different base"
            )
        return p


@dataclass(frozen=True)
class WalkCurve:
    """Per-node probability series on a time grid.

    probabilities has one row per sample time; lindblad curves carry one extra
    trailing column for the sink population.  Rows are clamped to
    [-1e-9, 1 + 1e-9] and must each sum to 1 within 1e-6.
    """

    grid: TimeGrid
    probabilities: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in ("unitary", "lindblad", "classical"):
            raise ValueError(f"unknown curve kind {self.kind!r}")
        probs = np.asarray(self.probabilities, dtype=float)
        if probs.ndim != 2 or probs.shape[0] != self.grid.sample_count:
            raise ValueError(
                f"probabilities shape {probs.shape} does not match "
                f"{self.grid.sample_count} sample times"
            )
        row_sums = probs.sum(axis=1)
        bad = np.argmax(np.abs(row_sums - 1.0))
        if abs(row_sums[bad] - 1.0) > 1e-6:
            raise ValueError(
                f"row {bad} sums to {row_sums[bad]!r}, not 1 within 1e-6"
            )
        probs = np.clip(probs, -1e-9, 1.0 + 1e-9)
        probs.setflags(write=False)
        object.__setattr__(self, "probabilities", probs)

    @property
    def has_sink(self) -> bool:
        return self.kind == "lindblad"

    @property
    def node_count(self) -> int:
        return self.probabilities.shape[1] - (1 if self.has_sink else 0)

    def series(self, node: int) -> np.ndarray:
        return self.probabilities[:, node]

    def sink_series(self) -> np.ndarray:
        if not self.has_sink:
            raise ValueError("curve has no sink column")
        return self.probabilities[:, -1]

    def to_csv(self, destination) -> None:
        """Write `t,node_0,...,node_{n-1}[,sink]` rows, 12 significant digits, LF."""
        header = ["t"] + [f"node_{i}" for i in range(self.node_count)]
        if self.has_sink:
            header.append("sink")
        lines = [",".join(header)]
        for t, row in zip(self.grid.times(), self.probabilities):
            lines.append(",".join(f"{x:.12g}" for x in [t, *row]))
        text = "\n".join(lines) + "\n"
        if hasattr(destination, "write"):
            destination.write(text)
        else:
            with open(destination, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)


def _check_start(g: Graph, start: int) -> None:
    if not 0 <= start < g.node_count:
        raise GraphValidationError(f"start node {start} out of range")


def _symmetric_eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        vals, vecs = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigendecompositionError(f"symmetric eigendecomposition failed: {exc}") from exc
    residual = np.abs(vecs.T @ vecs - np.eye(a.shape[0])).max()
    if residual > 1e-10:
        raise EigendecompositionError(
            f"eigenvector orthonormality residual {residual:.3e} above 1e-10"
        )
    return vals, vecs


def unitary_evolve(g: Graph, start: int, grid: TimeGrid) -> WalkCurve:
    """Schroedinger evolution exp(-i*A*t) from a single-node start state.

    Uses the real-symmetric eigendecomposition of the adjacency matrix, so
    the result is grid-independent (no time stepping involved).
    """
    _check_start(g, start)
    vals, vecs = _symmetric_eigh(g.adjacency_matrix())
    coeff = vecs[start, :]  # V^T e_start
    phases = np.exp(-1j * np.outer(grid.times(), vals))
    amps = (phases * coeff) @ vecs.T
    return WalkCurve(grid, np.abs(amps) ** 2, "unitary")


def _gksl_rhs(h, rho, target, sink: int, gamma: float, batch_index=None) -> np.ndarray:
    """Right-hand side of the master equation with L = |sink><target|.

    target is a node index shared by the whole batch, or (with batch_index
    set to arange(batch)) one node index per batch member.
    """
    drho = -1j * (h @ rho - rho @ h)
    if gamma:
        if batch_index is None:
            drho[..., target, :] -= (gamma / 2.0) * rho[..., target, :]
            drho[..., :, target] -= (gamma / 2.0) * rho[..., :, target]
            drho[..., sink, sink] += gamma * rho[..., target, target]
        else:
            drho[batch_index, target, :] -= (gamma / 2.0) * rho[batch_index, target, :]
            drho[batch_index, :, target] -= (gamma / 2.0) * rho[batch_index, :, target]
            drho[batch_index, sink, sink] += gamma * rho[batch_index, target, target]
    return drho


def _lindblad_diagonals(
    a_sys: np.ndarray,
    starts,
    targets,
    gamma: float,
    grid: TimeGrid,
    substep: float,
) -> np.ndarray:
    """RK4-integrate the master equation for a batch of pure starts.

    targets is a single node index or one per start.  Returns real diagonals
    with shape (len(starts), samples, n+1); each batch member is an
    independent run, batched only for throughput.
    """
    n = a_sys.shape[0]
    m = n + 1
    sink = n
    h = np.zeros((m, m), dtype=complex)
    h[:n, :n] = a_sys

    steps_per_sample = max(1, round(grid.dt / substep))
    dt = grid.dt / steps_per_sample

    b = len(starts)
    rho = np.zeros((b, m, m), dtype=complex)
    for r, s in enumerate(starts):
        rho[r, s, s] = 1.0
    if np.ndim(targets) == 0:
        target, batch_index = int(targets), None
    else:
        target, batch_index = np.asarray(targets, dtype=int), np.arange(b)

    samples = grid.sample_count
    out = np.empty((b, samples, m))

    def record(s_idx: int) -> None:
        diag = np.einsum("rii->ri", rho).real
        out[:, s_idx, :] = diag
        traces = diag.sum(axis=1)
        drift = np.abs(traces - 1.0).max()
        if drift > 1e-8:
            raise IntegrationAccuracyError(
                f"density-matrix trace drifted by {drift:.3e} (> 1e-8); "
                f"reduce the integration step (currently {dt:g})"
            )
        min_eig = np.linalg.eigvalsh(rho).min()
        if min_eig < -1e-6:
            raise NumericalFailureError(
                f"density matrix lost positivity (min eigenvalue {min_eig:.3e})"
            )

    record(0)
    for s_idx in range(1, samples):
        for _ in range(steps_per_sample):
            k1 = _gksl_rhs(h, rho, target, sink, gamma, batch_index)
            k2 = _gksl_rhs(h, rho + (dt / 2.0) * k1, target, sink, gamma, batch_index)
            k3 = _gksl_rhs(h, rho + (dt / 2.0) * k2, target, sink, gamma, batch_index)
            k4 = _gksl_rhs(h, rho + dt * k3, target, sink, gamma, batch_index)
            rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        record(s_idx)
    return out


def lindblad_evolve(
    g: Graph,
    start: int,
    sink: SinkSpec,
    grid: TimeGrid,
    substep: float = DEFAULT_SUBSTEP,
) -> WalkCurve:
    """Sink-detected walk: master equation integrated by fixed-step RK4.

    The sink is appended as node n, coupled to the graph only through the
    collapse operator; the curve's last column is the sink population.  The
    internal RK4 step is grid.dt split into substeps no longer than
    ``substep``; trace drift beyond 1e-8 or a negative eigenvalue beyond
    -1e-6 abort the run.
    """
    _check_start(g, start)
    if not 0 <= sink.target < g.node_count:
        raise GraphValidationError(f"sink target {sink.target} out of range")
    if sink.sink != g.node_count:
        raise GraphValidationError(
            f"sink node must be appended as node {g.node_count}, got {sink.sink}"
        )
    diags = _lindblad_diagonals(g.adjacency_matrix(), [start], sink.target, sink.rate, grid, substep)
    return WalkCurve(grid, diags[0], "lindblad")


def transition_matrix(g: Graph) -> np.ndarray:
    """Column-stochastic jump matrix: T[j, i] = w_ij / total weight at i."""
    strengths = g.strengths()
    if np.any(strengths == 0):
        isolated = int(np.argmax(strengths == 0))
        raise GraphValidationError(f"node {isolated} is isolated; no transition probabilities")
    t = g.adjacency_matrix() / strengths[np.newaxis, :]
    return t


def classical_evolve(g: Graph, start: int, grid: TimeGrid) -> WalkCurve:
    """Classical continuous-time walk p(t) = exp((T - I) t) p(0).

    exp(T t) is evaluated through the symmetrized similarity transform
    D^{-1/2} W D^{-1/2} of the weight matrix, which shares T's spectrum and is
    exactly diagonalizable as a real symmetric matrix.
    """
    _check_start(g, start)
    strengths = g.strengths()
    if np.any(strengths == 0):
        raise GraphValidationError("graph has an isolated node")
    root = np.sqrt(strengths)
    sym = g.adjacency_matrix() / np.outer(root, root)
    vals, vecs = _symmetric_eigh(sym)
    # p(t) = e^{-t} D^{1/2} V e^{vals t} V^T D^{-1/2} e_start
    v0 = vecs[start, :] / root[start]
    times = grid.times()
    modes = np.exp(np.outer(times, vals - 1.0)) * v0
    probs = (modes @ vecs.T) * root
    return WalkCurve(grid, probs, "classical")


def hitting_step(
    curve: WalkCurve,
    watch: int,
    policy: ThresholdPolicy,
    n_for_threshold: int,
    threshold: float | None = None,
) -> int | None:
    """First grid index where the watched series reaches the hitting threshold.

    watch is the sink column for lindblad curves and the target node for
    classical ones.  Returns None when the series never crosses on the grid.
    ``threshold`` overrides the policy value (used by tests with forced
    levels); either way the level must be < 1.
    """
    p_th = policy.value(n_for_threshold) if threshold is None else threshold
    if p_th >= 1.0:
        raise ThresholdConfigError(f"threshold {p_th} >= 1 can never be crossed")
    series = curve.probabilities[:, watch]
    hits = np.nonzero(series >= p_th)[0]
    return int(hits[0]) if hits.size else None
