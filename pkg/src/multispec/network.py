"""Multilayer graph storage, degree statistics, and high-degree pruning.

A multi-relational network is a stack of T simple undirected graphs on a
shared node set.  The detection pipeline works on the diagonal-zeroed sum
of squared adjacency matrices, whose (i, j) entry counts length-two paths
between i and j aggregated over layers.  Everything here is exact integer
arithmetic, so results do not depend on layer processing order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class EdgeListError(ValueError):
    """Malformed edge-list input (carries the offending line number)."""


class DegeneratePruningError(RuntimeError):
    """Pruning removed every node; detection cannot proceed."""


@dataclass(frozen=True)
class MultiLayerNetwork:
    """T symmetric binary adjacency matrices on n shared nodes.

    Layers are CSR with int64 entries in {0, 1}, zero diagonal, and
    enforced symmetry.  Instances are immutable after construction.
    """

    n: int
    layers: tuple[sp.csr_matrix, ...]

    @property
    def T(self) -> int:
        return len(self.layers)

    def validate(self) -> None:
        for t, a in enumerate(self.layers):
            if a.shape != (self.n, self.n):
                raise ValueError(f"layer {t + 1} has shape {a.shape}, expected {(self.n, self.n)}")
            if a.diagonal().any():
                raise ValueError(f"layer {t + 1} has nonzero diagonal")
            if (a != a.T).nnz != 0:
                raise ValueError(f"layer {t + 1} is not symmetric")
            if a.nnz and not np.isin(a.data, (0, 1)).all():
                raise ValueError(f"layer {t + 1} has entries outside {{0, 1}}")


@dataclass(frozen=True)
class SumSquares:
    """Diagonal-zeroed sum over layers of squared adjacency matrices."""

    matrix: sp.csr_matrix  # symmetric, int64, zero diagonal
    n: int


@dataclass(frozen=True)
class DegreeStats:
    """Per-node degree summaries feeding the pruning rule.

    d1[i] is the maximum single-layer degree of node i, d2[i] the total
    two-path count (row sum of the zeroed sum of squares), and mean_two
    the grand mean of d2 divided by the layer count.
    """

    d1: np.ndarray
    d2: np.ndarray
    mean_two: float


@dataclass(frozen=True)
class PruneResult:
    """Nodes retained by the order-statistic thresholds.

    kept holds strictly increasing node indices i with
    d1[i] <= threshold1 and d2[i] <= threshold2, where threshold_l is the
    (n + 1 - gamma_l)-th ascending order statistic.  Ties are kept.
    """

    kept: np.ndarray
    gamma1: int
    gamma2: int
    threshold1: int
    threshold2: int

    @property
    def n_kept(self) -> int:
        return len(self.kept)


def from_edges(n: int, T: int, edges: list[tuple[int, int, int]]) -> MultiLayerNetwork:
    """Build a network from (layer, i, j) records; duplicates collapse.

    Layer indices are 1-based, node indices 0-based.
    """
    per_layer: list[set[tuple[int, int]]] = [set() for _ in range(T)]
    for t, i, j in edges:
        if not 1 <= t <= T:
            raise ValueError(f"layer index {t} out of range 1..{T}")
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"node index out of range 0..{n - 1}: ({i}, {j})")
        if i == j:
            raise ValueError(f"self-loop at node {i} rejected")
        per_layer[t - 1].add((min(i, j), max(i, j)))
    layers = []
    for pairs in per_layer:
        if pairs:
            arr = np.array(sorted(pairs), dtype=np.int64)
            rows = np.concatenate([arr[:, 0], arr[:, 1]])
            cols = np.concatenate([arr[:, 1], arr[:, 0]])
            data = np.ones(len(rows), dtype=np.int64)
            a = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
        else:
            a = sp.csr_matrix((n, n), dtype=np.int64)
        layers.append(a)
    return MultiLayerNetwork(n=n, layers=tuple(layers))


def load_multilayer(path, n: int, T: int) -> MultiLayerNetwork:
    """Read the "t i j" edge-list format (see module docs for the schema).

    One record per line, whitespace separated, '#' starts a comment,
    1-based layer and 0-based node indices.
    """
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise EdgeListError(f"{path}:{lineno}: expected 't i j', got {raw.rstrip()!r}")
            try:
                t, i, j = (int(p) for p in parts)
            except ValueError:
                raise EdgeListError(f"{path}:{lineno}: non-integer field in {raw.rstrip()!r}") from None
            if i == j:
                raise EdgeListError(f"{path}:{lineno}: self-loop at node {i}")
            if not 1 <= t <= T:
                raise EdgeListError(f"{path}:{lineno}: layer {t} out of range 1..{T}")
            if not (0 <= i < n and 0 <= j < n):
                raise EdgeListError(f"{path}:{lineno}: node index out of range 0..{n - 1}")
            edges.append((t, i, j))
    return from_edges(n, T, edges)


def save_multilayer(net: MultiLayerNetwork, path) -> None:
    """Write the edge list, one 't i j' record per undirected edge."""
    with open(path, "w", encoding="utf-8") as fh:
        for t, a in enumerate(net.layers, start=1):
            coo = sp.triu(a, k=1).tocoo()
            order = np.lexsort((coo.col, coo.row))
            for i, j in zip(coo.row[order], coo.col[order]):
                fh.write(f"{t} {i} {j}\n")


def sum_squared_adjacency(net: MultiLayerNetwork) -> SumSquares:
    """Sum of squared layer adjacencies with the diagonal zeroed.

    Entry (i, j), i != j, counts pairs (t, k) with edges i-k and k-j in
    layer t.  Integer CSR products keep the result exact and independent
    of accumulation order.
    """
    total = sp.csr_matrix((net.n, net.n), dtype=np.int64)
    for a in net.layers:
        total = total + (a @ a)
    total.setdiag(0)
    total.eliminate_zeros()
    total.sort_indices()
    return SumSquares(matrix=total, n=net.n)


def degree_stats(net: MultiLayerNetwork, sumsq: SumSquares | None = None) -> DegreeStats:
    """Max-one-neighbor and total-two-neighbor counts per node."""
    if sumsq is None:
        sumsq = sum_squared_adjacency(net)
    n = net.n
    if net.T == 0:
        z = np.zeros(n, dtype=np.int64)
        return DegreeStats(d1=z, d2=z.copy(), mean_two=0.0)
    degs = np.stack([np.asarray(a.sum(axis=1)).ravel() for a in net.layers])
    d1 = degs.max(axis=0).astype(np.int64)
    d2 = np.asarray(sumsq.matrix.sum(axis=1)).ravel().astype(np.int64)
    mean_two = float(d2.sum()) / (n * net.T)
    return DegreeStats(d1=d1, d2=d2, mean_two=mean_two)


def prune_sizes(n: int, T: int, mean_two: float) -> tuple[int, int]:
    """Gamma thresholds; clamped to [1, n] so the order statistics exist."""
    g1 = math.ceil(n * math.exp(-0.5 * math.sqrt(T) * mean_two ** 0.75))
    g2 = math.ceil(n * math.exp(-(T / 3.0) * math.sqrt(mean_two)))
    return min(max(g1, 1), n), min(max(g2, 1), n)


def prune(stats: DegreeStats, n: int, T: int) -> PruneResult:
    """Drop the nodes whose degree statistics exceed the order-statistic cuts.

    Raises DegeneratePruningError when nothing survives: downstream
    detection must fail rather than cluster an empty matrix.
    """
    gamma1, gamma2 = prune_sizes(n, T, stats.mean_two)
    thr1 = int(np.sort(stats.d1)[n - gamma1])
    thr2 = int(np.sort(stats.d2)[n - gamma2])
    kept = np.flatnonzero((stats.d1 <= thr1) & (stats.d2 <= thr2))
    if len(kept) == 0:
        raise DegeneratePruningError(
            f"pruning with thresholds ({thr1}, {thr2}) removed all {n} nodes"
        )
    return PruneResult(kept=kept, gamma1=gamma1, gamma2=gamma2, threshold1=thr1, threshold2=thr2)


def submatrix(sumsq: SumSquares, kept: np.ndarray) -> sp.csr_matrix:
    """Restrict the sum of squares to the kept nodes (order preserved)."""
    kept = np.asarray(kept)
    if len(kept) == 0:
        raise ValueError("kept index set is empty")
    if (np.diff(kept) <= 0).any():
        raise ValueError("kept indices must be strictly increasing")
    if kept[0] < 0 or kept[-1] >= sumsq.n:
        raise ValueError("kept indices out of range")
    return sumsq.matrix[kept][:, kept].tocsr()
