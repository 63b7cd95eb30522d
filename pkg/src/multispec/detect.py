"""End-to-end detection pipelines, community-count estimation, baselines,
and the theoretical consistency diagnostics.

The main pipelines square and sum the layer adjacencies, prune
high-degree nodes, embed the kept nodes with the top-K eigenvectors, and
cluster; the spherical variant clusters unit-normalized nonzero rows
instead, which is the robust choice under degree heterogeneity.  Pruned
or zero-row nodes are assigned to the first community.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .eigen import (
    DegenerateEmbeddingError,
    SpectralEmbedding,
    all_eigenvalues,
    normalize_rows,
    top_k_eigenpairs,
)
from .kmeans import kmeans_approx
from .models import ModelParams
from .network import (
    DegeneratePruningError,
    MultiLayerNetwork,
    PruneResult,
    SumSquares,
    degree_stats,
    prune,
    prune_sizes,
    submatrix,
    sum_squared_adjacency,
)

METHOD_ALG1 = "Alg1"
METHOD_ALG2 = "Alg2"
METHOD_ALG3 = "Alg3"
METHOD_BASELINE_SUM = "BaselineSum"
METHOD_BASELINE_SPECTRAL_SUM = "BaselineSpectralSum"
DETECTION_METHODS = (METHOD_ALG1, METHOD_ALG2, METHOD_BASELINE_SUM, METHOD_BASELINE_SPECTRAL_SUM)


class DetectionError(RuntimeError):
    """Detection or estimation cannot produce a usable result."""


@dataclass(frozen=True)
class DetectionResult:
    """Estimated membership with full provenance of the run.

    labels has one community index per node (pruned and zero-row nodes
    carry 0, the first community).  prune_info is None for methods that
    skip the two-statistic pruning step.
    """

    labels: np.ndarray
    K: int
    method: str
    kept: np.ndarray
    eigenvalues: np.ndarray
    kmeans_cost: float
    prune_info: PruneResult | None = None
    ambiguous: bool = False
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class TheoryDiagnostics:
    """Quantities entering the recovery conditions and error bounds.

    d is the maximum expected degree, lam the average over layers of the
    smallest eigenvalue of the squared normalized connectivity matrix.
    The degree-corrected fields are populated only when degree
    parameters are supplied.
    """

    d: float
    lam: float
    n_min: int
    n_max: int
    bound: float
    prob_floor: float
    condition_ok: bool
    n_tilde: np.ndarray | None = None
    tau: np.ndarray | None = None
    psi_min: float | None = None
    n_tilde_min: float | None = None
    n_tilde_max: float | None = None
    dc_count_bound: float | None = None
    dc_prob_floor: float | None = None
    dc_condition_ok: bool | None = None


def _cluster_embedding(
    emb: SpectralEmbedding, K: int, eps: float, seed: int, spherical: bool
) -> tuple[np.ndarray, float]:
    """Steps 8 (and 2-4 of the spherical variant): labels for kept nodes."""
    if spherical:
        nz = normalize_rows(emb)  # may raise DegenerateEmbeddingError
        if len(nz.indices) < K:
            raise DetectionError(
                f"only {len(nz.indices)} nonzero embedding rows, fewer than K={K}"
            )
        km = kmeans_approx(nz.rows, K, eps, seed)
        local = np.zeros(emb.n_prime, dtype=np.int64)
        local[nz.indices] = km.assignment
    else:
        km = kmeans_approx(emb.vectors, K, eps, seed)
        local = km.assignment
    return local, km.cost


def detect_from_sum_squares(
    matrix,
    K: int,
    eps: float = 0.5,
    seed: int = 0,
    kept: np.ndarray | None = None,
    spherical: bool = False,
    n_total: int | None = None,
    method: str = METHOD_ALG1,
    prune_info: PruneResult | None = None,
) -> DetectionResult:
    """Steps 6-9 on a precomputed (empirical or population) matrix.

    This is the shared tail of both pipelines and doubles as the entry
    point for population-oracle runs on an expected sum of squares.
    """
    n_total = matrix.shape[0] if n_total is None else n_total
    kept = np.arange(matrix.shape[0]) if kept is None else np.asarray(kept)
    if len(kept) < K:
        raise DetectionError(f"only {len(kept)} nodes kept, fewer than K={K}")
    if len(kept) == matrix.shape[0]:
        sub = matrix
    elif sp.issparse(matrix):
        sub = matrix[kept][:, kept]
    else:
        sub = matrix[np.ix_(kept, kept)]
    emb = top_k_eigenpairs(sub, K, seed=seed)
    try:
        local, cost = _cluster_embedding(emb, K, eps, seed, spherical)
    except DegenerateEmbeddingError as exc:
        raise DetectionError(str(exc)) from exc
    labels = np.zeros(n_total, dtype=np.int64)
    labels[kept] = local
    return DetectionResult(
        labels=labels,
        K=K,
        method=method,
        kept=kept,
        eigenvalues=emb.values,
        kmeans_cost=cost,
        prune_info=prune_info,
        ambiguous=emb.gap_ambiguous,
    )


def _pruned_sum_squares(net: MultiLayerNetwork) -> tuple[SumSquares, PruneResult, float]:
    ss = sum_squared_adjacency(net)
    stats = degree_stats(net, ss)
    try:
        pr = prune(stats, net.n, net.T)
    except DegeneratePruningError as exc:
        raise DetectionError(str(exc)) from exc
    return ss, pr, stats.mean_two


def algorithm1(net: MultiLayerNetwork, K: int, eps: float = 0.5, seed: int = 0) -> DetectionResult:
    """Spectral clustering of the pruned sum of squared adjacencies."""
    ss, pr, _ = _pruned_sum_squares(net)
    return detect_from_sum_squares(
        ss.matrix, K, eps, seed, kept=pr.kept, n_total=net.n, method=METHOD_ALG1, prune_info=pr
    )


def algorithm2(net: MultiLayerNetwork, K: int, eps: float = 0.5, seed: int = 0) -> DetectionResult:
    """Spherical variant: clusters unit-normalized nonzero embedding rows."""
    ss, pr, _ = _pruned_sum_squares(net)
    return detect_from_sum_squares(
        ss.matrix,
        K,
        eps,
        seed,
        kept=pr.kept,
        n_total=net.n,
        method=METHOD_ALG2,
        prune_info=pr,
        spherical=True,
    )


def community_count_threshold(T: int, mean_two: float) -> float:
    """Eigenvalue cutoff separating signal from noise in the pruned matrix."""
    return 0.25 * (T * mean_two) * (T * math.sqrt(mean_two)) ** (-1.0 / 8.0)


def algorithm3(net: MultiLayerNetwork) -> int:
    """Estimate the community count from the pruned full spectrum.

    Counts eigenvalues strictly above the threshold; an empty network
    yields 0.
    """
    ss, pr, mean_two = _pruned_sum_squares(net)
    if mean_two == 0.0:
        return 0
    sub = submatrix(ss, pr.kept)
    vals = all_eigenvalues(sub)
    tau = community_count_threshold(net.T, mean_two)
    return int((vals > tau).sum())


def baseline_sum_spectral(
    net: MultiLayerNetwork, K: int, eps: float = 0.5, seed: int = 0
) -> DetectionResult:
    """Spectral clustering of the plain layer sum with degree truncation.

    Removes nodes whose max single-layer degree exceeds the same
    order-statistic cut the main pipeline uses, then clusters the top-K
    eigenvectors of the truncated sum.
    """
    stats = degree_stats(net)
    gamma1, _ = prune_sizes(net.n, net.T, stats.mean_two)
    thr1 = int(np.sort(stats.d1)[net.n - gamma1])
    kept = np.flatnonzero(stats.d1 <= thr1)
    if len(kept) < K:
        raise DetectionError(f"only {len(kept)} nodes kept, fewer than K={K}")
    total = sp.csr_matrix((net.n, net.n), dtype=np.int64)
    for a in net.layers:
        total = total + a
    return detect_from_sum_squares(
        total, K, eps, seed, kept=kept, n_total=net.n, method=METHOD_BASELINE_SUM
    )


def baseline_spectral_sum(
    net: MultiLayerNetwork, K: int, eps: float = 0.5, seed: int = 0
) -> DetectionResult:
    """Cluster the rows of the summed per-layer top-K eigenvector matrices.

    Column signs are fixed so the first nonzero entry is positive, which
    makes the sum well defined.  Layers with fewer than K nonzero
    eigenvalues contribute zero-filled columns and a recorded warning.
    """
    n = net.n
    if K > n:
        raise DetectionError(f"K={K} exceeds node count {n}")
    usum = np.zeros((n, K))
    warnings: list[str] = []
    for t, a in enumerate(net.layers, start=1):
        if a.nnz == 0:
            warnings.append(f"layer {t}: fewer than {K} nonzero eigenvalues, zero-filled")
            continue
        emb = top_k_eigenpairs(a, K, seed=seed)
        u = emb.vectors.copy()
        scale = np.abs(emb.values).max()
        dead = np.abs(emb.values) <= 1e-12 * max(scale, 1.0)
        if dead.any():
            u[:, dead] = 0.0
            warnings.append(f"layer {t}: fewer than {K} nonzero eigenvalues, zero-filled")
        for k in range(K):
            col = u[:, k]
            nz = np.flatnonzero(np.abs(col) > 1e-12)
            if len(nz) and col[nz[0]] < 0:
                u[:, k] = -col
        usum += u
    km = kmeans_approx(usum, K, eps, seed)
    return DetectionResult(
        labels=km.assignment.astype(np.int64),
        K=K,
        method=METHOD_BASELINE_SPECTRAL_SUM,
        kept=np.arange(n),
        eigenvalues=np.empty(0),
        kmeans_cost=km.cost,
        warnings=tuple(warnings),
    )


def theory_diagnostics(
    params: ModelParams,
    labels: np.ndarray,
    Delta: float = 8.5,
    C: float = 1.0,
    C_prime: float = 1.0,
) -> TheoryDiagnostics:
    """Evaluate the consistency condition and misclassification bounds.

    The constants are user inputs: the theory never instantiates them,
    so the bound is a diagnostic curve rather than a certified number.
    """
    if Delta <= 8:
        raise ValueError("Delta must exceed 8")
    params.validate()
    labels = np.asarray(labels, dtype=np.int64)
    n = len(labels)
    K = params.K
    T = params.schedule.T
    B = params.schedule.mats
    d = float(n * B.max())
    if d == 0:
        raise ValueError("all-zero schedule: the normalized eigenvalue average is undefined")
    lam = 0.0
    for t in range(T):
        w = np.linalg.eigvalsh((n / d) * B[t])
        lam += float((w**2).min())
    lam /= T
    sizes = np.bincount(labels, minlength=K)
    n_min, n_max = int(sizes.min()), int(sizes.max())

    lhs = lam * (n_min / n) ** 2
    rhs = max(7.0 / n, C * Delta * math.sqrt(K) / (T * d) ** 0.25)
    bound = math.inf if lhs == 0 else (C * Delta * math.sqrt(K) / ((T * d) ** 0.25 * lhs)) ** 2
    prob_floor = 1.0 - (C_prime + 2 * n * K) / (n * (T * d) ** 0.75) - 2.0 * n ** (5 - Delta**2 / 12)

    diag = dict(
        d=d,
        lam=lam,
        n_min=n_min,
        n_max=n_max,
        bound=bound,
        prob_floor=prob_floor,
        condition_ok=bool(lhs > rhs),
    )
    if params.psi is not None:
        psi = np.asarray(params.psi, dtype=float)
        n_tilde = np.array([float((psi[labels == a] ** 2).sum()) for a in range(K)])
        tau = np.array(
            [
                float((psi[labels == a] ** 2).sum() * (psi[labels == a] ** -2.0).sum())
                for a in range(K)
            ]
        )
        psi_min = float(psi.min())
        nt_min, nt_max = float(n_tilde.min()), float(n_tilde.max())
        denom = (T * d) ** 0.25 * lam * (nt_min / n) ** 2
        count_bound = (
            C * (K * nt_max) ** 3 / ((psi_min * lam) ** 2 * nt_min**4)
            + (n + C * Delta * math.sqrt(K * tau.sum())) / denom
        )
        dc_prob = 1.0 - (C_prime / n + 2 * K) * (T * d) ** -0.75 - 2.0 * n ** (5 - Delta**2 / 12)
        dc_ok = bool(
            lam * (nt_min / n) ** 2 > 7.0 / n
            and n_min
            > C * (K * nt_max) ** 3 / (lam**2 * psi_min**2 * nt_min**4)
            + C * Delta * math.sqrt(K * tau.sum()) / denom
        )
        diag.update(
            n_tilde=n_tilde,
            tau=tau,
            psi_min=psi_min,
            n_tilde_min=nt_min,
            n_tilde_max=nt_max,
            dc_count_bound=count_bound,
            dc_prob_floor=dc_prob,
            dc_condition_ok=dc_ok,
        )
    return TheoryDiagnostics(**diag)
