"""Symmetric top-K eigenpairs and spherical row normalization.

The solver takes the algebraically largest eigenvalues (not largest in
magnitude): squaring the adjacency matrices upstream already maps the
informative directions to positive eigenvalues.  Small or nearly full
problems go through a dense decomposition; larger sparse ones through
Lanczos iteration with full reorthogonalization, restarted until the
residual tolerance holds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ._rng import EIGEN_STREAM, rng_from

DENSE_CUTOFF = 256
RESIDUAL_TOL = 1e-6
GAP_TOL = 1e-10
ZERO_ROW_TOL = 1e-12


class DegenerateEmbeddingError(RuntimeError):
    """Every embedding row is numerically zero."""


class ConvergenceError(RuntimeError):
    """Iterative eigensolver failed to reach the residual tolerance."""


@dataclass(frozen=True)
class SpectralEmbedding:
    """Top-K eigenpairs: values descending, orthonormal column vectors.

    gap_ambiguous marks a (near-)tie between the K-th and (K+1)-th
    eigenvalues: the returned columns then span one of several equally
    valid invariant subspaces, which downstream clustering tolerates.
    """

    values: np.ndarray
    vectors: np.ndarray
    n_prime: int
    gap_ambiguous: bool = False


@dataclass(frozen=True)
class NormalizedEmbedding:
    """Unit-norm nonzero rows of an embedding plus their source indices."""

    rows: np.ndarray
    indices: np.ndarray


def _check_symmetric(M) -> None:
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got {M.shape}")
    if sp.issparse(M):
        diff = abs(M - M.T)
        asym = diff.data.max() if diff.nnz else 0.0
    else:
        asym = np.abs(M - M.T).max() if M.size else 0.0
    if asym > 0:
        raise ValueError(f"matrix is not symmetric (max |M - M^T| = {asym})")


def _dense(M) -> np.ndarray:
    return M.toarray().astype(float) if sp.issparse(M) else np.asarray(M, dtype=float)


def all_eigenvalues(M) -> np.ndarray:
    """Full spectrum in descending order (dense decomposition)."""
    _check_symmetric(M)
    return np.linalg.eigvalsh(_dense(M))[::-1]


def top_k_eigenpairs(
    M,
    K: int,
    seed: int = 0,
    dense_cutoff: int = DENSE_CUTOFF,
    resid_tol: float = RESIDUAL_TOL,
) -> SpectralEmbedding:
    """K algebraically largest eigenvalues with an orthonormal basis.

    Deterministic given the seed, which only feeds the Lanczos starting
    vectors.  The dense path handles n <= dense_cutoff and any request
    too close to the full spectrum for Krylov iteration to make sense.
    """
    _check_symmetric(M)
    n = M.shape[0]
    if not 1 <= K <= n:
        raise ValueError(f"need 1 <= K <= {n}, got K={K}")
    if n <= dense_cutoff or K >= n - 2:
        vals, vecs = np.linalg.eigh(_dense(M))
        top = vals[::-1][:K]
        gap = bool(K < n and abs(vals[::-1][K - 1] - vals[::-1][K]) <= GAP_TOL)
        return SpectralEmbedding(
            values=top, vectors=vecs[:, ::-1][:, :K], n_prime=n, gap_ambiguous=gap
        )
    return _lanczos_top_k(M, K, seed, resid_tol)


def _lanczos_top_k(M, K: int, seed: int, resid_tol: float) -> SpectralEmbedding:
    """Lanczos with full reorthogonalization and Rayleigh-Ritz extraction.

    The Krylov basis grows in chunks; after each chunk the projected
    problem is solved and Ritz residuals checked.  On breakdown (an
    invariant subspace was captured) iteration continues from a fresh
    random direction, so high-multiplicity spectra still converge.
    """
    A = M.tocsr().astype(float) if sp.issparse(M) else np.asarray(M, dtype=float)
    n = A.shape[0]
    rng = rng_from(seed, EIGEN_STREAM)
    want = min(K + 1, n)  # one extra pair to diagnose a degenerate gap

    def fresh_direction(basis: np.ndarray, m: int) -> np.ndarray | None:
        for _ in range(20):
            v = rng.standard_normal(n)
            for _ in range(2):
                v -= basis[:, :m] @ (basis[:, :m].T @ v)
            norm = np.linalg.norm(v)
            if norm > 1e-8:
                return v / norm
        return None

    max_dim = n
    Q = np.empty((n, 0))
    W = np.empty((n, 0))
    chunk = max(2 * want, 24)
    v = None
    while True:
        grow = min(chunk, max_dim - Q.shape[1])
        Qn = np.concatenate([Q, np.empty((n, grow))], axis=1)
        Wn = np.concatenate([W, np.empty((n, grow))], axis=1)
        m = Q.shape[1]
        for _ in range(grow):
            if v is None:
                v = fresh_direction(Qn, m)
                if v is None:
                    break
            Qn[:, m] = v
            w = A @ v
            Wn[:, m] = w
            m += 1
            # full reorthogonalization, twice for numerical safety
            r = w.copy()
            for _ in range(2):
                r -= Qn[:, :m] @ (Qn[:, :m].T @ r)
            beta = np.linalg.norm(r)
            v = r / beta if beta > 1e-10 else None
        Q, W = Qn[:, :m], Wn[:, :m]
        if m == 0:
            raise ConvergenceError("could not build a Krylov basis")
        T = Q.T @ W
        T = 0.5 * (T + T.T)
        theta, S = np.linalg.eigh(T)
        theta, S = theta[::-1], S[:, ::-1]
        k_eff = min(want, m)
        Y = Q @ S[:, :k_eff]
        R = W @ S[:, :k_eff] - Y * theta[:k_eff]
        resid = np.linalg.norm(R, axis=0)
        scale = np.maximum(1.0, np.abs(theta[:k_eff]))
        if m >= n or np.all(resid[:min(K, k_eff)] <= resid_tol * scale[:min(K, k_eff)]):
            if m < K:
                raise ConvergenceError("Krylov space exhausted below K directions")
            gap = bool(k_eff > K and abs(theta[K - 1] - theta[K]) <= GAP_TOL)
            return SpectralEmbedding(
                values=theta[:K], vectors=Y[:, :K], n_prime=n, gap_ambiguous=gap
            )
        if m >= max_dim:
            raise ConvergenceError(
                f"no convergence with Krylov dimension {m} (residuals {resid[:K]})"
            )


def normalize_rows(emb: SpectralEmbedding) -> NormalizedEmbedding:
    """Scale nonzero embedding rows to unit norm, recording their indices."""
    norms = np.linalg.norm(emb.vectors, axis=1)
    keep = np.flatnonzero(norms >= ZERO_ROW_TOL)
    if len(keep) == 0:
        raise DegenerateEmbeddingError("all embedding rows are zero")
    rows = emb.vectors[keep] / norms[keep, None]
    return NormalizedEmbedding(rows=rows, indices=keep)
