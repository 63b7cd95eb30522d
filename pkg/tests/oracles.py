"""Independent reference implementations used only by the tests.

These deliberately avoid the code paths (and libraries) they check:
the Jacobi eigensolver never calls LAPACK, the two-path counter walks
edges in pure python loops, and the alignment search enumerates all
label permutations.
"""

from __future__ import annotations

import math
from itertools import permutations

import numpy as np


def jacobi_eigenvalues(M, tol=1e-14, max_sweeps=100, want_vectors=False):
    """Cyclic Jacobi rotations on a dense symmetric matrix.

    Returns eigenvalues in descending order (and the matching orthonormal
    eigenvector columns when requested).
    """
    A = np.array(M, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    scale = max(np.abs(A).max(), 1.0)
    for _ in range(max_sweeps):
        off = math.sqrt(max(0.0, (A**2).sum() - (np.diag(A) ** 2).sum()))
        if off <= tol * n * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= tol * scale:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = 1.0 if theta == 0 else math.copysign(1.0, theta) / (
                    abs(theta) + math.sqrt(theta * theta + 1.0)
                )
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = 0.0
                A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    w = np.diag(A).copy()
    order = np.argsort(w)[::-1]
    if want_vectors:
        return w[order], V[:, order]
    return w[order]


def two_path_counts(net) -> np.ndarray:
    """Entry (i, j): number of (t, k) with edges i-k and k-j, by walking."""
    n = net.n
    out = np.zeros((n, n), dtype=np.int64)
    for a in net.layers:
        d = a.toarray()
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                out[i, j] += int(sum(d[i, k] * d[k, j] for k in range(n)))
    return out


def min_error_over_permutations(truth, est, K) -> float:
    """Exhaustive label-bijection search for the misclassification rate."""
    truth = np.asarray(truth)
    est = np.asarray(est)
    n = len(truth)
    conf = np.zeros((K, K), dtype=np.int64)
    np.add.at(conf, (truth, est), 1)
    best = 0
    for perm in permutations(range(K)):
        best = max(best, sum(conf[a, perm[a]] for a in range(K)))
    return 1.0 - best / n


def principal_angle(U1, U2) -> float:
    """Largest principal angle between two orthonormal column spans."""
    s = np.linalg.svd(U1.T @ U2, compute_uv=False)
    return float(np.arccos(np.clip(s.min(), -1.0, 1.0)))
