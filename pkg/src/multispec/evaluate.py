"""Partition quality metrics: NMI and alignment-minimized misclassification.

True community labels are only identified up to relabeling, so the error
report aligns estimated labels to the truth by maximizing the confusion
matrix trace over label bijections before counting mistakes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass(frozen=True)
class EvalReport:
    """Alignment-optimal error summary for one estimated partition.

    permutation[a] is the estimated label matched to true community a;
    per_community[a] the fraction of community a misclassified under it.
    """

    nmi: float
    overall_error: float
    per_community: np.ndarray
    permutation: np.ndarray
    confusion: np.ndarray


def _contingency(truth: np.ndarray, est: np.ndarray) -> np.ndarray:
    tu, ti = np.unique(truth, return_inverse=True)
    eu, ei = np.unique(est, return_inverse=True)
    counts = np.bincount(ti * len(eu) + ei, minlength=len(tu) * len(eu))
    return counts.reshape(len(tu), len(eu))


def _same_partition(cont: np.ndarray) -> bool:
    nz = cont > 0
    return bool((nz.sum(axis=0) == 1).all() and (nz.sum(axis=1) == 1).all())


def nmi(truth, est) -> float:
    """Normalized mutual information with geometric-mean normalization.

    Natural logarithms over the joint empirical distribution; if either
    partition has zero entropy the value is 1 when the partitions agree
    as set partitions and 0 otherwise.
    """
    truth = np.asarray(truth)
    est = np.asarray(est)
    if truth.shape != est.shape:
        raise ValueError(f"label vectors differ in length: {truth.shape} vs {est.shape}")
    n = len(truth)
    cont = _contingency(truth, est)
    pij = cont / n
    pi = pij.sum(axis=1)
    pj = pij.sum(axis=0)
    hx = -np.sum(pi[pi > 0] * np.log(pi[pi > 0]))
    hy = -np.sum(pj[pj > 0] * np.log(pj[pj > 0]))
    if hx == 0.0 or hy == 0.0:
        return 1.0 if _same_partition(cont) else 0.0
    mask = pij > 0
    info = np.sum(pij[mask] * np.log(pij[mask] / np.outer(pi, pj)[mask]))
    return float(np.clip(info / np.sqrt(hx * hy), 0.0, 1.0))


def misclassification(truth, est) -> EvalReport:
    """Error proportions under the trace-maximizing label bijection.

    The confusion matrix is padded square when the two labelings use
    different numbers of communities.
    """
    truth = np.asarray(truth, dtype=np.int64)
    est = np.asarray(est, dtype=np.int64)
    if truth.shape != est.shape:
        raise ValueError(f"label vectors differ in length: {truth.shape} vs {est.shape}")
    n = len(truth)
    K = int(max(truth.max(), est.max())) + 1
    conf = np.zeros((K, K), dtype=np.int64)
    np.add.at(conf, (truth, est), 1)
    rows, cols = linear_sum_assignment(-conf)
    perm = np.empty(K, dtype=np.int64)
    perm[rows] = cols
    correct = conf[rows, cols].sum()
    sizes = conf.sum(axis=1)
    per = np.zeros(K)
    nonempty = sizes > 0
    per[nonempty] = 1.0 - conf[np.arange(K), perm][nonempty] / sizes[nonempty]
    return EvalReport(
        nmi=nmi(truth, est),
        overall_error=float(1.0 - correct / n),
        per_community=per,
        permutation=perm,
        confusion=conf,
    )
