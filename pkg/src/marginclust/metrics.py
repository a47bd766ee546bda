"""Clustering agreement measures: ARI, NMI, and assigned-points restrictions."""

from __future__ import annotations

import numpy as np

from .data import DataError
from .measure import UNASSIGNED, ClusterResult


def contingency(truth, pred) -> np.ndarray:
    """Co-occurrence counts between truth classes and predicted clusters."""
    truth = np.asarray(truth)
    pred = np.asarray(pred)
    if truth.shape != pred.shape or truth.ndim != 1:
        raise ValueError(f"label shapes differ: {truth.shape} vs {pred.shape}")
    _, ti = np.unique(truth, return_inverse=True)
    _, pi = np.unique(pred, return_inverse=True)
    table = np.zeros((ti.max() + 1, pi.max() + 1), dtype=np.int64)
    np.add.at(table, (ti, pi), 1)
    return table


def _is_identical_partition(table: np.ndarray) -> bool:
    return bool(np.all((table > 0).sum(axis=0) <= 1) and np.all((table > 0).sum(axis=1) <= 1))


def ari(truth, pred) -> float:
    """Hubert-Arabie adjusted Rand index in [-1, 1].

    When the expected-index correction degenerates (both partitions trivial),
    returns 1 for identical partitions and 0 otherwise.
    """
    truth = np.asarray(truth)
    pred = np.asarray(pred)
    if truth.size < 2:
        raise ValueError(f"need at least 2 labels, got {truth.size}")
    table = contingency(truth, pred)
    n = truth.size

    def comb2(x):
        return x * (x - 1) / 2.0

    sum_cells = comb2(table.astype(np.float64)).sum()
    sum_rows = comb2(table.sum(axis=1).astype(np.float64)).sum()
    sum_cols = comb2(table.sum(axis=0).astype(np.float64)).sum()
    total = comb2(float(n))
    expected = sum_rows * sum_cols / total
    max_index = (sum_rows + sum_cols) / 2.0
    denom = max_index - expected
    if denom == 0.0:
        return 1.0 if _is_identical_partition(table) else 0.0
    return float((sum_cells - expected) / denom)


def nmi(truth, pred, average: str = "arithmetic") -> float:
    """Mutual information normalized by the mean of the two label entropies.

    ``average`` picks arithmetic (default) or geometric mean normalization.
    Two zero entropies score 1; exactly one zero entropy scores 0.
    """
    if average not in ("arithmetic", "geometric"):
        raise ValueError(f"unknown average {average!r}")
    truth = np.asarray(truth)
    pred = np.asarray(pred)
    if truth.size < 1:
        raise ValueError("empty input")
    table = contingency(truth, pred).astype(np.float64)
    n = table.sum()
    pu = table.sum(axis=1) / n
    pv = table.sum(axis=0) / n
    hu = float(-np.sum(pu[pu > 0] * np.log(pu[pu > 0])))
    hv = float(-np.sum(pv[pv > 0] * np.log(pv[pv > 0])))
    if hu == 0.0 and hv == 0.0:
        return 1.0
    if hu == 0.0 or hv == 0.0:
        return 0.0
    pij = table / n
    outer = pu[:, None] * pv[None, :]
    mask = pij > 0
    mi = float(np.sum(pij[mask] * (np.log(pij[mask]) - np.log(outer[mask]))))
    norm = 0.5 * (hu + hv) if average == "arithmetic" else float(np.sqrt(hu * hv))
    return mi / norm


def restrict_assigned(truth, result: ClusterResult | np.ndarray,
                      mode: str = "assigned_only") -> tuple[np.ndarray, np.ndarray]:
    """Pair (truth', pred') under the chosen treatment of unassigned points.

    "assigned_only" keeps only points with a cluster id (Tables-4/5 style);
    "singletons" keeps everything, giving each unassigned point a fresh
    one-member cluster id; "noise_cluster" keeps everything with all
    unassigned points sharing one extra cluster id (the convention standard
    toolkits apply to noise labels).
    """
    pred = result.assignment if isinstance(result, ClusterResult) else np.asarray(result)
    truth = np.asarray(truth)
    if truth.shape != pred.shape:
        raise ValueError(f"label shapes differ: {truth.shape} vs {pred.shape}")
    if mode == "assigned_only":
        mask = pred != UNASSIGNED
        if not mask.any():
            raise DataError("empty restriction: no assigned points")
        return truth[mask].copy(), pred[mask].copy()
    if mode in ("singletons", "noise_cluster"):
        out = pred.copy()
        unassigned = np.flatnonzero(pred == UNASSIGNED)
        fresh = int(pred.max()) + 1 if pred.size else 0
        if mode == "singletons":
            out[unassigned] = fresh + np.arange(unassigned.size)
        else:
            out[unassigned] = fresh
        return truth.copy(), out
    raise ValueError(f"unknown mode {mode!r}")
