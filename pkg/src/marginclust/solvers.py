"""Binary split sub-solvers: Lloyd K-means and a soft-margin linear SVM.

Both are deterministic functions of (input, seed). The SVM solves the
standard L1 soft-margin dual by coordinate ascent over maximal-violating
pairs of box-constrained multipliers, recovering the bias from the KKT
conditions, which keeps the canonical form exact (functional margin 1 at
the margin boundary).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DegenerateSplitError(ValueError):
    """The trained separator is not a usable hyperplane."""


@dataclass
class KMeansModel:
    centroids: np.ndarray
    labels: np.ndarray
    inertia: float
    inertia_history: list[float] = field(default_factory=list)
    n_iter: int = 0


@dataclass(frozen=True)
class Hyperplane:
    """Decision surface w.x + b = 0 with its cached norm and training set."""

    w: np.ndarray
    b: float
    norm_w: float
    affiliated: frozenset[int] = frozenset()
    id: int = -1
    parent_cell: int = -1

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        object.__setattr__(self, "w", w)
        norm = float(np.linalg.norm(w))
        if norm <= 0.0:
            raise DegenerateSplitError("degenerate split")
        if abs(norm - self.norm_w) > 1e-12 * max(1.0, norm):
            raise ValueError(f"cached norm_w {self.norm_w} != |w| {norm}")

    def signed_distance(self, x: np.ndarray) -> np.ndarray:
        """Geometric signed distance (w.x + b) / |w| for rows of x."""
        return (x @ self.w + self.b) / self.norm_w

    def side(self, x: np.ndarray) -> np.ndarray:
        """True where w.x + b >= 0 (ties at 0 count as the positive side)."""
        return (x @ self.w + self.b) >= 0.0


def _sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = (
        np.sum(points**2, axis=1)[:, None]
        + np.sum(centroids**2, axis=1)[None, :]
        - 2.0 * points @ centroids.T
    )
    return np.maximum(d2, 0.0)


def _init_centroids(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    m = points.shape[0]
    first = int(rng.integers(m))
    if k == 1:
        return points[[first]].copy()
    if k == 2:
        # Greedy farthest-point: stable for the binary splits the pipeline lives on.
        d2 = np.sum((points - points[first]) ** 2, axis=1)
        return points[[first, int(np.argmax(d2))]].copy()
    chosen = [first]
    d2 = np.sum((points - points[first]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # All remaining mass sits on already-chosen points; take the
            # first index not yet used to keep the pick deterministic.
            unused = [i for i in range(m) if i not in chosen]
            nxt = unused[0] if unused else first
        else:
            nxt = int(rng.choice(m, p=d2 / total))
        chosen.append(nxt)
        d2 = np.minimum(d2, np.sum((points - points[nxt]) ** 2, axis=1))
    return points[chosen].copy()


def kmeans(points: np.ndarray, k: int, seed: int = 0,
           max_iter: int = 100, tol: float = 1e-6, n_init: int = 1) -> KMeansModel:
    """Lloyd iterations until the relative inertia change drops below tol.

    Empty clusters are repaired by reseeding them to the point farthest
    from its assigned centroid, which keeps inertia non-increasing. With
    n_init > 1 the best of several seeded restarts is returned.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    m = points.shape[0]
    if not 1 <= k <= m:
        raise ValueError(f"need m >= k >= 1, got m={m}, k={k}")
    rng = np.random.default_rng(seed)
    best: KMeansModel | None = None
    for _ in range(max(1, n_init)):
        model = _lloyd(points, k, rng, max_iter, tol)
        if best is None or model.inertia < best.inertia:
            best = model
        if best.inertia == 0.0:
            break
    return best


def _lloyd(points: np.ndarray, k: int, rng: np.random.Generator,
           max_iter: int, tol: float) -> KMeansModel:
    m = points.shape[0]
    centroids = _init_centroids(points, k, rng)
    labels = np.zeros(m, dtype=np.int64)
    history: list[float] = []
    inertia = np.inf
    for _ in range(max_iter):
        d2 = _sq_dists(points, centroids)
        labels = np.argmin(d2, axis=1)
        assigned = d2[np.arange(m), labels].copy()
        for c in range(k):
            if not np.any(labels == c):
                worst = int(np.argmax(assigned))
                centroids[c] = points[worst]
                labels[worst] = c
                assigned[worst] = 0.0
        new_inertia = float(assigned.sum())
        history.append(new_inertia)
        converged = np.isfinite(inertia) and (
            abs(inertia - new_inertia) <= tol * max(inertia, 1e-300)
        )
        inertia = new_inertia
        if converged:
            break
        centroids = np.stack([points[labels == c].mean(axis=0) for c in range(k)])
    # Score against the returned centroids; moving to means never worsens it.
    inertia = float(np.sum((points - centroids[labels]) ** 2))
    if inertia < history[-1]:
        history.append(inertia)
    return KMeansModel(centroids=centroids, labels=labels, inertia=inertia,
                       inertia_history=history, n_iter=len(history))


def train_linear_svm(points: np.ndarray, labels: np.ndarray, C: float = 100.0,
                     tol: float = 1e-4, seed: int = 0,
                     max_iter: int = 100_000) -> Hyperplane:
    """Fit the L1 soft-margin linear SVM and return its hyperplane.

    ``seed`` is accepted for interface uniformity; the maximal-violating-pair
    solver is deterministic and does not consume randomness. The returned
    plane carries an empty affiliation set for the caller to fill.
    """
    del seed
    X = np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(labels, dtype=np.float64)
    m = X.shape[0]
    if m < 2:
        raise ValueError(f"need at least 2 points, got {m}")
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise ValueError("labels must be in {-1,+1}")
    if np.all(y == y[0]):
        raise DegenerateSplitError("single-class input")
    if C <= 0:
        raise ValueError(f"C must be > 0, got {C}")

    K = X @ X.T
    alpha = np.zeros(m)
    grad = -np.ones(m)  # gradient of 0.5*a'Qa - sum(a) at a=0
    pos = y > 0
    eps = 1e-12 * C

    b_lo = b_hi = 0.0
    for _ in range(max_iter):
        can_up = np.where(pos, alpha < C - eps, alpha > eps)
        can_dn = np.where(pos, alpha > eps, alpha < C - eps)
        yg = y * grad
        up_vals = np.where(can_up, -yg, -np.inf)
        dn_vals = np.where(can_dn, -yg, np.inf)
        i = int(np.argmax(up_vals))
        j = int(np.argmin(dn_vals))
        b_hi = up_vals[i]
        b_lo = dn_vals[j]
        if b_hi - b_lo < tol:
            break
        eta = max(K[i, i] + K[j, j] - 2.0 * K[i, j], 1e-12)
        aj_old, ai_old = alpha[j], alpha[i]
        aj = aj_old + y[j] * (y[i] * grad[i] - y[j] * grad[j]) / eta
        if y[i] != y[j]:
            lo, hi = max(0.0, aj_old - ai_old), min(C, C + aj_old - ai_old)
        else:
            lo, hi = max(0.0, ai_old + aj_old - C), min(C, ai_old + aj_old)
        aj = min(max(aj, lo), hi)
        ai = ai_old + y[i] * y[j] * (aj_old - aj)
        d_i, d_j = ai - ai_old, aj - aj_old
        if abs(d_j) <= 1e-14 * C:
            break  # numerically stalled at the box; KKT gap is already tiny
        alpha[i], alpha[j] = ai, aj
        grad += (d_i * y[i]) * (y * K[:, i]) + (d_j * y[j]) * (y * K[:, j])

    w = X.T @ (alpha * y)
    norm = float(np.linalg.norm(w))
    if norm < 1e-12:
        raise DegenerateSplitError("degenerate split")
    b = float((b_hi + b_lo) / 2.0)
    return Hyperplane(w=w, b=b, norm_w=norm)
