"""Hyperplane set construction: recursive splitting, norm filtering, cells.

A split takes a working set, 2-means it, trains the SVM on the induced
labels, and recurses on the two sides of the plane until sets fall below
the size threshold. Degenerate branches (single k-means cluster, SVM
failure, or a side that swallows everything) terminate silently and are
tallied in the diagnostics counters.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field, replace
from itertools import count
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .data import Dataset
from .solvers import DegenerateSplitError, Hyperplane, kmeans, train_linear_svm


@dataclass(frozen=True)
class SplitParams:
    """Solver knobs shared by every split the forest makes."""

    svm_c: float = 100.0
    svm_tol: float = 1e-4
    kmeans_max_iter: int = 100
    kmeans_tol: float = 1e-6
    kmeans_restarts: int = 3


@dataclass
class HyperplaneSet:
    planes: list[Hyperplane]
    mode: str  # "L" | "L_prime" | "H_experiment"
    delta: int
    truncated: bool = False
    diagnostics: Counter = field(default_factory=Counter)

    def __post_init__(self):
        ids = [p.id for p in self.planes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate hyperplane ids")

    def __len__(self) -> int:
        return len(self.planes)

    def norms(self) -> np.ndarray:
        return np.array([p.norm_w for p in self.planes])


def _as_points(ds) -> np.ndarray:
    return ds.points if isinstance(ds, Dataset) else np.asarray(ds, dtype=np.float64)


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _grow(points: np.ndarray, indices: np.ndarray, delta: int,
          rng: np.random.Generator, ids: Iterator[int], diag: Counter,
          cell_tag: int, params: SplitParams) -> list[Hyperplane]:
    """Depth-first recursive splitting; iterative to dodge recursion limits."""
    out: list[Hyperplane] = []
    stack = [np.asarray(indices, dtype=np.intp)]
    while stack:
        idx = stack.pop()
        if idx.size < delta:
            continue
        sub = points[idx]
        km = kmeans(sub, 2, seed=int(rng.integers(2**63)),
                    max_iter=params.kmeans_max_iter, tol=params.kmeans_tol,
                    n_init=params.kmeans_restarts)
        if (km.labels == km.labels[0]).all():
            diag["single_cluster"] += 1
            continue
        y = np.where(km.labels == 0, -1.0, 1.0)
        try:
            plane = train_linear_svm(sub, y, C=params.svm_c, tol=params.svm_tol)
        except DegenerateSplitError:
            diag["degenerate_svm"] += 1
            continue
        side = plane.side(sub)
        if side.all() or not side.any():
            diag["empty_side"] += 1
            continue
        out.append(replace(plane, affiliated=frozenset(idx.tolist()),
                           id=next(ids), parent_cell=cell_tag))
        # Positive side first; LIFO pop order keeps the seed stream aligned
        # with plain depth-first recursion.
        stack.append(idx[~side])
        stack.append(idx[side])
    return out


def f_delta(S: Sequence[int] | np.ndarray, ds, delta: int, rng,
            params: SplitParams | None = None) -> HyperplaneSet:
    """Recursively split the index set S until pieces drop below delta."""
    if delta < 2:
        raise ValueError(f"delta must be >= 2, got {delta}")
    params = params or SplitParams()
    diag: Counter = Counter()
    planes = _grow(_as_points(ds), np.asarray(list(S), dtype=np.intp), delta,
                   _as_rng(rng), count(), diag, -1, params)
    return HyperplaneSet(planes=planes, mode="L", delta=delta, diagnostics=diag)


def phi_filter(planes, keep_mode: str = "set") -> HyperplaneSet | list[Hyperplane]:
    """Keep the smaller-mean-|w| group under a 1-D 2-means over plane norms.

    Sets of size <= 1, or with all norms equal within 1e-12, pass through
    unchanged.
    """
    hs = planes if isinstance(planes, HyperplaneSet) else None
    plist = list(hs.planes) if hs is not None else list(planes)
    kept = _phi(plist)
    if hs is not None and keep_mode == "set":
        return HyperplaneSet(planes=kept, mode="L_prime", delta=hs.delta,
                             truncated=hs.truncated, diagnostics=hs.diagnostics)
    return kept


def _phi(plist: list[Hyperplane]) -> list[Hyperplane]:
    if len(plist) <= 1:
        return list(plist)
    norms = np.array([p.norm_w for p in plist])
    if norms.max() - norms.min() <= 1e-12:
        return list(plist)
    km = kmeans(norms[:, None], 2, seed=0)
    means = [norms[km.labels == c].mean() for c in (0, 1)]
    keep = int(np.argmin(means))
    return [p for p, lab in zip(plist, km.labels) if lab == keep]


def partition_cells(ds, H: HyperplaneSet | Sequence[Hyperplane]) -> list[np.ndarray]:
    """Group points by their sign vector over the planes (>= 0 counts positive).

    Returns nonempty, pairwise-disjoint index arrays covering all points,
    ordered by lexicographic sign pattern.
    """
    points = _as_points(ds)
    planes = H.planes if isinstance(H, HyperplaneSet) else list(H)
    n = points.shape[0]
    if not planes:
        return [np.arange(n, dtype=np.intp)]
    signs = np.stack([p.side(points) for p in planes], axis=1)
    _, inverse = np.unique(signs, axis=0, return_inverse=True)
    return [np.flatnonzero(inverse == g) for g in range(int(inverse.max()) + 1)]


def fixed_point_L_prime(ds, delta: int, rng, max_rounds: int = 10,
                        params: SplitParams | None = None,
                        phi_scope: str = "joint") -> HyperplaneSet:
    """Iterate cell-wise splitting + norm filtering until no plane is added.

    ``phi_scope`` controls the filter's grouping context each round:
    "joint" clusters the norms of existing and freshly produced planes
    together and admits only new planes landing in the small-norm group;
    "new_only" clusters the fresh planes' norms by themselves.
    """
    if delta < 2:
        raise ValueError(f"delta must be >= 2, got {delta}")
    if phi_scope not in ("joint", "new_only"):
        raise ValueError(f"unknown phi_scope {phi_scope!r}")
    params = params or SplitParams()
    points = _as_points(ds)
    gen = _as_rng(rng)
    ids = count()
    diag: Counter = Counter()
    all_idx = np.arange(points.shape[0], dtype=np.intp)
    current = _phi(_grow(points, all_idx, delta, gen, ids, diag, -1, params))
    truncated = False
    for _ in range(max_rounds):
        fresh: list[Hyperplane] = []
        for tag, cell in enumerate(partition_cells(points, current)):
            fresh.extend(_grow(points, cell, delta, gen, ids, diag, tag, params))
        if not fresh:
            break
        if phi_scope == "joint":
            surviving = {p.id for p in _phi(current + fresh)}
            added = [p for p in fresh if p.id in surviving]
        else:
            added = _phi(fresh)
        if not added:
            break
        current = current + added
    else:
        truncated = True
    return HyperplaneSet(planes=current, mode="L_prime", delta=delta,
                         truncated=truncated, diagnostics=diag)


def build_experiment_H(ds, delta: int, rng,
                       params: SplitParams | None = None) -> HyperplaneSet:
    """Unfiltered two-stage set: full-set planes plus one split pass per cell."""
    if delta < 2:
        raise ValueError(f"delta must be >= 2, got {delta}")
    params = params or SplitParams()
    points = _as_points(ds)
    gen = _as_rng(rng)
    ids = count()
    diag: Counter = Counter()
    all_idx = np.arange(points.shape[0], dtype=np.intp)
    planes = _grow(points, all_idx, delta, gen, ids, diag, -1, params)
    for tag, cell in enumerate(partition_cells(points, planes)):
        planes = planes + _grow(points, cell, delta, gen, ids, diag, tag, params)
    return HyperplaneSet(planes=planes, mode="H_experiment", delta=delta,
                         diagnostics=diag)


def dump_planes(hs: HyperplaneSet, path: str | Path) -> None:
    """Debug CSV: one line per plane (id, |w|, affiliation size, parent cell)."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "norm_w", "n_affiliated", "parent_cell"])
        for p in hs.planes:
            writer.writerow([p.id, format(p.norm_w, ".17g"), len(p.affiliated), p.parent_cell])
