"""Margin-based adjacency, connective components, and geodesic distances.

Two points are adjacent unless some hyperplane separates them while one of
the pair is isolated to it (beyond the margin threshold, or part of the
plane's training set). Components are the transitive closure of adjacency;
geodesics run over component-internal edges weighted by Euclidean distance
in the hyperplane-coordinate embedding.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import csgraph

from .forest import HyperplaneSet, _as_points
from .solvers import Hyperplane


@dataclass
class Embedding:
    """Rows are points expressed as signed distances to every hyperplane."""

    coords: np.ndarray  # (n, |H|)


@dataclass
class AffinityGraph:
    adjacency: np.ndarray  # (n, n) bool, symmetric, True on the diagonal
    component_of: np.ndarray  # (n,) int
    components: list[np.ndarray]  # member indices, ascending, per component
    geodesic: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def n_components(self) -> int:
        return len(self.components)


def embed(ds, H: HyperplaneSet) -> Embedding:
    points = _as_points(ds)
    if len(H.planes) == 0:
        return Embedding(coords=np.zeros((points.shape[0], 0)))
    cols = [p.signed_distance(points) for p in H.planes]
    return Embedding(coords=np.stack(cols, axis=1))


def margin_threshold(plane: Hyperplane, margin_mode: str) -> float:
    """Functional-value threshold |w.x + b| must exceed for isolation."""
    if margin_mode == "literal":
        return 1.0 / plane.norm_w
    if margin_mode == "canonical":
        return 1.0
    raise ValueError(f"unknown margin_mode {margin_mode!r}")


def is_isolated(i: int, plane: Hyperplane, ds, margin_mode: str = "literal") -> bool:
    """True iff point i is affiliated to the plane or beyond its margin band."""
    if i in plane.affiliated:
        return True
    x = _as_points(ds)[i]
    return abs(float(x @ plane.w + plane.b)) > margin_threshold(plane, margin_mode)


def build_affinity(ds, H: HyperplaneSet, margin_mode: str = "literal") -> AffinityGraph:
    """Dense adjacency plus connective components.

    adjacency(i, j) is False exactly when some plane has i and j on opposite
    sides (w.x + b = 0 counts as the positive side) with i or j isolated to it.
    """
    points = _as_points(ds)
    n = points.shape[0]
    adjacency = np.ones((n, n), dtype=bool)
    for plane in H.planes:
        f = points @ plane.w + plane.b
        side = f >= 0.0
        iso = np.abs(f) > margin_threshold(plane, margin_mode)
        if plane.affiliated:
            iso[np.fromiter(plane.affiliated, dtype=np.intp)] = True
        blocked = (side[:, None] != side[None, :]) & (iso[:, None] | iso[None, :])
        adjacency &= ~blocked
    np.fill_diagonal(adjacency, True)
    n_comp, labels = csgraph.connected_components(adjacency, directed=False)
    # Relabel components by smallest member index so ids are reproducible.
    order = np.argsort([np.flatnonzero(labels == c)[0] for c in range(n_comp)])
    remap = np.empty(n_comp, dtype=np.int64)
    remap[order] = np.arange(n_comp)
    component_of = remap[labels]
    components = [np.flatnonzero(component_of == c) for c in range(n_comp)]
    return AffinityGraph(adjacency=adjacency, component_of=component_of,
                         components=components)


def embedding_distances(emb: Embedding) -> np.ndarray:
    """Symmetric Euclidean distance matrix over embedding rows."""
    coords = emb.coords
    sq = np.sum(coords**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (coords @ coords.T)
    d2 = 0.5 * (d2 + d2.T)
    np.fill_diagonal(d2, 0.0)
    return np.sqrt(np.maximum(d2, 0.0))


def geodesic_distances(graph: AffinityGraph, emb: Embedding,
                       dist: np.ndarray | None = None) -> AffinityGraph:
    """Fill per-component all-pairs shortest-path tables.

    Edges exist between adjacent points and weigh their embedding-space
    Euclidean distance; cross-component distances are +inf by construction.
    """
    if dist is None:
        dist = embedding_distances(emb)
    graph.geodesic = {}
    for cid, members in enumerate(graph.components):
        m = members.size
        if m == 1:
            graph.geodesic[cid] = np.zeros((1, 1))
            continue
        block = np.where(graph.adjacency[np.ix_(members, members)],
                         dist[np.ix_(members, members)], np.inf)
        sparse = csgraph.csgraph_from_dense(block, null_value=np.inf)
        table = csgraph.dijkstra(sparse, directed=False)
        np.fill_diagonal(table, 0.0)
        graph.geodesic[cid] = table
    return graph


def dump_components(graph: AffinityGraph, path: str | Path) -> None:
    """Debug CSV mapping each point index to its component id."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["point_index", "component_id"])
        for i, c in enumerate(graph.component_of):
            writer.writerow([i, int(c)])
