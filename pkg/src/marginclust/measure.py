"""Per-component quality measures, center selection, and cluster growth.

Each connective component gets a mean intra-component geodesic distance,
a mean nearest-outsider distance, and their ratio M (zeroed for components
at or below the max(1, delta/4) size gate). Peaks of M seed clusters and
absorb hillside neighbors breadth-first.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .graph import AffinityGraph

UNASSIGNED = -1

PCC = "PCC"
HCC = "HCC"
OTHER = "OTHER"

INTRA_FLOOR = 1e-12  # keeps M finite on duplicate-point components

# A gate-passing component whose nearest outsider sits many sampling steps
# away is a cluster in its own right: it is promoted to a center and never
# absorbed. Fragment components that should merge show gap-to-spacing
# ratios near 1; genuinely separate structures show ratios in the tens to
# hundreds, so the cut is insensitive to the exact factor.
ISLAND_GAP_FACTOR = 8.0


@dataclass
class ComponentStats:
    component_id: int
    members: np.ndarray
    intra_dis: float = 0.0
    inter_dis: float = 0.0
    m_value: float = 0.0
    neighbors: frozenset[int] = frozenset()
    role: str = OTHER
    sample_scale: float = 0.0
    island: bool = False

    @property
    def size(self) -> int:
        return int(self.members.size)


@dataclass
class ClusterResult:
    """Point-level outcome of one pipeline run.

    ``assignment[i]`` is a cluster id or UNASSIGNED; cluster ids index
    ``centers``, which lists center component ids by descending M.
    ``center_m`` carries the matching M values for best-of tie-breaking.
    """

    assignment: np.ndarray
    centers: list[int]
    delta: int
    seed: int
    n_assigned: int
    center_m: list[float] = field(default_factory=list)

    def mean_center_m(self) -> float:
        return float(np.mean(self.center_m)) if self.center_m else 0.0


def intra_dis(members: np.ndarray, geodesic_table: np.ndarray) -> float:
    """Mean pairwise geodesic distance inside the component (0 for singletons)."""
    m = members.size
    if m <= 1:
        return 0.0
    return float(geodesic_table.sum() / (m * (m - 1)))


def inter_dis(members: np.ndarray, dist: np.ndarray) -> float:
    """Mean over members of the distance to their nearest external point."""
    n = dist.shape[0]
    external = np.setdiff1d(np.arange(n), members, assume_unique=False)
    if external.size == 0:
        raise ValueError("inter_dis undefined with a single component")
    return float(dist[np.ix_(members, external)].min(axis=1).mean())


def measure_m(size: int, intra: float, inter: float, delta: int) -> float:
    """Size-gated ratio inter/intra; components at or below max(1, delta/4) score 0."""
    if size <= max(1.0, delta / 4.0):
        return 0.0
    return inter / max(intra, INTRA_FLOOR)


def neighbor_map(components: list[np.ndarray], component_of: np.ndarray,
                 dist: np.ndarray) -> list[frozenset[int]]:
    """Components owning some member's nearest external point (directional).

    Ties on the nearest-external distance break toward the lowest point index.
    """
    n = dist.shape[0]
    all_idx = np.arange(n)
    out: list[frozenset[int]] = []
    for members in components:
        external = np.setdiff1d(all_idx, members)
        if external.size == 0:
            out.append(frozenset())
            continue
        nearest = external[np.argmin(dist[np.ix_(members, external)], axis=1)]
        out.append(frozenset(int(c) for c in component_of[nearest]))
    return out


def sample_scale(members: np.ndarray, dist: np.ndarray) -> float:
    """Mean distance from each member to its nearest fellow member."""
    if members.size < 2:
        return 0.0
    block = dist[np.ix_(members, members)].copy()
    np.fill_diagonal(block, np.inf)
    return float(block.min(axis=1).mean())


def compute_stats(graph: AffinityGraph, dist: np.ndarray, delta: int) -> list[ComponentStats]:
    """Evaluate intra/inter/M and the neighbor relation for every component."""
    k = graph.n_components
    stats = [ComponentStats(component_id=c, members=graph.components[c]) for c in range(k)]
    if k >= 2:
        neighbors = neighbor_map(graph.components, graph.component_of, dist)
    else:
        neighbors = [frozenset()]
    for s, nb in zip(stats, neighbors):
        s.neighbors = nb
        s.intra_dis = intra_dis(s.members, graph.geodesic[s.component_id])
        s.inter_dis = inter_dis(s.members, dist) if k >= 2 else 0.0
        s.m_value = measure_m(s.size, s.intra_dis, s.inter_dis, delta)
        s.sample_scale = sample_scale(s.members, dist)
        s.island = bool(
            s.m_value > 0
            and s.inter_dis > ISLAND_GAP_FACTOR * s.sample_scale
        )
    return stats


def classify_roles(stats: list[ComponentStats]) -> list[ComponentStats]:
    """Peak iff strictly above every neighbor; hillside iff exactly one above."""
    m_of = {s.component_id: s.m_value for s in stats}
    for s in stats:
        larger = sum(1 for q in s.neighbors if m_of[q] > s.m_value)
        if all(s.m_value > m_of[q] for q in s.neighbors):
            s.role = PCC
        elif larger == 1:
            s.role = HCC
        else:
            s.role = OTHER
    return stats


def select_centers(stats: list[ComponentStats]) -> list[int]:
    """Peaks whose M strictly exceeds at least half of all components.

    Strongly isolated (island) components also qualify: nothing can absorb
    them, and the size gate has already vetted them. Centers are ordered by
    descending M, ties by component id. A lone component is the sole center
    regardless of its stats.
    """
    if len(stats) == 1:
        return [stats[0].component_id]
    k = len(stats)
    need = -(-k // 2)  # ceil(k/2)
    ms = np.array([s.m_value for s in stats])
    centers = []
    for s in stats:
        if s.island:
            centers.append(s)
            continue
        if s.role != PCC:
            continue
        beaten = int(np.sum(ms < s.m_value))  # strict; own value never counts
        if beaten >= need:
            centers.append(s)
    centers.sort(key=lambda s: (-s.m_value, s.component_id))
    return [s.component_id for s in centers]


def grow_clusters(stats: list[ComponentStats], centers: list[int], n: int,
                  delta: int, seed: int, dist: np.ndarray | None = None) -> ClusterResult:
    """Downhill absorption of hillside components into their nearest peak mass.

    Components are visited in descending M. A non-center component joins
    the cluster of its closest already-assigned neighbor with strictly
    larger M, where the neighbor relation counts in either direction
    (either end witnessing nearest-outsider proximity). Peaks and islands
    are never absorbed; components whose uphill side is unassigned stay
    unassigned.
    """
    by_id = {s.component_id: s for s in stats}
    touching: dict[int, set[int]] = {s.component_id: set(s.neighbors) for s in stats}
    for s in stats:
        for q in s.neighbors:
            touching[q].add(s.component_id)
    owner: dict[int, int] = {}
    for cluster_id, cid in enumerate(centers):
        owner[cid] = cluster_id

    def gap(a: ComponentStats, b: ComponentStats) -> float:
        if dist is None:
            return 0.0
        return float(dist[np.ix_(a.members, b.members)].min())

    order = sorted((s for s in stats if s.component_id not in owner),
                   key=lambda s: (-s.m_value, s.component_id))
    for s in order:
        if (s.role == PCC and s.m_value > 0) or s.island:
            continue
        uphill = [p for p in touching[s.component_id]
                  if p in owner and by_id[p].m_value > s.m_value]
        if not uphill:
            continue
        parent = min(uphill, key=lambda p: (gap(s, by_id[p]), p))
        owner[s.component_id] = owner[parent]
    assignment = np.full(n, UNASSIGNED, dtype=np.int64)
    for cid, cluster_id in owner.items():
        assignment[by_id[cid].members] = cluster_id
    n_assigned = int(np.sum(assignment != UNASSIGNED))
    return ClusterResult(assignment=assignment, centers=list(centers), delta=delta,
                         seed=seed, n_assigned=n_assigned,
                         center_m=[by_id[c].m_value for c in centers])
