"""Threshold sweep: N(delta) curves, first-peak selection, best-of repeats."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .measure import UNASSIGNED, ClusterResult
from .metrics import ari


@dataclass
class SweepCurve:
    grid: list[int]
    n_assigned: list[int]
    selected_delta: int | None = None
    annotations: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if len(self.grid) != len(self.n_assigned):
            raise ValueError("grid and n_assigned lengths differ")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be strictly ascending")


def default_grid(n: int, steps: int = 24, lo: int | None = None,
                 hi: int | None = None) -> list[int]:
    """Linearly spaced integer thresholds from max(4, n/100) up to n/4.

    Above n/4 the size gate (delta/4) starts to exceed the granularity of
    mid-scale structure and the chart stops being informative.
    """
    lo = max(4, round(n / 100)) if lo is None else lo
    hi = max(lo, n // 4) if hi is None else hi
    lo = max(2, lo)
    hi = max(lo, hi)
    values = np.unique(np.round(np.linspace(lo, hi, steps)).astype(int))
    return [int(v) for v in values if v >= 2]


def sweep(ds, grid: Sequence[int], repeats: int, seed: int,
          run_at: Callable[[int], tuple[int, dict]] | None = None,
          select: bool = True, **cfg_overrides) -> SweepCurve:
    """Run the pipeline at every grid threshold and record N(delta).

    Each grid point runs ``repeats`` times and records the median assigned
    count (medians keep single lucky repeats from faking peaks). ``run_at``
    may be injected for testing; by default the full pipeline is used with
    seeds derived from (seed, delta, repeat).
    """
    grid = [int(g) for g in grid]
    if not grid:
        raise ValueError("empty delta grid")
    if any(g < 2 for g in grid):
        raise ValueError(f"every delta must be >= 2, got {sorted(grid)[0]}")
    if run_at is None:
        from .pipeline import RunConfig, run_best_of

        cfg = RunConfig(repeats=repeats, seed=seed, **cfg_overrides)

        def run_at(delta: int) -> tuple[int, dict]:
            art, meta = run_best_of(ds, delta, cfg, stream=1)
            count = int(round(float(np.median([m["n_assigned"] for m in meta]))))
            note = {
                "n_components": art.graph.n_components,
                "n_centers": len(art.result.centers),
            }
            return count, note

    counts: list[int] = []
    annotations: list[dict] = []
    for delta in grid:
        count, note = run_at(delta)
        counts.append(int(count))
        annotations.append(note)
    curve = SweepCurve(grid=grid, n_assigned=counts, annotations=annotations)
    if select:
        n_total = ds.n if hasattr(ds, "n") else int(np.asarray(ds).shape[0])
        curve.selected_delta = select_delta(curve, n_total)
    return curve


def _peaks(counts: Sequence[int], prominence: int = 1) -> list[int]:
    """Interior new-high indices rising by at least ``prominence``.

    A peak must not drop toward the right (plateaus report their first
    index) and must exceed everything before it, so a recovery after a
    collapse does not read as a fresh peak.
    """
    out = []
    for j in range(1, len(counts) - 1):
        if (
            counts[j] - counts[j - 1] >= prominence
            and counts[j] >= counts[j + 1]
            and counts[j] > max(counts[:j])
        ):
            out.append(j)
    return out


def select_delta(curve: SweepCurve, n_total: int) -> int:
    """First peak with N above half the points, else the global maximum.

    Returns the grid value just before the chosen index (the first grid
    value when the choice is the leftmost point). A rise must clear 10% of
    the point count to register as a peak, so gently saturating curves
    fall through to their maximum instead of stopping at noise bumps.
    """
    if not curve.grid:
        raise ValueError("empty curve")
    counts = curve.n_assigned
    prominence = max(1, round(0.10 * n_total))
    chosen: int | None = None
    for j in _peaks(counts, prominence):
        if counts[j] > n_total / 2.0:
            chosen = j
            break
    if chosen is None:
        chosen = int(np.argmax(counts))
    return curve.grid[chosen - 1] if chosen > 0 else curve.grid[0]


def _singleton_labels(assignment: np.ndarray) -> np.ndarray:
    out = assignment.copy()
    unassigned = np.flatnonzero(out == UNASSIGNED)
    fresh = int(out.max()) + 1 if out.size else 0
    out[unassigned] = fresh + np.arange(unassigned.size)
    return out


def best_of(runs: Sequence[ClusterResult]) -> ClusterResult:
    """Most points assigned, with near-ties resolved by run consensus.

    Runs within 5% of the best assigned count compete on their mean
    partition agreement (ARI, unassigned as singletons) with the other
    candidates, so one-off structures lose to the reproducible one even
    when they assign a handful more points. Remaining ties favor higher
    mean center M, then run order.
    """
    if not runs:
        raise ValueError("best_of needs at least one run")
    best_n = max(r.n_assigned for r in runs)
    n_points = runs[0].assignment.size
    slack = max(1, round(0.05 * n_points))
    pool = [(i, r) for i, r in enumerate(runs) if r.n_assigned >= best_n - slack]
    if len(pool) == 1 or n_points < 2:
        best = pool[0][1]
        for _, cand in pool[1:]:
            if cand.mean_center_m() > best.mean_center_m():
                best = cand
        return best
    labels = {i: _singleton_labels(r.assignment) for i, r in pool}
    scores = {}
    for i, _ in pool:
        others = [ari(labels[i], labels[j]) for j, _ in pool if j != i]
        scores[i] = float(np.mean(others)) if others else 0.0
    # Consensus differences within ARI noise do not outrank coverage.
    finalists = [(i, r) for i, r in pool if scores[i] >= max(scores.values()) - 0.05]
    best_i, best_r = finalists[0]
    for i, r in finalists[1:]:
        if (r.n_assigned, scores[i], r.mean_center_m()) > (
            best_r.n_assigned, scores[best_i], best_r.mean_center_m()
        ):
            best_i, best_r = i, r
    return best_r


def write_sweep_csv(curve: SweepCurve, path: str | Path) -> None:
    """Delimited sweep record: delta, n_assigned, then any annotation columns."""
    extra: list[str] = []
    for note in curve.annotations:
        for key in note:
            if key not in extra:
                extra.append(key)
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["delta", "n_assigned"] + extra)
        notes = curve.annotations or [{} for _ in curve.grid]
        for delta, count, note in zip(curve.grid, curve.n_assigned, notes):
            row = [delta, count] + [_fmt(note.get(k, "")) for k in extra]
            writer.writerow(row)


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)
