"""End-to-end runs: config, seeding, stage error tags, and the JSON report."""

from __future__ import annotations

import hashlib
import json
import os
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .data import Dataset, preprocess
from .forest import HyperplaneSet, SplitParams, build_experiment_H, fixed_point_L_prime
from .graph import (AffinityGraph, Embedding, build_affinity, embed,
                    embedding_distances, geodesic_distances)
from .measure import (ClusterResult, ComponentStats, classify_roles,
                      compute_stats, grow_clusters, select_centers)
from .metrics import ari, nmi, restrict_assigned
from .sweep import SweepCurve, best_of, default_grid, select_delta, sweep

_SEED_MASK = (1 << 63) - 1


class PipelineError(RuntimeError):
    """Module failure wrapped with the pipeline stage it occurred in."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@contextmanager
def _stage(name: str):
    try:
        yield
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, exc) from exc


@dataclass
class RunConfig:
    delta: int | None = None
    h_mode: str = "experiment"  # "experiment" | "fixed_point"
    repeats: int = 5
    seed: int = 0
    svm_c: float = 100.0
    svm_tol: float = 1e-4
    kmeans_max_iter: int = 100
    kmeans_tol: float = 1e-6
    kmeans_restarts: int = 3
    margin_mode: str = "literal"  # "literal" | "canonical"
    metric_mode: str = "singletons"  # headline full-dataset convention
    phi_scope: str = "joint"  # fixed-point filter context
    max_rounds: int = 10
    minmax: bool = False
    center: bool = False
    grid: list[int] | None = None
    grid_min: int | None = None
    grid_max: int | None = None
    grid_steps: int = 24

    def __post_init__(self):
        if self.delta is not None and self.delta < 2:
            raise ValueError(f"delta must be >= 2, got {self.delta}")
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        if self.h_mode not in ("experiment", "fixed_point"):
            raise ValueError(f"unknown h_mode {self.h_mode!r}")

    def split_params(self) -> SplitParams:
        return SplitParams(svm_c=self.svm_c, svm_tol=self.svm_tol,
                           kmeans_max_iter=self.kmeans_max_iter,
                           kmeans_tol=self.kmeans_tol,
                           kmeans_restarts=self.kmeans_restarts)


@dataclass
class RunArtifacts:
    result: ClusterResult
    stats: list[ComponentStats]
    hyperplanes: HyperplaneSet
    graph: AffinityGraph
    embedding: Embedding


@dataclass
class PipelineOutcome:
    """Everything a caller could want from one pipeline invocation."""

    report: dict
    dataset: Dataset
    result: ClusterResult
    stats: list[ComponentStats]
    hyperplanes: HyperplaneSet
    graph: AffinityGraph
    embedding: Embedding
    curve: SweepCurve | None = None


def derive_seed(master: int, *tags: int) -> int:
    """Counter-style child seed so repeats and sweep points stay independent."""
    entropy = [master & _SEED_MASK] + [int(t) & _SEED_MASK for t in tags]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0])


def dataset_hash(ds: Dataset) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(ds.points).tobytes())
    if ds.truth_labels is not None:
        h.update(np.ascontiguousarray(np.asarray(ds.truth_labels, dtype=np.int64)).tobytes())
    return h.hexdigest()


def run_once(ds: Dataset, delta: int, cfg: RunConfig, seed: int) -> RunArtifacts:
    """One full pass: hyperplanes, affinity, geodesics, stats, growth."""
    params = cfg.split_params()
    with _stage("hyperplanes"):
        if cfg.h_mode == "fixed_point":
            hs = fixed_point_L_prime(ds, delta, seed, max_rounds=cfg.max_rounds,
                                     params=params, phi_scope=cfg.phi_scope)
        else:
            hs = build_experiment_H(ds, delta, seed, params=params)
    with _stage("embedding"):
        emb = embed(ds, hs)
        dist = embedding_distances(emb)
    with _stage("affinity"):
        graph = build_affinity(ds, hs, margin_mode=cfg.margin_mode)
    with _stage("geodesics"):
        geodesic_distances(graph, emb, dist=dist)
    with _stage("measure"):
        stats = compute_stats(graph, dist, delta)
        classify_roles(stats)
        centers = select_centers(stats)
    with _stage("growth"):
        result = grow_clusters(stats, centers, ds.n, delta, seed, dist=dist)
    return RunArtifacts(result=result, stats=stats, hyperplanes=hs,
                        graph=graph, embedding=emb)


def run_best_of(ds: Dataset, delta: int, cfg: RunConfig,
                stream: int) -> tuple[RunArtifacts, list[dict]]:
    """Best of cfg.repeats runs at one threshold, plus per-run metadata."""
    artifacts: list[RunArtifacts] = []
    meta: list[dict] = []
    for rep in range(cfg.repeats):
        seed = derive_seed(cfg.seed, stream, delta, rep)
        art = run_once(ds, delta, cfg, seed)
        artifacts.append(art)
        meta.append({
            "seed": seed,
            "n_assigned": art.result.n_assigned,
            "n_components": art.graph.n_components,
            "n_centers": len(art.result.centers),
        })
    best = best_of([a.result for a in artifacts])
    chosen = next(i for i, a in enumerate(artifacts) if a.result is best)
    for i, record in enumerate(meta):
        record["chosen"] = i == chosen
    return artifacts[chosen], meta


def run_pipeline(ds: Dataset, cfg: RunConfig) -> PipelineOutcome:
    """Preprocess, pick delta (sweeping when unset), cluster, and report."""
    with _stage("preprocess"):
        ds = preprocess(ds, minmax=cfg.minmax, center=cfg.center)
    curve: SweepCurve | None = None
    if cfg.delta is None:
        with _stage("delta_search"):
            grid = cfg.grid or default_grid(ds.n, steps=cfg.grid_steps,
                                            lo=cfg.grid_min, hi=cfg.grid_max)
            curve = sweep_dataset(ds, grid, cfg)
            delta = curve.selected_delta
    else:
        delta = cfg.delta
    art, runs = run_best_of(ds, delta, cfg, stream=2)
    report = build_report(ds, cfg, delta, art, runs, curve)
    return PipelineOutcome(report=report, dataset=ds, result=art.result,
                           stats=art.stats, hyperplanes=art.hyperplanes,
                           graph=art.graph, embedding=art.embedding, curve=curve)


def sweep_dataset(ds: Dataset, grid: list[int], cfg: RunConfig) -> SweepCurve:
    """N(delta) over the grid, annotated with metrics when truth is present."""

    def run_at(delta: int):
        art, meta = run_best_of(ds, delta, cfg, stream=1)
        count = int(round(float(np.median([m["n_assigned"] for m in meta]))))
        note = {
            "n_components": art.graph.n_components,
            "n_centers": len(art.result.centers),
        }
        if ds.truth_labels is not None:
            note.update(_metric_pair(ds.truth_labels, art.result, cfg.metric_mode))
        return count, note

    curve = sweep(ds, grid, cfg.repeats, cfg.seed, run_at=run_at)
    return curve


def _metric_pair(truth, result: ClusterResult, mode: str) -> dict:
    full_mode = mode if mode in ("singletons", "noise_cluster") else "singletons"
    t, p = restrict_assigned(truth, result, mode=full_mode)
    return {"ari": ari(t, p), "nmi": nmi(t, p)}


def _metrics_block(ds: Dataset, result: ClusterResult, cfg: RunConfig) -> dict | None:
    if ds.truth_labels is None:
        return None
    block = {"mode": cfg.metric_mode}
    for mode in ("singletons", "noise_cluster"):
        t_full, p_full = restrict_assigned(ds.truth_labels, result, mode=mode)
        block[f"full_{mode}"] = {"ari": ari(t_full, p_full), "nmi": nmi(t_full, p_full)}
    headline = cfg.metric_mode if cfg.metric_mode in ("singletons", "noise_cluster") else "singletons"
    block["full"] = dict(block[f"full_{headline}"], mode=headline)
    if result.n_assigned > 0:
        t_a, p_a = restrict_assigned(ds.truth_labels, result, mode="assigned_only")
        if t_a.size >= 2:
            block["assigned_only"] = {"ari": ari(t_a, p_a), "nmi": nmi(t_a, p_a),
                                      "n_assigned": int(result.n_assigned)}
    return block


def build_report(ds: Dataset, cfg: RunConfig, delta: int, art: RunArtifacts,
                 runs: list[dict], curve: SweepCurve | None) -> dict:
    result = art.result
    report = {
        "dataset": {
            "source": ds.provenance.get("source", "unknown"),
            "n": ds.n,
            "d": ds.d,
            "sha256": dataset_hash(ds),
            "preprocessing": {
                "normalized": bool(ds.provenance.get("normalized", False)),
                "centered": bool(ds.provenance.get("centered", False)),
            },
        },
        "config": asdict(cfg),
        "delta": int(delta),
        "delta_search": None if curve is None else {
            "grid": list(curve.grid),
            "n_assigned": list(curve.n_assigned),
            "selected_delta": curve.selected_delta,
        },
        "runs": runs,
        "chosen_seed": result.seed,
        "hyperplanes": {
            "mode": art.hyperplanes.mode,
            "count": len(art.hyperplanes.planes),
            "truncated": art.hyperplanes.truncated,
            "degenerate_branches": dict(sorted(art.hyperplanes.diagnostics.items())),
        },
        "components": [
            {
                "id": s.component_id,
                "size": s.size,
                "intra_dis": s.intra_dis,
                "inter_dis": s.inter_dis,
                "m": s.m_value,
                "role": s.role,
                "island": s.island,
                "neighbors": sorted(s.neighbors),
            }
            for s in art.stats
        ],
        "centers": [int(c) for c in result.centers],
        "n_clusters": len(result.centers),
        "n_assigned": int(result.n_assigned),
        "metrics": _metrics_block(ds, result, cfg),
    }
    return report


def write_json_atomic(payload: dict, path: str | Path) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, allow_nan=False) + "\n")
    os.replace(tmp, path)


def write_assignments_csv(result: ClusterResult, path: str | Path) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("w", newline="") as fh:
        fh.write("point_index,cluster_id\n")
        for i, c in enumerate(result.assignment):
            fh.write(f"{i},{int(c)}\n")
    os.replace(tmp, path)
