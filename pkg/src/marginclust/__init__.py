"""Clustering by recursively constructed maximum-margin hyperplanes."""

from .data import DataError, Dataset, gen_synthetic, load_csv, preprocess, save_csv
from .forest import (HyperplaneSet, SplitParams, build_experiment_H, f_delta,
                     fixed_point_L_prime, partition_cells, phi_filter)
from .graph import (AffinityGraph, Embedding, build_affinity, embed,
                    embedding_distances, geodesic_distances, is_isolated)
from .measure import (HCC, OTHER, PCC, UNASSIGNED, ClusterResult,
                      ComponentStats, classify_roles, compute_stats,
                      grow_clusters, inter_dis, intra_dis, measure_m,
                      neighbor_map, select_centers)
from .metrics import ari, contingency, nmi, restrict_assigned
from .pipeline import (PipelineError, PipelineOutcome, RunConfig, run_best_of,
                       run_once, run_pipeline)
from .solvers import (DegenerateSplitError, Hyperplane, KMeansModel, kmeans,
                      train_linear_svm)
from .sweep import SweepCurve, best_of, default_grid, select_delta, sweep

__version__ = "0.1.0"

__all__ = [
    "AffinityGraph", "ClusterResult", "ComponentStats", "DataError", "Dataset",
    "DegenerateSplitError", "Embedding", "HCC", "Hyperplane", "HyperplaneSet",
    "KMeansModel", "OTHER", "PCC", "PipelineError", "PipelineOutcome",
    "RunConfig", "SplitParams", "SweepCurve", "UNASSIGNED", "ari", "best_of",
    "build_affinity", "build_experiment_H", "classify_roles", "compute_stats",
    "contingency", "default_grid", "embed", "embedding_distances", "f_delta",
    "fixed_point_L_prime", "gen_synthetic", "geodesic_distances",
    "grow_clusters", "inter_dis", "intra_dis", "is_isolated", "kmeans",
    "load_csv", "measure_m", "neighbor_map", "nmi", "partition_cells",
    "phi_filter", "preprocess", "restrict_assigned", "run_best_of", "run_once",
    "run_pipeline", "save_csv", "select_centers", "select_delta", "sweep",
    "train_linear_svm",
]
