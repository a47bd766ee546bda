"""Command-line interface: cluster, sweep, synth, eval, and bench."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .data import DataError, gen_synthetic, load_csv, save_csv
from .forest import dump_planes
from .graph import dump_components
from .measure import UNASSIGNED
from .metrics import ari, nmi, restrict_assigned
from .pipeline import (PipelineError, RunConfig, run_pipeline,
                       write_assignments_csv, write_json_atomic)
from .plots import plot_assignments, plot_sweep
from .sweep import write_sweep_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self. print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="CSV file of points")
    p.add_argument("--label-col", type=int, default=None,
                   help="zero-based index of the ground-truth label column")
    p.add_argument("--has-header", action="store_true")
    p.add_argument("--minmax", action="store_true", help="per-column min-max normalization")
    p.add_argument("--center", action="store_true", help="subtract per-column means")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=int, default=None,
                   help="size threshold; omit to auto-select from a sweep")
    p.add_argument("--h-mode", choices=("experiment", "fixed_point"), default="experiment")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--margin-mode", choices=("literal", "canonical"), default="literal")
    p.add_argument("--metric-mode", choices=("singletons", "noise_cluster"),
                   default="singletons")
    p.add_argument("--svm-c", type=float, default=100.0)
    p.add_argument("--grid", default=None, help="comma-separated sweep thresholds")
    p.add_argument("--grid-min", type=int, default=None)
    p.add_argument("--grid-max", type=int, default=None)
    p.add_argument("--grid-steps", type=int, default=24)


def _config_from(args) -> RunConfig:
    grid = None
    if args.grid:
        grid = [int(v) for v in str(args.grid).split(",") if v.strip()]
    return RunConfig(delta=args.delta, h_mode=args.h_mode, repeats=args.repeats,
                     seed=args.seed, margin_mode=args.margin_mode,
                     metric_mode=args.metric_mode, svm_c=args.svm_c,
                     minmax=args.minmax, center=args.center, grid=grid,
                     grid_min=args.grid_min, grid_max=args.grid_max,
                     grid_steps=args.grid_steps)


def _load(args):
    return load_csv(args.input, has_header=args.has_header, label_column=args.label_col)


def _cmd_cluster(args) -> int:
    ds = _load(args)
    outcome = run_pipeline(ds, _config_from(args))
    if args.out_report:
        write_json_atomic(outcome.report, args.out_report)
    if args.out_assignments:
        write_assignments_csv(outcome.result, args.out_assignments)
    if args.plot:
        plot_assignments(outcome.dataset.points, outcome.result, args.plot,
                         title=Path(args.input).stem)
    if args.dump_planes:
        dump_planes(outcome.hyperplanes, args.dump_planes)
    if args.dump_components:
        dump_components(outcome.graph, args.dump_components)
    summary = {
        "delta": outcome.report["delta"],
        "n_clusters": outcome.report["n_clusters"],
        "n_assigned": outcome.report["n_assigned"],
        "metrics": outcome.report["metrics"],
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    from .pipeline import sweep_dataset
    from .data import preprocess
    from .sweep import default_grid

    ds = _load(args)
    cfg = _config_from(args)
    ds = preprocess(ds, minmax=cfg.minmax, center=cfg.center)
    grid = cfg.grid or default_grid(ds.n, steps=cfg.grid_steps,
                                    lo=cfg.grid_min, hi=cfg.grid_max)
    curve = sweep_dataset(ds, grid, cfg)
    write_sweep_csv(curve, args.out)
    if args.plot:
        plot_sweep(curve, ds.n, args.plot)
    print(json.dumps({"selected_delta": curve.selected_delta,
                      "grid": curve.grid, "n_assigned": curve.n_assigned}))
    return EXIT_OK


def _cmd_synth(args) -> int:
    ds = gen_synthetic(args.shape, args.n, noise=args.noise, seed=args.seed)
    save_csv(ds, args.out)
    print(f"wrote {args.n} points to {args.out}")
    return EXIT_OK


def _read_labels(path: str) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    labels = []
    with path.open() as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            cell = line.split(",")[-1].strip()
            try:
                labels.append(int(float(cell)))
            except ValueError:
                if i == 0:
                    continue  # header row
                raise DataError(f"non-numeric label {cell!r} at line {i + 1} of {path}")
    if not labels:
        raise DataError(f"no labels in {path}")
    return np.array(labels, dtype=np.int64)


def _cmd_eval(args) -> int:
    truth = _read_labels(args.truth)
    pred = _read_labels(args.pred)
    if truth.size != pred.size:
        raise DataError(f"label counts differ: {truth.size} vs {pred.size}")
    n_assigned = int(np.sum(pred != UNASSIGNED))
    mode = "assigned_only" if args.assigned_only else args.full_mode
    t, p = restrict_assigned(truth, pred, mode=mode)
    print(json.dumps({"ari": ari(t, p), "nmi": nmi(t, p), "n": int(truth.size),
                      "n_assigned": n_assigned, "mode": mode}))
    return EXIT_OK


def _cmd_bench(args) -> int:
    payload = bench_mod.run_bench(args.manifest, args.out, plot_dir=args.plot_dir)
    by_status: dict[str, int] = {}
    for entry in payload["entries"]:
        by_status[entry["status"]] = by_status.get(entry["status"], 0) + 1
    print(json.dumps({"out": str(args.out), "entries": by_status}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="marginclust",
                     description="Clustering by recursively constructed "
                                 "maximum-margin hyperplanes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster a CSV dataset")
    _add_input_args(p)
    _add_run_args(p)
    p.add_argument("--out-report", default=None, help="JSON report path")
    p.add_argument("--out-assignments", default=None,
                   help="CSV of point_index,cluster_id (-1 = unassigned)")
    p.add_argument("--plot", default=None, help="cluster map figure path (svg/png)")
    p.add_argument("--dump-planes", default=None, help="debug CSV of hyperplanes")
    p.add_argument("--dump-components", default=None,
                   help="debug CSV of point -> component ids")
    p.set_defaults(fn=_cmd_cluster)

    p = sub.add_parser("sweep", help="sweep the size threshold and chart N(delta)")
    _add_input_args(p)
    _add_run_args(p)
    p.add_argument("--out", required=True, help="sweep CSV path")
    p.add_argument("--plot", default=None, help="sweep figure path (svg/png)")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("synth", help="generate a synthetic benchmark dataset")
    p.add_argument("--shape", choices=("circles", "moons", "spiral"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_synth)

    p = sub.add_parser("eval", help="score predicted labels against truth labels")
    p.add_argument("--truth", required=True, help="CSV whose last column is the label")
    p.add_argument("--pred", required=True, help="CSV whose last column is the label")
    p.add_argument("--assigned-only", action="store_true",
                   help="restrict to points with a cluster id")
    p.add_argument("--full-mode", choices=("singletons", "noise_cluster"),
                   default="singletons")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("bench", help="run a benchmark manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="consolidated JSON report path")
    p.add_argument("--plot-dir", default=None,
                   help="directory for per-entry figures")
    p.set_defaults(fn=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA if isinstance(exc.cause, DataError) else EXIT_NUMERIC
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
