"""Benchmark harness: run manifest entries and consolidate the metrics."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .data import DataError, Dataset, gen_synthetic, load_csv
from .pipeline import PipelineOutcome, RunConfig, run_pipeline, write_json_atomic
from .plots import plot_assignments, plot_sweep

_CONFIG_KEYS = ("delta", "h_mode", "repeats", "seed", "svm_c", "svm_tol",
                "kmeans_max_iter", "kmeans_tol", "kmeans_restarts",
                "margin_mode", "metric_mode", "phi_scope", "max_rounds",
                "minmax", "center", "grid", "grid_min", "grid_max", "grid_steps")


def load_manifest(path: str | Path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such manifest: {path}")
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"manifest is not valid JSON: {exc}") from exc
    entries = payload.get("entries") if isinstance(payload, dict) else payload
    if not isinstance(entries, list) or not entries:
        raise DataError("manifest needs a non-empty 'entries' list")
    for i, entry in enumerate(entries):
        if "name" not in entry:
            raise DataError(f"manifest entry {i} has no name")
        if "path" not in entry and "synthetic" not in entry:
            raise DataError(f"manifest entry {entry['name']!r} needs 'path' or 'synthetic'")
    return entries


def _load_entry(entry: dict, base: Path) -> Dataset | None:
    if "synthetic" in entry:
        spec = entry["synthetic"]
        return gen_synthetic(spec["shape"], int(spec.get("n", 1600)),
                             float(spec.get("noise", 0.0)), int(spec.get("seed", 0)))
    path = Path(entry["path"])
    if not path.is_absolute():
        path = base / path
    if not path.exists():
        return None
    return load_csv(path, has_header=bool(entry.get("has_header", False)),
                    label_column=entry.get("label_column"))


def _entry_config(entry: dict) -> RunConfig:
    kwargs = {k: entry[k] for k in _CONFIG_KEYS if k in entry}
    return RunConfig(**kwargs)


def run_bench(manifest_path: str | Path, out_path: str | Path,
              plot_dir: str | Path | None = None) -> dict:
    """Run every manifest entry; write consolidated JSON plus a CSV summary.

    Entries whose data file is missing are reported with status "missing"
    rather than failing the whole bench. Target bands, when present, are
    checked against the full-dataset and assigned-only metrics.
    """
    manifest_path = Path(manifest_path)
    entries = load_manifest(manifest_path)
    results = []
    for entry in entries:
        record = {"name": entry["name"]}
        ds = _load_entry(entry, manifest_path.parent)
        if ds is None:
            record["status"] = "missing"
            record["path"] = entry["path"]
            results.append(record)
            continue
        outcome = run_pipeline(ds, _entry_config(entry))
        record.update(_summarize(outcome))
        _check_targets(record, entry)
        results.append(record)
        if plot_dir is not None:
            _render(outcome, Path(plot_dir), entry["name"])
    payload = {"manifest": str(manifest_path), "entries": results}
    write_json_atomic(payload, out_path)
    _write_summary_csv(results, Path(out_path).with_suffix(".csv"))
    return payload


def _summarize(outcome: PipelineOutcome) -> dict:
    report = outcome.report
    record = {
        "status": "ok",
        "n": report["dataset"]["n"],
        "d": report["dataset"]["d"],
        "delta": report["delta"],
        "n_clusters": report["n_clusters"],
        "n_assigned": report["n_assigned"],
    }
    metrics = report["metrics"]
    if metrics is not None:
        record["ari_full"] = metrics["full"]["ari"]
        record["nmi_full"] = metrics["full"]["nmi"]
        assigned = metrics.get("assigned_only")
        if assigned is not None:
            record["ari_assigned"] = assigned["ari"]
            record["nmi_assigned"] = assigned["nmi"]
    return record


def _check_targets(record: dict, entry: dict) -> None:
    targets = entry.get("targets")
    if not targets or record.get("status") != "ok":
        return
    band = float(entry.get("band", 0.15))
    checks = {}
    for key, target in targets.items():
        achieved = record.get(key)
        if achieved is None:
            checks[key] = {"target": target, "achieved": None, "ok": False}
        else:
            checks[key] = {"target": target, "achieved": achieved,
                           "ok": bool(achieved >= target - band)}
    record["band"] = band
    record["targets"] = checks


def _render(outcome: PipelineOutcome, plot_dir: Path, name: str) -> None:
    plot_dir.mkdir(parents=True, exist_ok=True)
    if outcome.curve is not None:
        plot_sweep(outcome.curve, outcome.dataset.n, plot_dir / f"{name}_sweep.svg")
    plot_assignments(outcome.dataset.points, outcome.result,
                     plot_dir / f"{name}_clusters.svg", title=name)


def _write_summary_csv(results: list[dict], path: Path) -> None:
    cols = ["name", "status", "n", "d", "delta", "n_clusters", "n_assigned",
            "ari_full", "nmi_full", "ari_assigned", "nmi_assigned"]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for record in results:
            writer.writerow([_cell(record.get(c)) for c in cols])


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".4f")
    return str(value)
