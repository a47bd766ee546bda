"""Dataset loading, preprocessing, and synthetic shape generators."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Raised for malformed or missing input data."""


@dataclass(frozen=True)
class Dataset:
    """An n x d point matrix plus optional ground-truth labels.

    ``provenance`` records the source identifier and which preprocessing
    steps have been applied, so reports can name exactly what was run.
    """

    points: np.ndarray
    truth_labels: np.ndarray | None = None
    feature_names: tuple[str, ...] | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise DataError(f"points must be a non-empty 2-D matrix, got shape {pts.shape}")
        if not np.isfinite(pts).all():
            raise DataError("points contain non-finite entries")
        object.__setattr__(self, "points", pts)
        if self.truth_labels is not None:
            labels = np.asarray(self.truth_labels)
            if labels.shape != (pts.shape[0],):
                raise DataError(
                    f"truth_labels length {labels.shape} does not match n={pts.shape[0]}"
                )
            object.__setattr__(self, "truth_labels", labels)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def _parse_cell(cell: str, row: int, col: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise DataError(f"non-numeric cell {cell!r} at row {row}, column {col}") from None


def _factorize(raw: list[str]) -> np.ndarray:
    """Map raw label strings to integer ids in order of first appearance."""
    ids: dict[str, int] = {}
    out = np.empty(len(raw), dtype=np.int64)
    for i, value in enumerate(raw):
        if value not in ids:
            ids[value] = len(ids)
        out[i] = ids[value]
    return out


def load_csv(path: str | Path, has_header: bool = False,
             label_column: int | None = None) -> Dataset:
    """Load a comma-separated numeric matrix, optionally peeling off a label column.

    ``label_column`` is a zero-based index into the raw columns; labels may be
    arbitrary strings and are factorized to integer ids by first appearance.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    names: tuple[str, ...] | None = None
    if has_header and rows:
        header = rows.pop(0)
        names = tuple(h.strip() for h in header)
    if not rows:
        raise DataError(f"no data rows in {path}")
    width = len(rows[0])
    for r, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"ragged row {r}: expected {width} cells, got {len(row)}")
    if label_column is not None:
        label_column = range(width)[label_column]  # normalizes negatives, bounds-checks
    raw_labels: list[str] = []
    points = np.empty((len(rows), width - (label_column is not None)), dtype=np.float64)
    for r, row in enumerate(rows):
        c_out = 0
        for c, cell in enumerate(row):
            if c == label_column:
                raw_labels.append(cell.strip())
            else:
                points[r, c_out] = _parse_cell(cell.strip(), r, c)
                c_out += 1
    if names is not None and label_column is not None:
        names = tuple(h for c, h in enumerate(names) if c != label_column)
    labels = _factorize(raw_labels) if label_column is not None else None
    return Dataset(points=points, truth_labels=labels, feature_names=names,
                   provenance={"source": str(path), "normalized": False, "centered": False})


def save_csv(ds: Dataset, path: str | Path, with_labels: bool = True) -> None:
    """Write the dataset as CSV at 17 significant digits (lossless for float64).

    Labels, when present and requested, go in the last column.
    """
    path = Path(path)
    include = with_labels and ds.truth_labels is not None
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        if ds.feature_names is not None:
            header = list(ds.feature_names)
            if include:
                header.append("label")
            writer.writerow(header)
        for i in range(ds.n):
            row = [format(v, ".17g") for v in ds.points[i]]
            if include:
                row.append(str(int(ds.truth_labels[i])))
            writer.writerow(row)


def preprocess(ds: Dataset, minmax: bool = False, center: bool = False) -> Dataset:
    """Per-column min-max normalization and/or mean centering, in that order.

    Constant columns normalize to all-zero rather than dividing by zero.
    """
    pts = ds.points
    if minmax:
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        span = hi - lo
        safe = np.where(span > 0, span, 1.0)
        pts = np.where(span > 0, (pts - lo) / safe, 0.0)
    if center:
        pts = pts - pts.mean(axis=0)
    prov = dict(ds.provenance)
    prov["normalized"] = prov.get("normalized", False) or minmax
    prov["centered"] = prov.get("centered", False) or center
    return replace(ds, points=pts, provenance=prov)


def gen_synthetic(shape: str, n: int, noise: float = 0.0, seed: int = 0) -> Dataset:
    """Generate a 2-D two-branch benchmark distribution with branch labels.

    Shapes: ``circles`` (two concentric rings), ``moons`` (two interleaving
    half circles), ``spiral`` (two interleaved spiral arms). Exactly n/2
    points per branch; ``noise`` is the standard deviation of an additive
    isotropic Gaussian perturbation.
    """
    if n < 2:
        raise DataError(f"n must be >= 2, got {n}")
    if n % 2 != 0:
        raise DataError(f"n must be even (half per branch), got {n}")
    if noise < 0:
        raise DataError(f"noise must be >= 0, got {noise}")
    if shape not in _SHAPE_TAGS:
        raise DataError(f"unknown shape {shape!r}; expected circles, moons, or spiral")
    rng = np.random.default_rng(np.random.SeedSequence([seed, _SHAPE_TAGS[shape]]))
    half = n // 2
    if shape == "circles":
        theta = rng.uniform(0.0, 2.0 * np.pi, size=2 * half)
        radius = np.concatenate([np.full(half, 1.0), np.full(half, 0.5)])
        pts = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    elif shape == "moons":
        t = rng.uniform(0.0, np.pi, size=2 * half)
        upper = np.column_stack([np.cos(t[:half]), np.sin(t[:half])])
        lower = np.column_stack([1.0 - np.cos(t[half:]), 0.5 - np.sin(t[half:])])
        pts = np.vstack([upper, lower])
    elif shape == "spiral":
        # Two Archimedean arms a half-turn apart, sampled uniformly in arc
        # length so the point spacing stays even along each arm.
        t0, t1 = 0.5 * np.pi, 3.0 * np.pi
        u = rng.uniform(0.0, 1.0, size=2 * half)
        theta = np.sqrt(t0**2 + u * (t1**2 - t0**2))
        r = theta / (2.0 * np.pi)
        arm_a = np.column_stack([r[:half] * np.cos(theta[:half]),
                                 r[:half] * np.sin(theta[:half])])
        arm_b = np.column_stack([-r[half:] * np.cos(theta[half:]),
                                 -r[half:] * np.sin(theta[half:])])
        pts = np.vstack([arm_a, arm_b])
    if noise > 0:
        pts = pts + rng.normal(0.0, noise, size=pts.shape)
    labels = np.concatenate([np.zeros(half, dtype=np.int64), np.ones(half, dtype=np.int64)])
    return Dataset(points=pts, truth_labels=labels,
                   provenance={"source": f"synthetic:{shape}", "normalized": False,
                               "centered": False, "seed": seed, "noise": noise})


_SHAPE_TAGS = {"circles": 1, "moons": 2, "spiral": 3}
