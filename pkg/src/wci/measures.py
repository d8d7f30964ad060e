"""Discrete probability measures, datasets, and the three-block independence split."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

WEIGHT_TOL = 1e-12


class DataError(ValueError):
    """Malformed measure or dataset input."""


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted point cloud in R^d.

    ``points`` has shape (k, d); ``weights`` has shape (k,) and sums to one.
    Arrays are copied and made read-only on construction.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.array(self.weights, dtype=float).ravel()
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] < 1:
            raise DataError("points must be a nonempty (k, d) array with d >= 1")
        if w.shape[0] != pts.shape[0]:
            raise DataError("weights and points differ in length")
        if not np.all(np.isfinite(pts)):
            raise DataError("non-finite coordinate")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise DataError("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise DataError(f"weights sum to {w.sum()!r}, not 1")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))

    def shifted(self, v) -> DiscreteMeasure:
        return DiscreteMeasure(self.points + np.asarray(v, dtype=float), self.weights)

    def scaled(self, c: float) -> DiscreteMeasure:
        return DiscreteMeasure(self.points * c, self.weights)


def empirical_measure(points) -> DiscreteMeasure:
    """Uniform measure on the given points, keeping duplicates as separate atoms."""
    if isinstance(points, np.ndarray):
        if points.size == 0:
            raise DataError("empty sample")
        arr = points.astype(float)
    else:
        rows = list(points)
        if not rows:
            raise DataError("empty sample")
        rows = [np.atleast_1d(np.asarray(r, dtype=float)) for r in rows]
        if len({r.shape for r in rows}) != 1:
            raise DataError("dimension mismatch")
        arr = np.stack(rows)
    if arr.ndim == 1:
        arr = arr[:, None]
    k = arr.shape[0]
    return DiscreteMeasure(arr, np.full(k, 1.0 / k))


def product_measure(mu: DiscreteMeasure, nu: DiscreteMeasure) -> DiscreteMeasure:
    """Atom-pair product mu ⊗ nu on R^{d_mu + d_nu}."""
    m, n = mu.size, nu.size
    pts = np.hstack([np.repeat(mu.points, n, axis=0), np.tile(nu.points, (m, 1))])
    w = np.outer(mu.weights, nu.weights).ravel()
    return DiscreteMeasure(pts, w / w.sum())


def mixture(components: Sequence[DiscreteMeasure], lam) -> DiscreteMeasure:
    """Concatenate atoms of ``components`` with weights scaled by ``lam``."""
    lam = np.asarray(lam, dtype=float)
    if len(components) == 0 or lam.shape != (len(components),):
        raise DataError("need one mixing weight per component")
    if np.any(lam < 0) or abs(lam.sum() - 1.0) > WEIGHT_TOL:
        raise DataError("mixing weights must be a probability vector")
    dims = {c.dim for c in components}
    if len(dims) != 1:
        raise DataError("dimension mismatch")
    pts = np.vstack([c.points for c in components])
    w = np.concatenate([l * c.weights for l, c in zip(lam, components)])
    return DiscreteMeasure(pts, w / w.sum())


def qth_moment(mu: DiscreteMeasure, q: float) -> float:
    """Root moment (sum_i w_i |x_i|^q)^(1/q) with the Euclidean norm."""
    if q < 1:
        raise ValueError("q must be >= 1")
    norms = np.linalg.norm(mu.points, axis=1)
    return float(np.dot(mu.weights, norms**q) ** (1.0 / q))


@dataclass(frozen=True)
class Dataset:
    """Aligned samples (x_i, y_i, z_i); row i of each matrix is one draw."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        mats = []
        for name in ("x", "y", "z"):
            a = np.array(getattr(self, name), dtype=float)
            if a.ndim == 1:
                a = a[:, None]
            if a.ndim != 2 or a.shape[1] < 1:
                raise DataError(f"{name} must be an (n, d) matrix with d >= 1")
            if not np.all(np.isfinite(a)):
                raise DataError(f"non-finite value in {name}")
            a.setflags(write=False)
            mats.append(a)
        n = {a.shape[0] for a in mats}
        if len(n) != 1:
            raise DataError("x, y, z have different row counts")
        if mats[0].shape[0] < 1:
            raise DataError("empty sample")
        for name, a in zip(("x", "y", "z"), mats):
            object.__setattr__(self, name, a)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.x.shape[1], self.y.shape[1], self.z.shape[1]

    def subset(self, rows) -> Dataset:
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.x[rows], self.y[rows], self.z[rows])

    def xy(self) -> np.ndarray:
        return np.hstack([self.x, self.y])


@dataclass(frozen=True)
class SplitPair:
    """Joint and product empirical measures built from disjoint row blocks."""

    joint: DiscreteMeasure
    product: DiscreteMeasure
    k: int
    rows: tuple[np.ndarray, np.ndarray, np.ndarray] = field(repr=False, compare=False)


def split_for_independence(data: Dataset, seed: int | None) -> SplitPair:
    """Three-block split: block 1 gives (x_i, y_i); blocks 2 and 3 give x and y.

    Rows are permuted by ``np.random.default_rng(seed)``; ``seed=None`` keeps the
    input order. The n - 3k leftover rows are dropped.
    """
    n = data.n
    if n < 3:
        raise DataError("insufficient samples to split")
    k = n // 3
    order = np.arange(n) if seed is None else np.random.default_rng(seed).permutation(n)
    b1, b2, b3 = order[:k], order[k : 2 * k], order[2 * k : 3 * k]
    joint = empirical_measure(np.hstack([data.x[b1], data.y[b1]]))
    product = empirical_measure(np.hstack([data.x[b2], data.y[b3]]))
    return SplitPair(joint, product, k, (b1, b2, b3))


# --- CSV ingestion ---------------------------------------------------------


def _parse_header(header: list[str]) -> tuple[int, int, int]:
    dims = {"x": 0, "y": 0, "z": 0}
    expected_order = []
    for col in header:
        col = col.strip()
        if len(col) < 2 or col[0] not in dims or not col[1:].isdigit():
            raise DataError(f"bad column name {col!r}; expected x1..,y1..,z1..")
        expected_order.append(col)
    for prefix in "xyz":
        cols = [c for c in expected_order if c[0] == prefix]
        if cols != [f"{prefix}{i + 1}" for i in range(len(cols))]:
            raise DataError(f"{prefix} columns must be {prefix}1..{prefix}{len(cols)} in order")
        dims[prefix] = len(cols)
    canonical = [f"{p}{i + 1}" for p in "xyz" for i in range(dims[p])]
    if expected_order != canonical:
        raise DataError("columns must be ordered x.., y.., z..")
    if dims["x"] == 0 or dims["y"] == 0:
        raise DataError("missing column: need at least x1 and y1")
    return dims["x"], dims["y"], dims["z"]


def read_csv(source, require_z: bool = True) -> Dataset:
    """Read the ``x1..,y1..,z1..`` CSV schema.

    Values are parsed with ``float`` (locale independent). Without z columns and
    ``require_z=False`` a constant zero z column is substituted.
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.read()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty file") from None
    dx, dy, dz = _parse_header(header)
    if dz == 0 and require_z:
        raise DataError("missing column: need at least z1")
    width = dx + dy + dz
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != width:
            raise DataError(f"row {lineno}: expected {width} fields, got {len(row)}")
        vals = []
        for col, cell in enumerate(row):
            cell = cell.strip()
            if cell == "":
                raise DataError(f"row {lineno}, column {header[col]}: missing field")
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"row {lineno}, column {header[col]}: not a number {cell!r}") from None
            if not math.isfinite(v):
                raise DataError(f"row {lineno}, column {header[col]}: non-finite value")
            vals.append(v)
        rows.append(vals)
    if not rows:
        raise DataError("empty sample")
    arr = np.array(rows)
    z = arr[:, dx + dy :] if dz else np.zeros((arr.shape[0], 1))
    return Dataset(arr[:, :dx], arr[:, dx : dx + dy], z)


def write_csv(data: Dataset, dest) -> None:
    dx, dy, dz = data.dims
    header = [f"{p}{i + 1}" for p, d in zip("xyz", (dx, dy, dz)) for i in range(d)]
    arr = np.hstack([data.x, data.y, data.z])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in arr:
        w.writerow([repr(float(v)) for v in row])
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(buf.getvalue())
    else:
        dest.write(buf.getvalue())
