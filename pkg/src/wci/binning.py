"""Cube partitions of the conditioning variable's range."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .measures import DataError, Dataset

DIAM_SLACK = 1e-12


@dataclass(frozen=True)
class LipschitzConstants:
    L_X: float
    L_Y: float
    L_XY: float

    def __post_init__(self):
        for name in ("L_X", "L_Y", "L_XY"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be finite and >= 0")

    def governing(self, p: float) -> float:
        """max{L_XY, (2^(p-1) (L_X^p + L_Y^p))^(1/p)}."""
        marg = (2.0 ** (p - 1) * (self.L_X**p + self.L_Y**p)) ** (1.0 / p)
        return max(self.L_XY, marg)

    def to_dict(self) -> dict:
        return {"L_X": self.L_X, "L_Y": self.L_Y, "L_XY": self.L_XY}


def required_diameter(eps: float, p: float, L: LipschitzConstants) -> float:
    """Largest cell diameter keeping the binning error of W_p below eps/2."""
    if not eps > 0:
        raise ValueError("eps must be > 0")
    g = L.governing(p)
    if g == 0:
        raise ValueError("unbounded diameter; binning unnecessary")
    return eps / (4.0 * g)


def estimate_bin_count(diam_support: float, d_Z: int, eps: float, p: float, L: LipschitzConstants) -> float:
    """Planning estimate (8 diam max{...} sqrt(d) / eps)^d of the number of bins."""
    return (8.0 * diam_support * L.governing(p) * math.sqrt(d_Z) / eps) ** d_Z


@dataclass(frozen=True)
class BinGrid:
    """Axis-aligned cube grid over ``[lower, upper]``.

    Cells are half-open ``[a, a + edge)`` except the last cell on each axis,
    which is closed. A cell is addressed by its multi-index (tuple of ints).
    When an axis has zero extent it gets a single cell.
    """

    lower: np.ndarray
    upper: np.ndarray
    edge: float
    counts_per_axis: tuple[int, ...]

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float).ravel()
        hi = np.array(self.upper, dtype=float).ravel()
        if lo.shape != hi.shape or np.any(hi < lo):
            raise ValueError("bad bounding box")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "counts_per_axis", tuple(int(c) for c in self.counts_per_axis))

    @property
    def d_Z(self) -> int:
        return self.lower.shape[0]

    @property
    def n_cells(self) -> int:
        return math.prod(self.counts_per_axis)

    @property
    def cell_diameter(self) -> float:
        return self.edge * math.sqrt(self.d_Z)

    def cells(self):
        return itertools.product(*(range(c) for c in self.counts_per_axis))

    def centroid(self, idx) -> np.ndarray:
        return self.lower + (np.asarray(idx, dtype=float) + 0.5) * self.edge

    def cell_bounds(self, idx) -> tuple[np.ndarray, np.ndarray]:
        a = self.lower + np.asarray(idx, dtype=float) * self.edge
        return a, a + self.edge

    def locate(self, z: np.ndarray) -> np.ndarray:
        """Multi-indices (rows) of the cells containing each row of ``z``."""
        z = np.asarray(z, dtype=float)
        if z.ndim == 1:
            z = z[:, None]
        if z.shape[1] != self.d_Z:
            raise DataError(f"z has dimension {z.shape[1]}, grid has {self.d_Z}")
        outside = np.nonzero(np.any((z < self.lower) | (z > self.upper), axis=1))[0]
        if outside.size:
            shown = ", ".join(str(i) for i in outside[:20])
            more = "" if outside.size <= 20 else f" (+{outside.size - 20} more)"
            raise DataError(f"rows outside grid box: {shown}{more}")
        idx = np.floor((z - self.lower) / self.edge).astype(int)
        return np.clip(idx, 0, np.array(self.counts_per_axis) - 1)

    def to_dict(self) -> dict:
        return {
            "d_Z": self.d_Z,
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "edge": self.edge,
            "counts_per_axis": list(self.counts_per_axis),
            "n_cells": self.n_cells,
            "cell_diameter": self.cell_diameter,
        }


def build_grid(z_samples, diameter: float, padding: float = 0.0) -> BinGrid:
    """Grid of cubes with diagonal ``diameter`` covering the padded sample box."""
    if not diameter > 0:
        raise ValueError("diameter must be > 0")
    if padding < 0:
        raise ValueError("padding must be >= 0")
    z = np.asarray(z_samples, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    if z.shape[0] == 0:
        raise DataError("empty sample")
    lo = z.min(axis=0) - padding
    hi = z.max(axis=0) + padding
    d = z.shape[1]
    edge = diameter / math.sqrt(d)
    # guard against edge * sqrt(d) rounding above the requested diameter
    while edge * math.sqrt(d) > diameter:
        edge = math.nextafter(edge, 0.0)
    side = hi - lo
    counts = []
    for s in side:
        c = max(1, math.ceil(s / edge))
        # ceil can overshoot by one when s / edge is an integer up to rounding
        if c > 1 and (c - 1) * edge >= s:
            c -= 1
        counts.append(c)
    return BinGrid(lo, hi, edge, tuple(counts))


def assign(data: Dataset | np.ndarray, grid: BinGrid) -> dict[tuple[int, ...], np.ndarray]:
    """Map each nonempty cell's multi-index to the sorted row indices it holds."""
    z = data.z if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    idx = grid.locate(z)
    flat = np.ravel_multi_index(idx.T, grid.counts_per_axis)
    order = np.argsort(flat, kind="stable")
    keys, starts = np.unique(flat[order], return_index=True)
    bounds = list(starts[1:]) + [len(order)]
    out = {}
    for key, s, e in zip(keys, starts, bounds):
        cell = tuple(int(i) for i in np.unravel_index(key, grid.counts_per_axis))
        out[cell] = order[s:e]
    return out
