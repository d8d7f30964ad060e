"""Plug-in estimates of the W_p-Lipschitz constants of z -> L(. | Z = z)."""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from .binning import BinGrid, assign
from .measures import Dataset, empirical_measure
from .ot import SolverConfig, wasserstein

Target = Literal["XY", "X", "Y"]


@dataclass(frozen=True)
class PairRatio:
    a: tuple[int, ...]
    b: tuple[int, ...]
    distance: float
    center_distance: float

    @property
    def ratio(self) -> float:
        return self.distance / self.center_distance


@dataclass(frozen=True)
class LipschitzEstimate:
    value: float
    argmax: tuple[tuple[int, ...], tuple[int, ...]]
    target: Target
    p: float
    pairs: tuple[PairRatio, ...] = ()

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "argmax": [list(self.argmax[0]), list(self.argmax[1])],
            "target": self.target,
            "p": self.p,
            "n_pairs": len(self.pairs),
        }

    def write_pairs_csv(self, dest) -> None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cell_a", "cell_b", "distance", "center_distance", "ratio"])
        for pr in self.pairs:
            w.writerow([
                ";".join(map(str, pr.a)), ";".join(map(str, pr.b)),
                repr(pr.distance), repr(pr.center_distance), repr(pr.ratio),
            ])
        if isinstance(dest, (str, Path)):
            Path(dest).write_text(buf.getvalue())
        else:
            dest.write(buf.getvalue())


def _target_points(data: Dataset, target: Target) -> np.ndarray:
    if target == "XY":
        return data.xy()
    if target == "X":
        return data.x
    if target == "Y":
        return data.y
    raise ValueError(f"unknown target {target!r}")


def plugin_lipschitz(
    data: Dataset,
    grid: BinGrid,
    target: Target = "XY",
    p: float = 1.0,
    min_bin_samples: int = 3,
    solver: SolverConfig | None = None,
) -> LipschitzEstimate:
    """Max over bin pairs of W_p(bin laws) / |center_j - center_j'|.

    Bins with fewer than ``min_bin_samples`` rows are dropped. The bin law is
    the empirical measure of the target coordinates over all rows in the bin.
    """
    pts = _target_points(data, target)
    cells = {c: r for c, r in assign(data, grid).items() if r.size >= min_bin_samples}
    if len(cells) < 2:
        raise ValueError("insufficient populated bins")
    measures = {c: empirical_measure(pts[r]) for c, r in cells.items()}
    pairs = []
    for a, b in itertools.combinations(sorted(cells), 2):
        dist = wasserstein(measures[a], measures[b], p, solver).distance
        cd = float(np.linalg.norm(grid.centroid(a) - grid.centroid(b)))
        pairs.append(PairRatio(a, b, dist, cd))
    best = max(pairs, key=lambda pr: pr.ratio)
    return LipschitzEstimate(best.ratio, (best.a, best.b), target, p, tuple(pairs))
