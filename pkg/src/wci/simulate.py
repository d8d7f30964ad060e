"""Monte-Carlo sweeps: repeated generate-then-test runs with error frequencies."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .binning import LipschitzConstants
from .bounds import BoundParams
from .ci_test import CIConfig, run_ci_test
from .datagen import ScenarioError, ScenarioSpec, generate, scenario_from_dict
from .ot import SolverConfig
from .two_sample import run_two_sample


@dataclass(frozen=True)
class TestSpec:
    kind: Literal["ci", "two_sample"] = "ci"
    p: float = 1.0
    eps: float = 0.5
    delta: float | None = None
    L: LipschitzConstants | None = None
    bound_params: BoundParams | None = None
    min_bin_samples: int = 30
    solver: SolverConfig = field(default_factory=SolverConfig)
    padding: float = 0.0
    require_side_condition: bool = True

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "p": self.p,
            "eps": self.eps,
            "delta": self.delta,
            "L": None if self.L is None else self.L.to_dict(),
            "bound_params": None if self.bound_params is None else self.bound_params.to_dict(),
            "min_bin_samples": self.min_bin_samples,
            "solver": self.solver.to_dict(),
            "padding": self.padding,
            "require_side_condition": self.require_side_condition,
        }


@dataclass(frozen=True)
class Sweep:
    scenario: ScenarioSpec
    test: TestSpec
    replications: int
    seed_base: int = 0
    hypothesis: Literal["null", "alternative"] = "null"

    def __post_init__(self):
        if self.replications < 1:
            raise ScenarioError("replications must be >= 1")
        if self.hypothesis not in ("null", "alternative"):
            raise ScenarioError("hypothesis must be 'null' or 'alternative'")
        if self.test.kind == "ci" and self.test.L is None:
            raise ScenarioError("ci sweeps need Lipschitz constants L")
        if self.hypothesis == "alternative" and self.test.delta is None:
            raise ScenarioError("alternative sweeps need delta")

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "test": self.test.to_dict(),
            "replications": self.replications,
            "seed_base": self.seed_base,
            "hypothesis": self.hypothesis,
        }


def _require_keys(obj: dict, allowed: set[str], what: str) -> None:
    if not isinstance(obj, dict):
        raise ScenarioError(f"{what} must be an object")
    extra = set(obj) - allowed
    if extra:
        raise ScenarioError(f"unknown {what} keys: {sorted(extra)}")


def sweep_from_dict(obj: dict) -> Sweep:
    _require_keys(obj, {"scenario", "test", "replications", "seed_base", "hypothesis"}, "sweep")
    for key in ("scenario", "test", "replications"):
        if key not in obj:
            raise ScenarioError(f"sweep missing {key!r}")
    t = obj["test"]
    _require_keys(
        t,
        {"kind", "p", "eps", "delta", "L", "bound_params", "min_bin_samples", "solver", "padding",
         "require_side_condition"},
        "test",
    )
    try:
        L = None if t.get("L") is None else LipschitzConstants(**t["L"])
        bp = None if t.get("bound_params") is None else BoundParams(**t["bound_params"])
        solver = SolverConfig(**t.get("solver", {}))
        test = TestSpec(
            kind=t.get("kind", "ci"),
            p=float(t.get("p", 1.0)),
            eps=float(t["eps"]),
            delta=None if t.get("delta") is None else float(t["delta"]),
            L=L,
            bound_params=bp,
            min_bin_samples=int(t.get("min_bin_samples", 30)),
            solver=solver,
            padding=float(t.get("padding", 0.0)),
            require_side_condition=bool(t.get("require_side_condition", True)),
        )
        reps = obj["replications"]
        if not isinstance(reps, int) or isinstance(reps, bool):
            raise ScenarioError("replications must be an integer")
        return Sweep(
            scenario_from_dict(obj["scenario"]),
            test,
            reps,
            int(obj.get("seed_base", 0)),
            obj.get("hypothesis", "null"),
        )
    except (TypeError, KeyError) as e:
        raise ScenarioError(f"bad sweep: {e}") from None


def replication_seeds(seed_base: int, r: int) -> tuple[int, int]:
    """(data seed, test seed) for replication ``r``."""
    s = np.random.SeedSequence(seed_base, spawn_key=(r,)).generate_state(2)
    return int(s[0]), int(s[1])


def _one(sweep: Sweep, r: int) -> dict:
    data_seed, test_seed = replication_seeds(sweep.seed_base, r)
    data = generate(sweep.scenario.with_seed(data_seed))
    t = sweep.test
    if t.kind == "two_sample":
        res = run_two_sample(
            data, t.p, t.eps, test_seed, t.solver, t.bound_params, t.delta, t.require_side_condition
        )
        t1 = res.type1_bound.value
        t2 = None if res.type2_bound is None else res.type2_bound.value
        return {"rep": r, "data_seed": data_seed, "test_seed": test_seed, "reject": res.reject,
                "type1_bound": t1, "type2_bound": t2, "distance": res.distance}
    cfg = CIConfig(
        p=t.p, eps=t.eps, L=t.L, delta=t.delta, bound_params=t.bound_params,
        min_bin_samples=t.min_bin_samples, seed=test_seed, solver=t.solver, padding=t.padding,
        require_side_condition=t.require_side_condition, workers=1,
    )
    rep = run_ci_test(data, cfg)
    return {"rep": r, "data_seed": data_seed, "test_seed": test_seed, "reject": rep.reject,
            "type1_bound": rep.type1_total, "type2_bound": rep.type2_total,
            "bins_tested": len(rep.tested), "bins_skipped": len(rep.skipped)}


def binomial_verdict(errors: int, reps: int, bound: float | None, sigmas: float = 3.0) -> dict:
    """Check errors / reps <= bound + sigmas * sqrt(bound (1 - bound) / reps)."""
    freq = errors / reps
    if bound is None:
        return {"frequency": freq, "bound": "unavailable", "se": None, "limit": None, "pass": None}
    se = math.sqrt(bound * (1.0 - bound) / reps)
    limit = bound + sigmas * se
    return {"frequency": freq, "bound": bound, "se": se, "limit": limit, "pass": bool(freq <= limit)}


def run_sweep(sweep: Sweep, workers: int | None = None, progress=None) -> dict:
    """Run all replications; aggregation is by replication index.

    The bound a frequency is checked against is the mean per-run bound (the
    per-run bounds differ slightly because bin populations vary).
    """
    if workers is None:
        workers = max(1, int(os.environ.get("WCI_THREADS", "1") or 1))
    reps = range(sweep.replications)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            rows = list(ex.map(lambda r: _one(sweep, r), reps))
    else:
        rows = []
        for r in reps:
            rows.append(_one(sweep, r))
            if progress is not None:
                progress(r)
    key = "type1_bound" if sweep.hypothesis == "null" else "type2_bound"
    vals = [row[key] for row in rows]
    bound = None if any(v is None for v in vals) else float(np.mean(vals))
    if sweep.hypothesis == "null":
        errors = sum(row["reject"] for row in rows)
    else:
        errors = sum(not row["reject"] for row in rows)
    return {
        "schema_version": "1",
        "sweep": sweep.to_dict(),
        "hypothesis": sweep.hypothesis,
        "error_kind": "type1" if sweep.hypothesis == "null" else "type2",
        "errors": int(errors),
        "replications": sweep.replications,
        "verdict": binomial_verdict(int(errors), sweep.replications, bound),
        "runs": rows,
    }
