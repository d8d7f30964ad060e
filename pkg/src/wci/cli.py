"""Command-line entry point ``wci``.

Exit codes: 0 success, 2 input or parameter error, 3 infeasible configuration.
Every JSON report embeds a ``manifest`` describing how it was produced.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from . import bounds as B
from .binning import LipschitzConstants, build_grid
from .ci_test import CIConfig, InfeasibleError, run_ci_test
from .datagen import ScenarioError, generate, load_scenario
from .lipschitz import plugin_lipschitz
from .measures import DataError, read_csv, write_csv
from .ot import SolverConfig
from .simulate import run_sweep, sweep_from_dict
from .two_sample import run_two_sample

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 2, 3
log = logging.getLogger("wci")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch else int(time.time())
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


def file_digest(path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest(command: str, config: dict, seed, inputs=(), extra: dict | None = None) -> dict:
    m = {
        "command": command,
        "config": config,
        "seed": seed,
        "inputs": {str(p): file_digest(p) for p in inputs},
        "tool_version": tool_version(),
        "timestamp": _timestamp(),
    }
    if extra:
        m.update(extra)
    return m


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, np.generic):
        return _finite(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(_finite(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def emit(obj, out: str | None) -> None:
    text = dumps(obj)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --- argument groups -------------------------------------------------------


def _add_solver(ap):
    g = ap.add_argument_group("solver")
    g.add_argument("--solver", choices=["auto", "exact", "entropic"], default="auto")
    g.add_argument("--exact-cutoff", type=int, default=512)
    g.add_argument("--lp-cutoff", type=int, default=256)
    g.add_argument("--reg", type=float, default=0.005, help="Sinkhorn regularization (relative to max cost)")
    g.add_argument("--tol", type=float, default=1e-9)
    g.add_argument("--max-iter", type=int, default=20000)


def _solver_from(a) -> SolverConfig:
    return SolverConfig(a.solver, a.exact_cutoff, a.lp_cutoff, a.reg, True, a.tol, a.max_iter)


def _add_bound_params(ap):
    g = ap.add_argument_group("bound constants")
    g.add_argument("--diameter", "--D", "-D", type=float, dest="D", help="support diameter of (X, Y)")
    g.add_argument("--moment", type=float, dest="Mq", help="bound on (E|(X,Y)|^q)^(1/q)")
    g.add_argument("--q", type=float)
    g.add_argument("--eta", type=float)
    g.add_argument("--kappa", type=float, default=B.DEFAULT_KAPPA)
    g.add_argument(
        "--allow-small-n", action="store_true",
        help="report bound values even when the expectation side condition fails",
    )


def _params_from(a) -> B.BoundParams | None:
    if a.D is None and a.Mq is None:
        return None
    return B.BoundParams(p=a.p, q=a.q, D=a.D, Mq=a.Mq, eta=a.eta, kappa=a.kappa)


def _check_p(p: float) -> None:
    if not p >= 1:
        raise ValueError("p must be >= 1")


# --- commands --------------------------------------------------------------


def cmd_two_sample(a) -> int:
    _check_p(a.p)
    data = read_csv(a.data, require_z=False)
    solver = _solver_from(a)
    params = _params_from(a)
    res = run_two_sample(data, a.p, a.epsilon0, a.seed, solver, params, a.delta0, not a.allow_small_n)
    config = {
        "p": a.p, "epsilon0": a.epsilon0, "delta0": a.delta0, "solver": solver.to_dict(),
        "bound_params": None if params is None else params.to_dict(),
        "require_side_condition": not a.allow_small_n,
    }
    report = {"schema_version": "1", **res.to_dict(),
              "manifest": manifest("two-sample", config, a.seed, [a.data])}
    emit(report, a.out)
    return EXIT_OK


def _estimate_lipschitz(data, a, solver) -> tuple[LipschitzConstants, dict]:
    ext = data.z.max(axis=0) - data.z.min(axis=0)
    d = data.z.shape[1]
    cells = a.bootstrap_cells
    scale = float(ext.max()) if ext.max() > 0 else 1.0
    diam = scale / cells * math.sqrt(d)
    grid = build_grid(data.z, diam)
    est = {}
    for target in ("X", "Y", "XY"):
        e = plugin_lipschitz(data, grid, target, a.p, a.min_bin_samples, solver)
        est[target] = e.to_dict()
    L = LipschitzConstants(est["X"]["value"], est["Y"]["value"], est["XY"]["value"])
    return L, {"bootstrap_grid": grid.to_dict(), "estimates": est}


def cmd_ci_test(a) -> int:
    _check_p(a.p)
    data = read_csv(a.data)
    solver = _solver_from(a)
    extra = {}
    if a.estimate_lipschitz:
        try:
            L, info = _estimate_lipschitz(data, a, solver)
        except ValueError as e:
            if "insufficient populated bins" in str(e):
                raise InfeasibleError(f"Lipschitz bootstrap: {e}") from None
            raise
        extra["lipschitz_bootstrap"] = info
    else:
        if a.Lx is None or a.Ly is None or a.Lxy is None:
            raise ValueError("give --Lx --Ly --Lxy or --estimate-lipschitz")
        L = LipschitzConstants(a.Lx, a.Ly, a.Lxy)
    cfg = CIConfig(
        p=a.p, eps=a.epsilon, L=L, delta=a.delta, bound_params=_params_from(a),
        min_bin_samples=a.min_bin_samples, seed=a.seed, solver=solver, padding=a.padding,
        require_side_condition=not a.allow_small_n,
    )
    rep = run_ci_test(data, cfg)
    report = rep.to_dict()
    report["manifest"] = manifest("ci-test", cfg.to_dict(), a.seed, [a.data], extra)
    emit(report, a.out)
    return EXIT_OK


def _bound_params_from_args(a, **kw) -> B.BoundParams:
    return B.BoundParams(**{k: v for k, v in kw.items() if v is not None})


def cmd_bounds(a) -> int:
    which = a.which
    inputs = {k: v for k, v in vars(a).items() if k not in ("func", "which", "out", "command", "verbose") and v is not None}
    if which == "concentration":
        if a.D is not None:
            value = B.concentration_bounded(a.n, a.t, a.D, a.p)
            outputs = {"probability": value, "case": "bounded"}
        else:
            params = _bound_params_from_args(a, p=a.p, q=a.q, Mq=a.Mq, eta=a.eta)
            outputs = {"probability": B.concentration_unbounded(a.n, a.t, params), "case": "unbounded"}
    elif which == "eps-bar":
        s = B.solve_eps_bar(a.n, a.p)
        outputs = {"eps_bar": s.eps_bar, "residual": s.residual, "m_n": s.m_n,
                   "expectation_bound_2d": B.expectation_bound_2d(a.n, a.p)}
    elif which == "min-n-d3":
        params = _bound_params_from_args(a, p=a.p, q=a.q, d=a.d, kappa=a.kappa)
        outputs = {"n": B.min_samples_d3(a.eps, params, a.moment)}
        if a.q is None:
            outputs["note"] = "q not given; q > d*p/(d-p) unchecked"
        if params.kappa_is_default:
            outputs["warning"] = "kappa is the default placeholder 1.0"
    elif which == "min-n-2d":
        outputs = {"n": B.min_samples_2d(a.eps, a.p)}
    elif which == "c-pq":
        outputs = {"c_pq": B.c_pq(a.p, a.q)}
    elif which == "covering":
        outputs = {"covering_number": B.covering_number_unit_square(a.eps)}
    elif which == "null-level":
        if (a.n is None) == (a.eps is None):
            raise ValueError("give exactly one of --n or --eps")
        if a.n is not None:
            outputs = {"eps": B.epsilon_for_level(a.n, a.D, a.p, a.alpha)}
        else:
            outputs = {"n": B.min_samples_null(a.eps, a.D, a.p, a.alpha)}
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(which)
    report = {"schema_version": "1", "calculator": which, "inputs": inputs, "outputs": outputs,
              "manifest": manifest(f"bounds {which}", inputs, None)}
    emit(report, a.out)
    return EXIT_OK


def cmd_simulate(a) -> int:
    try:
        obj = json.loads(Path(a.scenario).read_text())
    except json.JSONDecodeError as e:
        raise ScenarioError(f"scenario is not valid JSON: {e}") from None
    if a.replications is not None:
        obj["replications"] = a.replications
    if a.seed is not None:
        obj["seed_base"] = a.seed
    sweep = sweep_from_dict(obj)
    workers = int(os.environ.get("WCI_THREADS", "1") or 1)
    out = run_sweep(sweep, workers=workers)
    out["manifest"] = manifest("simulate", sweep.to_dict(), sweep.seed_base, [a.scenario])
    emit(out, a.out)
    return EXIT_OK


def cmd_generate(a) -> int:
    spec = load_scenario(a.scenario)
    if a.seed is not None:
        spec = spec.with_seed(a.seed)
    if a.n is not None:
        from dataclasses import replace

        spec = replace(spec, n=a.n)
    data = generate(spec)
    write_csv(data, a.csv)
    info = {"schema_version": "1", "rows": data.n, "dims": list(data.dims), "csv": str(a.csv),
            "csv_digest": file_digest(a.csv),
            "manifest": manifest("generate", spec.to_dict(), spec.seed, [a.scenario])}
    emit(info, a.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="wci", description="Wasserstein conditional independence testing")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("two-sample", help="test X independent of Y (z ignored)")
    t.add_argument("data", help="CSV with columns x1..,y1..[,z1..]")
    t.add_argument("--p", type=float, default=1.0)
    t.add_argument("--epsilon0", type=float, required=True)
    t.add_argument("--delta0", type=float)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out")
    _add_bound_params(t)
    _add_solver(t)
    t.set_defaults(func=cmd_two_sample)

    c = sub.add_parser("ci-test", help="test X independent of Y given Z by binning Z")
    c.add_argument("data")
    c.add_argument("--p", type=float, default=1.0)
    c.add_argument("--epsilon", type=float, required=True)
    c.add_argument("--delta", type=float)
    c.add_argument("--Lx", type=float)
    c.add_argument("--Ly", type=float)
    c.add_argument("--Lxy", type=float)
    c.add_argument("--estimate-lipschitz", action="store_true")
    c.add_argument("--bootstrap-cells", type=int, default=4, help="cells per axis of the bootstrap grid")
    c.add_argument("--min-bin-samples", type=int, default=30)
    c.add_argument("--padding", type=float, default=0.0)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    _add_bound_params(c)
    _add_solver(c)
    c.set_defaults(func=cmd_ci_test)

    b = sub.add_parser("bounds", help="tail bounds and sample-size calculators")
    bs = b.add_subparsers(dest="which", required=True, parser_class=_Parser)

    def calc(name, help_):
        q = bs.add_parser(name, help=help_)
        q.add_argument("--out")
        q.set_defaults(func=cmd_bounds)
        return q

    q = calc("concentration", "deviation bound for W_p^p(mu_n, mu)")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--t", type=float, required=True)
    q.add_argument("--p", type=float, default=1.0)
    q.add_argument("--D", type=float)
    q.add_argument("--Mq", "--moment", type=float, dest="Mq")
    q.add_argument("--q", type=float)
    q.add_argument("--eta", type=float)
    q = calc("eps-bar", "root eps_bar_n of the unit-square equation")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--p", type=float, default=1.0)
    q = calc("min-n-d3", "smallest n meeting the d >= 3 expectation budget")
    q.add_argument("--eps", type=float, required=True)
    q.add_argument("--p", type=float, default=1.0)
    q.add_argument("--d", type=int, required=True)
    q.add_argument("--q", type=float)
    q.add_argument("--kappa", type=float, default=B.DEFAULT_KAPPA)
    q.add_argument("--moment", type=float, required=True)
    q = calc("min-n-2d", "smallest n meeting the d = 2 expectation budget")
    q.add_argument("--eps", type=float, required=True)
    q.add_argument("--p", type=float, default=1.0)
    q = calc("c-pq", "truncation constant c_pq")
    q.add_argument("--p", type=float, required=True)
    q.add_argument("--q", type=float, required=True)
    q = calc("covering", "covering-number bound for the unit square")
    q.add_argument("--eps", type=float, required=True)
    q = calc("null-level", "threshold for a null level, or n for a threshold")
    q.add_argument("--D", type=float, required=True)
    q.add_argument("--p", type=float, default=1.0)
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--n", type=int)
    q.add_argument("--eps", type=float)

    s = sub.add_parser("simulate", help="Monte-Carlo sweep from a JSON description")
    s.add_argument("scenario")
    s.add_argument("--replications", type=int)
    s.add_argument("--seed", type=int, help="overrides seed_base")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    g = sub.add_parser("generate", help="write a synthetic dataset to CSV")
    g.add_argument("scenario")
    g.add_argument("csv")
    g.add_argument("--seed", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"wci: error: {e}\n")
        return EXIT_INPUT
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(message)s")
    try:
        return a.func(a)
    except InfeasibleError as e:
        sys.stderr.write(f"wci: infeasible: {e}\n")
        return EXIT_INFEASIBLE
    except (DataError, ScenarioError, ValueError, OSError) as e:
        sys.stderr.write(f"wci: error: {e}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
