"""Seeded synthetic datasets for validating the tests.

Scenarios:

* ``additive_null``: X = f(Z) + E1, Y = g(Z) + E2 with independent noises, so
  X and Y are conditionally independent given Z.
* ``shared_noise_alt``: Y = g(Z) + rho E1 + sqrt(1 - rho^2) E2, conditionally
  dependent for rho > 0.
* ``polar``: X and Y on the circle of radius Z with angles drifting in Z.
* ``custom``: additive construction that is a null when rho = 0 and the
  shared-noise alternative otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from .measures import Dataset, DiscreteMeasure, empirical_measure, product_measure
from .ot import wasserstein_exact

NoiseKind = Literal["truncated_gaussian", "uniform", "two_point", "gaussian", "none"]
BOUNDED_NOISE = {"truncated_gaussian", "uniform", "two_point", "none"}


class ScenarioError(ValueError):
    """Invalid scenario description."""


@dataclass(frozen=True)
class FunctionSpec:
    """f(z) = slope @ z + intercept, or piecewise-linear interpolation in 1-D z.

    ``slope`` is a scalar (applied to every output coordinate as
    ``slope * sum(z)``) or a (d_out, d_Z) matrix.
    """

    kind: Literal["affine", "tabulated"] = "affine"
    slope: float | list = 0.0
    intercept: float | list = 0.0
    knots: tuple[float, ...] = ()
    values: tuple = ()

    def __call__(self, z: np.ndarray, d_out: int) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.kind == "affine":
            A = np.asarray(self.slope, dtype=float)
            if A.ndim == 0:
                A = np.full((d_out, z.shape[1]), float(A))
            if A.shape != (d_out, z.shape[1]):
                raise ScenarioError(f"slope shape {A.shape} != ({d_out}, {z.shape[1]})")
            b = np.broadcast_to(np.asarray(self.intercept, dtype=float), (d_out,))
            return z @ A.T + b
        if self.kind == "tabulated":
            if z.shape[1] != 1:
                raise ScenarioError("tabulated functions need d_Z = 1")
            knots = np.asarray(self.knots, dtype=float)
            vals = np.asarray(self.values, dtype=float)
            if vals.ndim == 1:
                vals = np.repeat(vals[:, None], d_out, axis=1)
            if knots.ndim != 1 or knots.size < 2 or vals.shape != (knots.size, d_out):
                raise ScenarioError("tabulated function needs >= 2 knots and matching values")
            if np.any(np.diff(knots) <= 0):
                raise ScenarioError("knots must increase")
            return np.column_stack([np.interp(z[:, 0], knots, vals[:, k]) for k in range(d_out)])
        raise ScenarioError(f"unknown function kind {self.kind!r}")

    def to_dict(self) -> dict:
        if self.kind == "affine":
            return {"kind": "affine", "slope": self.slope, "intercept": self.intercept}
        return {"kind": "tabulated", "knots": list(self.knots), "values": list(self.values)}


@dataclass(frozen=True)
class NoiseSpec:
    """Noise law per sample vector.

    ``truncated_gaussian``: N(0, sigma^2 I) conditioned on |e| <= radius.
    ``uniform``: independent uniform(-a, a) coordinates.
    ``two_point``: independent +-a coordinates with probability 1/2 each.
    ``gaussian``: N(0, sigma^2 I), unbounded.
    """

    kind: NoiseKind = "truncated_gaussian"
    sigma: float = 0.1
    radius: float = 0.3
    a: float = 0.5

    def __post_init__(self):
        if self.kind not in ("truncated_gaussian", "uniform", "two_point", "gaussian", "none"):
            raise ScenarioError(f"unknown noise kind {self.kind!r}")
        if self.kind in ("truncated_gaussian", "gaussian") and not self.sigma > 0:
            raise ScenarioError("sigma must be > 0")
        if self.kind == "truncated_gaussian" and not self.radius > 0:
            raise ScenarioError("radius must be > 0")
        if self.kind in ("uniform", "two_point") and not self.a >= 0:
            raise ScenarioError("a must be >= 0")

    @property
    def bounded(self) -> bool:
        return self.kind in BOUNDED_NOISE

    def support_radius(self, d: int) -> float:
        """Radius of a ball around 0 containing the noise support."""
        if self.kind == "truncated_gaussian":
            return self.radius
        if self.kind in ("uniform", "two_point"):
            return self.a * math.sqrt(d)
        if self.kind == "none":
            return 0.0
        return math.inf

    def sample(self, rng: np.random.Generator, n: int, d: int) -> np.ndarray:
        if self.kind == "none":
            return np.zeros((n, d))
        if self.kind == "gaussian":
            return rng.normal(0.0, self.sigma, (n, d))
        if self.kind == "uniform":
            return rng.uniform(-self.a, self.a, (n, d))
        if self.kind == "two_point":
            return self.a * (2.0 * rng.integers(0, 2, (n, d)) - 1.0)
        out = np.empty((n, d))
        todo = np.arange(n)
        while todo.size:
            draw = rng.normal(0.0, self.sigma, (todo.size, d))
            ok = np.linalg.norm(draw, axis=1) <= self.radius
            out[todo[ok]] = draw[ok]
            todo = todo[~ok]
        return out

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sigma": self.sigma, "radius": self.radius, "a": self.a}


@dataclass(frozen=True)
class ScenarioSpec:
    kind: Literal["additive_null", "shared_noise_alt", "polar", "custom"]
    n: int
    seed: int = 0
    dims: tuple[int, int, int] = (1, 1, 1)
    f: FunctionSpec = field(default_factory=FunctionSpec)
    g: FunctionSpec = field(default_factory=FunctionSpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    rho: float = 0.0
    z_low: float = 0.0
    z_high: float = 1.0
    bounded: bool = True
    # polar scenario
    r_min: float = 1.0
    r_max: float = 2.0
    angle_base: tuple[float, float] = (0.0, 0.0)
    angle_slope: tuple[float, float] = (0.0, 0.0)
    angle_spread: float = 0.0

    def __post_init__(self):
        if self.kind not in ("additive_null", "shared_noise_alt", "polar", "custom"):
            raise ScenarioError(f"unknown scenario kind {self.kind!r}")
        if self.n < 1:
            raise ScenarioError("n must be >= 1")
        if len(self.dims) != 3 or min(self.dims) < 1:
            raise ScenarioError("dims must be three positive integers")
        object.__setattr__(self, "dims", tuple(int(v) for v in self.dims))
        if not 0.0 <= self.rho <= 1.0:
            raise ScenarioError("rho must lie in [0, 1]")
        if not self.z_high >= self.z_low:
            raise ScenarioError("z_high must be >= z_low")
        if self.bounded and not self.noise.bounded:
            raise ScenarioError("unbounded noise requested with bounded support")

    def with_seed(self, seed: int) -> ScenarioSpec:
        from dataclasses import replace

        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "n": self.n,
            "seed": self.seed,
            "dims": list(self.dims),
            "f": self.f.to_dict(),
            "g": self.g.to_dict(),
            "noise": self.noise.to_dict(),
            "rho": self.rho,
            "z_low": self.z_low,
            "z_high": self.z_high,
            "bounded": self.bounded,
        }
        if self.kind == "polar":
            d.update(
                r_min=self.r_min, r_max=self.r_max, angle_base=list(self.angle_base),
                angle_slope=list(self.angle_slope), angle_spread=self.angle_spread,
            )
        return d


def _function_from(obj) -> FunctionSpec:
    if obj is None:
        return FunctionSpec()
    if not isinstance(obj, dict):
        raise ScenarioError("function descriptor must be an object")
    kind = obj.get("kind", "affine")
    if kind == "affine":
        return FunctionSpec("affine", obj.get("slope", 0.0), obj.get("intercept", 0.0))
    if kind == "tabulated":
        return FunctionSpec("tabulated", knots=tuple(obj["knots"]), values=tuple(obj["values"]))
    raise ScenarioError(f"unknown function kind {kind!r}")


_SCENARIO_KEYS = {
    "kind", "n", "seed", "dims", "f", "g", "noise", "rho", "z_low", "z_high", "bounded",
    "r_min", "r_max", "angle_base", "angle_slope", "angle_spread",
}


def scenario_from_dict(obj: dict) -> ScenarioSpec:
    if not isinstance(obj, dict):
        raise ScenarioError("scenario must be a JSON object")
    extra = set(obj) - _SCENARIO_KEYS
    if extra:
        raise ScenarioError(f"unknown scenario keys: {sorted(extra)}")
    for key in ("kind", "n"):
        if key not in obj:
            raise ScenarioError(f"scenario missing {key!r}")
    try:
        noise = NoiseSpec(**obj.get("noise", {}))
        kw = {k: obj[k] for k in obj if k not in ("f", "g", "noise", "dims", "angle_base", "angle_slope")}
        for k in ("angle_base", "angle_slope"):
            if k in obj:
                kw[k] = tuple(obj[k])
        return ScenarioSpec(
            dims=tuple(obj.get("dims", (1, 1, 1))),
            f=_function_from(obj.get("f")),
            g=_function_from(obj.get("g")),
            noise=noise,
            **kw,
        )
    except (TypeError, KeyError) as e:
        raise ScenarioError(f"bad scenario: {e}") from None


def load_scenario(path) -> ScenarioSpec:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ScenarioError(f"scenario is not valid JSON: {e}") from None
    return scenario_from_dict(obj)


def _draw_z(spec: ScenarioSpec, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(spec.z_low, spec.z_high, (spec.n, spec.dims[2]))


def _additive(spec: ScenarioSpec, rho: float) -> Dataset:
    rng = np.random.default_rng(spec.seed)
    dx, dy, _ = spec.dims
    z = _draw_z(spec, rng)
    e1 = spec.noise.sample(rng, spec.n, dx)
    e2 = spec.noise.sample(rng, spec.n, dy)
    x = spec.f(z, dx) + e1
    if rho > 0:
        if dx != dy:
            raise ScenarioError("shared noise needs d_X = d_Y")
        y = spec.g(z, dy) + rho * e1 + math.sqrt(1.0 - rho * rho) * e2
    else:
        y = spec.g(z, dy) + e2
    return Dataset(x, y, z)


def gen_additive_null(spec: ScenarioSpec) -> Dataset:
    """X = f(Z) + E1, Y = g(Z) + E2 with Z uniform on [z_low, z_high]^d_Z."""
    if spec.kind not in ("additive_null", "custom"):
        raise ScenarioError("gen_additive_null needs kind additive_null")
    return _additive(spec, 0.0)


def gen_shared_noise_alt(spec: ScenarioSpec) -> Dataset:
    """Y reuses X's noise: Y = g(Z) + rho E1 + sqrt(1 - rho^2) E2."""
    if spec.rho == 0:
        raise ScenarioError("use gen_additive_null")
    return _additive(spec, spec.rho)


def gen_polar(spec: ScenarioSpec) -> Dataset:
    """Z uniform on [r_min, r_max]; X, Y on the circle of radius Z.

    Angles are ``base_k + slope_k * Z + spread * U_k`` with U_k uniform on
    (-pi, pi). With ``rho = 1`` both angles share U_1; otherwise U_2 is
    drawn with probability 1 - rho and U_1 reused with probability rho.
    """
    if spec.r_min <= 0:
        raise ScenarioError("r_min must be > 0")
    if spec.r_max < spec.r_min:
        raise ScenarioError("r_max must be >= r_min")
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    r = rng.uniform(spec.r_min, spec.r_max, n)
    u1 = rng.uniform(-math.pi, math.pi, n)
    u2 = rng.uniform(-math.pi, math.pi, n)
    share = rng.random(n) < spec.rho
    u2 = np.where(share, u1, u2)
    t1 = spec.angle_base[0] + spec.angle_slope[0] * r + spec.angle_spread * u1
    t2 = spec.angle_base[1] + spec.angle_slope[1] * r + spec.angle_spread * u2
    x = np.column_stack([r * np.cos(t1), r * np.sin(t1)])
    y = np.column_stack([r * np.cos(t2), r * np.sin(t2)])
    return Dataset(x, y, r[:, None])


def generate(spec: ScenarioSpec) -> Dataset:
    if spec.kind == "additive_null":
        return gen_additive_null(spec)
    if spec.kind == "shared_noise_alt":
        return gen_shared_noise_alt(spec)
    if spec.kind == "polar":
        return gen_polar(spec)
    return _additive(spec, spec.rho)


def support_diameter(spec: ScenarioSpec) -> float:
    """Diameter bound of the support of (X, Y) given Z in any subset of the box.

    Uses the whole box, so it also bounds every per-bin conditional support.
    """
    dx, dy, dz = spec.dims
    if spec.kind == "polar":
        return 2.0 * math.sqrt(2.0) * spec.r_max
    corners = np.array(np.meshgrid(*[[spec.z_low, spec.z_high]] * dz)).reshape(dz, -1).T
    span = []
    for fn, d in ((spec.f, dx), (spec.g, dy)):
        if fn.kind == "affine":
            vals = fn(corners, d)
        else:
            vals = np.asarray(fn.values, dtype=float)
            vals = vals[:, None] if vals.ndim == 1 else vals
        span.append(np.linalg.norm(vals.max(axis=0) - vals.min(axis=0)))
    r = spec.noise.support_radius
    rho = spec.rho if spec.kind != "additive_null" else 0.0
    ry = (rho + math.sqrt(1 - rho * rho)) * r(dy) if rho > 0 else r(dy)
    return float(math.hypot(span[0] + 2 * r(dx), span[1] + 2 * ry))


@dataclass(frozen=True)
class Separation:
    z: tuple[float, ...]
    value: float
    method: Literal["population", "monte_carlo"]
    n_ref: int


def _two_point_atoms(a: float, d: int) -> np.ndarray:
    grids = np.meshgrid(*[[-a, a]] * d, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def conditional_separation(
    spec: ScenarioSpec,
    z,
    p: float = 1.0,
    n_ref: int = 1000,
    seed: int = 0,
) -> Separation:
    """W_p(L_(X,Y)|Z=z, L_X|Z=z x L_Y|Z=z) for the additive constructions.

    Two-point noise has finitely many atoms, so the population laws are built
    exactly. Other noises use ``n_ref`` conditional draws for the joint and an
    independent pair of draws for the product, solved exactly; the result is
    a Monte-Carlo estimate with positive bias of order n_ref^(-1/d).
    """
    if spec.kind == "polar":
        raise ScenarioError("separation oracle supports the additive constructions")
    dx, dy, dz = spec.dims
    zz = np.atleast_2d(np.asarray(z, dtype=float))
    if zz.shape != (1, dz):
        raise ScenarioError("z must be one point in R^d_Z")
    fx = spec.f(zz, dx)[0]
    gy = spec.g(zz, dy)[0]
    rho = 0.0 if spec.kind == "additive_null" else spec.rho
    s = math.sqrt(1.0 - rho * rho)
    if spec.noise.kind in ("two_point", "none"):
        a = spec.noise.a if spec.noise.kind == "two_point" else 0.0
        e1 = _two_point_atoms(a, dx)
        e2 = _two_point_atoms(a, dy)
        i, j = np.meshgrid(np.arange(len(e1)), np.arange(len(e2)), indexing="ij")
        i, j = i.ravel(), j.ravel()
        xs = fx + e1[i]
        ys = gy + (rho * e1[i] if rho > 0 else 0.0) + s * e2[j]
        joint = empirical_measure(np.hstack([xs, ys]))
        prod = product_measure(empirical_measure(xs), empirical_measure(ys))
        val = wasserstein_exact(joint, prod, p, keep_plan=False).distance
        return Separation(tuple(zz[0]), val, "population", len(xs))
    rng = np.random.default_rng(seed)

    def draw(m):
        e1 = spec.noise.sample(rng, m, dx)
        e2 = spec.noise.sample(rng, m, dy)
        y = gy + (rho * e1 if rho > 0 else 0.0) + s * e2
        return fx + e1, y

    x1, y1 = draw(n_ref)
    x2, _ = draw(n_ref)
    _, y3 = draw(n_ref)
    joint = empirical_measure(np.hstack([x1, y1]))
    prod = empirical_measure(np.hstack([x2, y3]))
    val = wasserstein_exact(joint, prod, p, keep_plan=False).distance
    return Separation(tuple(zz[0]), val, "monte_carlo", n_ref)
