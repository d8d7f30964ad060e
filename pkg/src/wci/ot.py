"""p-Wasserstein distances between discrete measures.

Three routes:

* ``wasserstein_exact``: the transportation LP. Uniform equal-size pairs are
  solved as an assignment problem (Birkhoff: some optimal plan is a
  permutation); everything else goes to the HiGHS dual simplex.
* ``wasserstein_1d`` / ``wasserstein_1d_quantile``: closed forms on the line.
* ``wasserstein_entropic``: Sinkhorn scaling followed by a marginal-fixing
  rounding, so the reported cost is that of a feasible plan (an upper bound
  on the exact cost).

Costs are ``|x - y|^p`` with the Euclidean norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment, linprog
from scipy.spatial.distance import cdist

from .measures import DiscreteMeasure, mixture

PLAN_TOL = 1e-9

Method = Literal["exact", "oneD", "entropic"]


@dataclass(frozen=True)
class TransportPlan:
    mass: np.ndarray

    @property
    def rows(self) -> int:
        return self.mass.shape[0]

    @property
    def cols(self) -> int:
        return self.mass.shape[1]

    def marginal_error(self, mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
        r = np.abs(self.mass.sum(axis=1) - mu.weights).max()
        c = np.abs(self.mass.sum(axis=0) - nu.weights).max()
        return float(max(r, c))

    def is_feasible(self, mu: DiscreteMeasure, nu: DiscreteMeasure, tol: float = PLAN_TOL) -> bool:
        return bool(self.mass.min() >= 0 and self.marginal_error(mu, nu) <= tol)


@dataclass(frozen=True)
class OTResult:
    """``distance = cost ** (1/p)``. ``plan`` is None when it was not requested."""

    distance: float
    cost: float
    plan: TransportPlan | None
    method: Method
    p: float
    converged: bool = True
    iterations: int = 0


@dataclass(frozen=True)
class SolverConfig:
    """Routing for ``wasserstein``.

    ``method="auto"`` uses the exact solver while both measures have at most
    ``exact_cutoff`` atoms and Sinkhorn above. Pairs that are not uniform and
    equal-size need the general LP, which is far slower than the assignment
    route; ``auto`` sends those to Sinkhorn once either side exceeds
    ``lp_cutoff`` atoms. ``reg`` is multiplied by the largest cost entry when
    ``relative_reg`` is set.
    """

    method: Literal["auto", "exact", "entropic"] = "auto"
    exact_cutoff: int = 512
    lp_cutoff: int = 256
    reg: float = 0.005
    relative_reg: bool = True
    tol: float = 1e-9
    max_iter: int = 20000

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "exact_cutoff": self.exact_cutoff,
            "lp_cutoff": self.lp_cutoff,
            "reg": self.reg,
            "relative_reg": self.relative_reg,
            "tol": self.tol,
            "max_iter": self.max_iter,
        }


def _check_pair(mu: DiscreteMeasure, nu: DiscreteMeasure, p: float) -> None:
    if mu.dim != nu.dim:
        raise ValueError(f"dimension mismatch: {mu.dim} vs {nu.dim}")
    if not (p >= 1 and math.isfinite(p)):
        raise ValueError("p must be >= 1")


def cost_matrix(mu: DiscreteMeasure, nu: DiscreteMeasure, p: float) -> np.ndarray:
    d = cdist(mu.points, nu.points)
    return d if p == 1 else d**p


def _result(cost: float, plan, method: Method, p: float, **kw) -> OTResult:
    cost = max(float(cost), 0.0)
    return OTResult(cost ** (1.0 / p), cost, plan, method, p, **kw)


def _assignment(C: np.ndarray, keep_plan: bool):
    k = C.shape[0]
    r, c = linear_sum_assignment(C)
    cost = C[r, c].sum() / k
    plan = None
    if keep_plan:
        mass = np.zeros_like(C)
        mass[r, c] = 1.0 / k
        plan = TransportPlan(mass)
    return cost, plan


def _transport_lp(C: np.ndarray, a: np.ndarray, b: np.ndarray):
    m, n = C.shape
    rows = sparse.kron(sparse.eye(m), np.ones((1, n)))
    cols = sparse.kron(np.ones((1, m)), sparse.eye(n))
    A = sparse.vstack([rows, cols]).tocsr()
    # one constraint is redundant; drop the last column-sum row
    A = A[:-1]
    rhs = np.concatenate([a, b])[:-1]
    res = linprog(
        C.ravel(),
        A_eq=A,
        b_eq=rhs,
        bounds=(0, None),
        method="highs-ds",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    mass = np.clip(res.x.reshape(m, n), 0.0, None)
    return float((C * mass).sum()), TransportPlan(mass)


def wasserstein_exact(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    p: float = 1.0,
    *,
    use_assignment: bool = True,
    keep_plan: bool = True,
) -> OTResult:
    """Globally optimal W_p via the transportation LP."""
    _check_pair(mu, nu, p)
    C = cost_matrix(mu, nu, p)
    if use_assignment and mu.size == nu.size and mu.is_uniform and nu.is_uniform:
        cost, plan = _assignment(C, keep_plan)
    else:
        cost, plan = _transport_lp(C, mu.weights, nu.weights)
        if not keep_plan:
            plan = None
    return _result(cost, plan, "exact", p)


def wasserstein_1d(mu: DiscreteMeasure, nu: DiscreteMeasure, p: float = 1.0) -> float:
    """Sorted-pair formula for uniform equal-size measures on the line."""
    _check_pair(mu, nu, p)
    if mu.dim != 1:
        raise ValueError("wasserstein_1d needs one-dimensional measures")
    if mu.size != nu.size or not (mu.is_uniform and nu.is_uniform):
        raise ValueError("unsupported in 1-D fast path")
    xs = np.sort(mu.points[:, 0])
    ys = np.sort(nu.points[:, 0])
    return float(np.mean(np.abs(xs - ys) ** p) ** (1.0 / p))


def wasserstein_1d_quantile(mu: DiscreteMeasure, nu: DiscreteMeasure, p: float = 1.0) -> float:
    """W_p on the line for arbitrary weights: integrate |F^-1 - G^-1|^p over (0, 1)."""
    _check_pair(mu, nu, p)
    if mu.dim != 1:
        raise ValueError("wasserstein_1d_quantile needs one-dimensional measures")
    ix = np.argsort(mu.points[:, 0], kind="stable")
    iy = np.argsort(nu.points[:, 0], kind="stable")
    xs, wx = mu.points[ix, 0], mu.weights[ix]
    ys, wy = nu.points[iy, 0], nu.weights[iy]
    cx = np.cumsum(wx)
    cy = np.cumsum(wy)
    cx[-1] = cy[-1] = 1.0
    levels = np.union1d(cx, cy)
    dt = np.diff(np.concatenate([[0.0], levels]))
    mids = levels - dt / 2
    qx = xs[np.minimum(np.searchsorted(cx, mids), len(xs) - 1)]
    qy = ys[np.minimum(np.searchsorted(cy, mids), len(ys) - 1)]
    return float(np.dot(dt, np.abs(qx - qy) ** p) ** (1.0 / p))


def _lse(A: np.ndarray, axis: int) -> np.ndarray:
    m = A.max(axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    return (np.log(np.exp(A - m).sum(axis=axis, keepdims=True)) + m).squeeze(axis)


def _round_to_feasible(F: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Project a positive matrix onto the transport polytope of (a, b)."""
    row = F.sum(axis=1)
    x = np.minimum(a / np.where(row > 0, row, 1.0), 1.0)
    F = F * x[:, None]
    col = F.sum(axis=0)
    y = np.minimum(b / np.where(col > 0, col, 1.0), 1.0)
    F = F * y[None, :]
    # both are nonnegative in exact arithmetic; clip rounding noise
    err_a = np.clip(a - F.sum(axis=1), 0.0, None)
    err_b = np.clip(b - F.sum(axis=0), 0.0, None)
    total = err_a.sum()
    if total > 0:
        F = F + np.outer(err_a, err_b) / total
    return F


def wasserstein_entropic(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    p: float = 1.0,
    reg: float = 0.05,
    tol: float = 1e-9,
    max_iter: int = 20000,
    *,
    keep_plan: bool = True,
) -> OTResult:
    """Sinkhorn on the kernel exp(-C/reg), then rounding to an exact coupling.

    Stops when the largest row/column marginal violation is at most ``tol``.
    ``converged`` is False when ``max_iter`` was reached first.
    """
    _check_pair(mu, nu, p)
    if reg <= 0 or tol <= 0:
        raise ValueError("reg and tol must be positive")
    a, b = mu.weights, nu.weights
    C = cost_matrix(mu, nu, p)
    converged = False
    it = 0
    if C.max() / reg < 500:
        K = np.exp(-C / reg)
        u = np.ones_like(a)
        v = np.ones_like(b)
        for it in range(1, max_iter + 1):
            v = b / (K.T @ u)
            Kv = K @ v
            if it % 10 == 0 or it == 1:
                if np.abs(u * Kv - a).max() <= tol:
                    converged = True
                    break
            u = a / Kv
        F = u[:, None] * K * v[None, :]
    else:
        loga, logb = np.log(a), np.log(b)
        f = np.zeros_like(a)
        g = np.zeros_like(b)
        M = -C / reg
        for it in range(1, max_iter + 1):
            g = logb - _lse(M + f[:, None], 0)
            lse_rows = _lse(M + g[None, :], 1)
            if it % 10 == 0 or it == 1:
                if np.abs(np.exp(f + lse_rows) - a).max() <= tol:
                    converged = True
                    break
            f = loga - lse_rows
        F = np.exp(M + f[:, None] + g[None, :])
    P = _round_to_feasible(F, a, b)
    cost = float((C * P).sum())
    return _result(
        cost,
        TransportPlan(P) if keep_plan else None,
        "entropic",
        p,
        converged=converged,
        iterations=it,
    )


def wasserstein(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    p: float = 1.0,
    solver: SolverConfig | None = None,
    *,
    keep_plan: bool = False,
) -> OTResult:
    """Route a W_p computation according to ``solver``.

    One-dimensional inputs always use the quantile closed form (exact).
    """
    solver = solver or SolverConfig()
    _check_pair(mu, nu, p)
    if mu.dim == 1 and solver.method != "entropic":
        d = wasserstein_1d_quantile(mu, nu, p)
        return OTResult(d, d**p, None, "oneD", p)
    size = max(mu.size, nu.size)
    assignable = mu.size == nu.size and mu.is_uniform and nu.is_uniform
    big = size > solver.exact_cutoff or (not assignable and size > solver.lp_cutoff)
    if solver.method == "entropic" or (solver.method == "auto" and big):
        reg = solver.reg
        if solver.relative_reg:
            cmax = float(cdist(mu.points, nu.points).max()) ** p
            reg = reg * (cmax if cmax > 0 else 1.0)
        return wasserstein_entropic(
            mu, nu, p, reg, solver.tol, solver.max_iter, keep_plan=keep_plan
        )
    return wasserstein_exact(mu, nu, p, keep_plan=keep_plan)


def mixture_bound_gap(
    components: Sequence[DiscreteMeasure],
    lam,
    reference: DiscreteMeasure,
    p: float = 1.0,
) -> tuple[float, float]:
    """Both sides of W_p^p(sum_z lam_z mu_z, nu) <= sum_z lam_z W_p^p(mu_z, nu).

    Returns ``(lhs, rhs)`` computed with the exact solver.
    """
    for c in components:
        if c.dim != reference.dim:
            raise ValueError("dimension mismatch")
    mix = mixture(components, lam)
    lhs = wasserstein_exact(mix, reference, p, keep_plan=False).cost
    rhs = float(
        sum(l * wasserstein_exact(c, reference, p, keep_plan=False).cost for l, c in zip(lam, components))
    )
    return lhs, rhs
