"""Wasserstein two-sample test of X independent of Y.

The joint empirical law on one block of rows is compared with the product of
marginals built from two further blocks; the test rejects when the plug-in
distance reaches ``epsilon0``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bounds import Bound, BoundParams, pair_deviation_bound
from .measures import Dataset, split_for_independence
from .ot import SolverConfig, wasserstein


@dataclass(frozen=True)
class TwoSampleResult:
    distance: float
    epsilon0: float
    reject: bool
    n_per_side: int
    type1_bound: Bound
    type2_bound: Bound | None
    delta0: float | None
    method: str
    converged: bool = True

    def to_dict(self) -> dict:
        return {
            "distance": self.distance,
            "epsilon0": self.epsilon0,
            "reject": self.reject,
            "n_per_side": self.n_per_side,
            "type1_bound": self.type1_bound.to_dict(),
            "delta0": self.delta0,
            "type2_bound": None if self.type2_bound is None else self.type2_bound.to_dict(),
            "method": self.method,
            "converged": self.converged,
        }


def type1_bound(epsilon0: float, n: int, params: BoundParams | None, require_side_condition: bool = True) -> Bound:
    """P[reject] under independence: both empirical laws within epsilon0/2 of the common law."""
    return pair_deviation_bound(n, epsilon0, params, require_side_condition)


def type2_bound(delta0: float, n: int, params: BoundParams | None, require_side_condition: bool = True) -> Bound:
    """P[accept] when W_p(joint, product) >= epsilon0 + delta0.

    Acceptance forces one of the two empirical laws to stray by delta0/2, so
    the null-case chain applies with epsilon replaced by delta0.
    """
    return pair_deviation_bound(n, delta0, params, require_side_condition)


def run_two_sample(
    data: Dataset,
    p: float,
    epsilon0: float,
    seed: int | None,
    solver: SolverConfig | None = None,
    params: BoundParams | None = None,
    delta0: float | None = None,
    require_side_condition: bool = True,
) -> TwoSampleResult:
    """Split ``data`` three ways (z ignored), compute W_p(joint, product), decide."""
    if not epsilon0 > 0:
        raise ValueError("epsilon0 must be > 0")
    split = split_for_independence(data, seed)
    res = wasserstein(split.joint, split.product, p, solver)
    if params is not None:
        params = params.with_dim(split.joint.dim)
        if params.p != p:
            raise ValueError("BoundParams.p differs from the test's p")
    t1 = type1_bound(epsilon0, split.k, params, require_side_condition)
    t2 = None if delta0 is None else type2_bound(delta0, split.k, params, require_side_condition)
    return TwoSampleResult(
        distance=res.distance,
        epsilon0=epsilon0,
        reject=bool(res.distance >= epsilon0),
        n_per_side=split.k,
        type1_bound=t1,
        type2_bound=t2,
        delta0=delta0,
        method=res.method,
        converged=res.converged,
    )
