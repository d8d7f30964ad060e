"""Finite-sample tail bounds and sample-size calculators for empirical W_p.

Every probability-valued function clamps to [0, 1]. Constants that the theory
leaves implicit (the expectation-bound constant ``kappa``) are configuration,
and any bound derived from them is conditional on the supplied value.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

log = logging.getLogger(__name__)

DEFAULT_KAPPA = 1.0


def _clamp(x: float) -> float:
    if math.isnan(x):
        return 1.0
    return min(1.0, max(0.0, x))


@dataclass(frozen=True)
class BoundParams:
    """Constants feeding the bounds.

    Parameters
    ----------
    p : order of the Wasserstein distance.
    q : higher moment order (> p) for moment-based bounds.
    d : ambient dimension of the measure (d_X + d_Y for independence tests).
    D : diameter of a set containing the support (bounded case).
    Mq : bound on (E|X|^q)^(1/q).
    eta : truncation level in (0, 1) for the unbounded concentration bound.
    kappa : expectation-bound constant for d >= 3. The 1.0 default is a
        placeholder; guarantees computed from it are only as good as it is.
    """

    p: float = 1.0
    q: float | None = None
    d: int | None = None
    D: float | None = None
    Mq: float | None = None
    eta: float | None = None
    kappa: float = DEFAULT_KAPPA

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError("p must be >= 1")
        if self.q is not None and not self.q > self.p:
            raise ValueError("requires q > p")
        if self.d is not None and self.d < 1:
            raise ValueError("d must be >= 1")
        if self.D is not None and not self.D > 0:
            raise ValueError("D must be > 0")
        if self.Mq is not None and not self.Mq > 0:
            raise ValueError("Mq must be > 0")
        if self.eta is not None and not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if not self.kappa > 0:
            raise ValueError("kappa must be > 0")

    @property
    def kappa_is_default(self) -> bool:
        return self.kappa == DEFAULT_KAPPA

    def with_dim(self, d: int) -> BoundParams:
        return self if self.d is not None else replace(self, d=d)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("p", "q", "d", "D", "Mq", "eta", "kappa")}


# --- concentration ---------------------------------------------------------


def concentration_bounded(n: int, t: float, D: float, p: float) -> float:
    """McDiarmid tail: P[W_p^p(mu, mu_n) >= E + t] <= exp(-2 n t^2 / D^(2p))."""
    if n < 1 or t < 0 or not D > 0:
        raise ValueError("requires n >= 1, t >= 0, D > 0")
    return _clamp(math.exp(-2.0 * n * t * t / D ** (2 * p)))


def c_pq(p: float, q: float) -> float:
    """Tail-truncation constant 2^(1/q) r/(r-1) + s/(s-1), r = 2^(1/p-1/q), s = 2^(1/p)."""
    if not q > p:
        raise ValueError("requires q > p")
    if not p >= 1:
        raise ValueError("requires p >= 1")
    r = 2.0 ** (1.0 / p - 1.0 / q)
    s = 2.0 ** (1.0 / p)
    return 2.0 ** (1.0 / q) * r / (r - 1.0) + s / (s - 1.0)


def _require(params: BoundParams, *names: str) -> None:
    missing = [n for n in names if getattr(params, n) is None]
    if missing:
        raise ValueError(f"BoundParams missing {', '.join(missing)}")


def concentration_unbounded(n: int, t: float, params: BoundParams) -> float:
    """Deviation bound for measures with a q-th moment bound (Combes-McDiarmid).

    ``1 - (1-eta)^n + exp(-2 n (t - (1-(1-eta)^n) R^p)_+^2 / R^(2p))`` with
    truncation radius ``R = Mq * eta^(-1/q)``. The centring term (conditional
    expectation plus truncation bias) is not included; see
    ``corollary_tail_d3`` for a closed composition.
    """
    _require(params, "q", "Mq", "eta")
    if n < 1 or t < 0:
        raise ValueError("requires n >= 1 and t >= 0")
    p, eta = params.p, params.eta
    R = params.Mq * eta ** (-1.0 / params.q)
    miss = 1.0 - (1.0 - eta) ** n
    slack = max(t - miss * R**p, 0.0)
    return _clamp(miss + math.exp(-2.0 * n * slack * slack / R ** (2 * p)))


# --- expectation bounds ----------------------------------------------------


def check_d3_range(params: BoundParams) -> None:
    """Parameter ranges of the d >= 3 expectation bound; q is checked when given."""
    _require(params, "d")
    p, q, d = params.p, params.q, params.d
    if d < 3:
        raise ValueError("requires d >= 3")
    if not (1 <= p < d / 2):
        raise ValueError("requires 1 <= p < d/2")
    if q is not None and not q > d * p / (d - p):
        raise ValueError("requires q > d*p/(d-p)")


def expectation_bound_d3(n: int, params: BoundParams, moment: float) -> float:
    """E[W_p^p(mu_n, mu)]^(1/p) <= kappa * moment * n^(-1/d) for d >= 3."""
    check_d3_range(params)
    if n < 1:
        raise ValueError("requires n >= 1")
    return params.kappa * moment * n ** (-1.0 / params.d)


def covering_number_unit_square(eps: float) -> float:
    """Upper bound on the eps-covering number of [0, 1]^2."""
    if not eps > 0:
        raise ValueError("requires eps > 0")
    return 2.0 * math.sqrt(3.0) / (9.0 * eps * eps) + 8.0 / (math.pi * eps) + 16.0


_A = 2.0 * math.sqrt(3.0) / 9.0
_B = 8.0 / math.pi
_C = 16.0


def eps_bar_residual(eps: float, n: int, p: float) -> float:
    return eps ** (2 * p + 2) - (_A + _B * eps + _C * eps * eps) / n


@dataclass(frozen=True)
class EpsBarSolve:
    n: int
    p: float
    eps_bar: float
    residual: float

    @property
    def m_n(self) -> float:
        """Bound on m_n given by n * eps_bar^(2p)."""
        return self.n * self.eps_bar ** (2 * self.p)


def solve_eps_bar(n: int, p: float = 1.0) -> EpsBarSolve:
    """Positive root of eps^(2p+2) = (2sqrt3/9 + 8 eps/pi + 16 eps^2) / n by bisection."""
    if n < 1:
        raise ValueError("requires n >= 1")
    if not p >= 1:
        raise ValueError("requires p >= 1")
    lo, hi = 0.0, 1.0
    while eps_bar_residual(hi, n, p) <= 0:
        lo, hi = hi, 2.0 * hi
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if eps_bar_residual(mid, n, p) > 0:
            hi = mid
        else:
            lo = mid
    root = min((lo, hi), key=lambda e: abs(eps_bar_residual(e, n, p)))
    if root == 0.0:
        root = hi
    return EpsBarSolve(n, p, root, eps_bar_residual(root, n, p))


def expectation_bound_2d(n: int, p: float = 1.0) -> float:
    """E[W_p^p(mu, mu_n)] <= (9^p + 3) eps_bar_n^p for mu on the unit square."""
    return (9.0**p + 3.0) * solve_eps_bar(n, p).eps_bar ** p


def two_sample_null_bound(n: int, eps: float, D: float, p: float) -> float:
    """P[W_p(mu_n, mu'_n) >= eps] <= 2 exp(-2 n eps^(2p) / (4^(p+1) D^(2p))).

    Valid once the expectation term is at most (eps/2)^p / 2; see
    ``pair_deviation_bound`` for the checked version.
    """
    if n < 1 or eps < 0 or not D > 0:
        raise ValueError("requires n >= 1, eps >= 0, D > 0")
    return _clamp(2.0 * math.exp(-2.0 * n * eps ** (2 * p) / (4.0 ** (p + 1) * D ** (2 * p))))


# --- sample-size calculators ----------------------------------------------


def _d3_log_threshold(eps: float, params: BoundParams, moment: float) -> float:
    # (kappa M n^(-1/d))^p <= (eps/4)^p / 2  <=>  log n >= d log(4 kappa M 2^(1/p) / eps)
    return params.d * (math.log(4.0 * params.kappa * moment / eps) + math.log(2.0) / params.p)


def d3_condition(n: int, eps: float, params: BoundParams, moment: float) -> bool:
    """Whether (kappa M n^(-1/d))^p <= (eps/4)^p / 2 holds (1e-12 log slack)."""
    return math.log(n) >= _d3_log_threshold(eps, params, moment) - 1e-12


def min_samples_d3(eps: float, params: BoundParams, moment: float) -> int:
    """Smallest n with (kappa * moment * n^(-1/d))^p <= (eps/4)^p / 2."""
    check_d3_range(params)
    if not eps > 0 or not moment > 0:
        raise ValueError("requires eps > 0 and moment > 0")
    n = max(1, math.ceil(math.exp(_d3_log_threshold(eps, params, moment))))
    while n > 1 and d3_condition(n - 1, eps, params, moment):
        n -= 1
    while not d3_condition(n, eps, params, moment):
        n += 1
    return n


def condition_2d(n: int, eps: float, p: float) -> bool:
    """Whether (9^p + 3) eps_bar_n^p <= (eps/4)^p / 2."""
    return expectation_bound_2d(n, p) <= 0.5 * (eps / 4.0) ** p


def min_samples_2d(eps: float, p: float = 1.0) -> int:
    """Smallest n with (9^p + 3) eps_bar_n^p <= (eps/4)^p / 2 (doubling, then bisection)."""
    if not eps > 0:
        raise ValueError("requires eps > 0")
    if condition_2d(1, eps, p):
        return 1
    lo, hi = 1, 2
    while not condition_2d(hi, eps, p):
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if condition_2d(mid, eps, p):
            hi = mid
        else:
            lo = mid
    return hi


def epsilon_for_level(n: int, D: float, p: float, alpha: float) -> float:
    """Smallest eps with two_sample_null_bound(n, eps, D, p) <= alpha."""
    if not 0 < alpha < 2:
        raise ValueError("requires 0 < alpha < 2")
    return (4.0 ** (p + 1) * D ** (2 * p) * math.log(2.0 / alpha) / (2.0 * n)) ** (1.0 / (2 * p))


def min_samples_null(eps: float, D: float, p: float, alpha: float) -> int:
    """Smallest n with two_sample_null_bound(n, eps, D, p) <= alpha."""
    if not eps > 0 or not 0 < alpha < 2:
        raise ValueError("requires eps > 0 and 0 < alpha < 2")
    n = max(1, math.ceil(4.0 ** (p + 1) * D ** (2 * p) * math.log(2.0 / alpha) / (2.0 * eps ** (2 * p))))
    while n > 1 and two_sample_null_bound(n - 1, eps, D, p) <= alpha:
        n -= 1
    while two_sample_null_bound(n, eps, D, p) > alpha:
        n += 1
    return n


# --- composed chains -------------------------------------------------------


def corollary_tail_d3(n: int, t: float, params: BoundParams) -> tuple[float, float]:
    """Unbounded-support tail with the expectation term closed by the d >= 3 bound.

    Returns ``(level, prob)`` with
    ``P[W_p^p(mu_n, mu) >= level + t] <= prob`` and
    ``level = (kappa Mq (1+eta)^(1/q) n^(-1/d) + c_pq Mq eta^(1/p-1/q))^p``.
    """
    check_d3_range(params)
    _require(params, "q", "Mq", "eta")
    p, q, M, eta = params.p, params.q, params.Mq, params.eta
    level = (
        params.kappa * M * (1 + eta) ** (1 / q) * n ** (-1.0 / params.d)
        + c_pq(p, q) * M * eta ** (1 / p - 1 / q)
    ) ** p
    return level, concentration_unbounded(n, t, params)


def expectation_term(n: int, params: BoundParams) -> tuple[float | None, str | None]:
    """Upper bound on E[W_p^p(mu_n, mu)] from whichever expectation bound applies.

    d >= 3 uses the moment bound (needs q, Mq, kappa); d == 2 uses the
    unit-square covering bound scaled to a square of side D (which contains
    any set of diameter D).
    """
    d, p = params.d, params.p
    if d is None:
        return None, "dimension d unknown"
    if d >= 3:
        if params.q is None or params.Mq is None:
            return None, "d >= 3 expectation bound needs q and Mq"
        try:
            check_d3_range(params)
        except ValueError as e:
            return None, str(e)
        return expectation_bound_d3(n, params, params.Mq) ** p, None
    if d == 2:
        if params.D is None:
            return None, "d = 2 expectation bound needs D"
        return params.D**p * expectation_bound_2d(n, p), None
    return None, "no expectation bound for d < 2"


@dataclass(frozen=True)
class Bound:
    """A probability bound, or the reason it could not be given."""

    value: float | None
    chain: str | None = None
    side_condition_met: bool | None = None
    reason: str | None = None
    notes: tuple[str, ...] = field(default=())

    @property
    def available(self) -> bool:
        return self.value is not None

    def to_dict(self) -> dict:
        return {
            "value": self.value if self.value is not None else "unavailable",
            "chain": self.chain,
            "side_condition_met": self.side_condition_met,
            "reason": self.reason,
            "notes": list(self.notes),
        }


UNAVAILABLE_NO_PARAMS = Bound(None, reason="no bound parameters supplied")


def pair_deviation_bound(
    n: int,
    eps: float,
    params: BoundParams | None,
    require_side_condition: bool = True,
) -> Bound:
    """Bound on P[W_p(mu_n, mu'_n) >= eps] for two independent n-samples of one law.

    Bounded chain (``D`` known): each side must deviate by eps/2; expectation
    term <= (eps/2)^p / 2 is the side condition, and the tail is
    ``two_sample_null_bound``. A failed side condition makes the bound
    unavailable unless ``require_side_condition`` is False, in which case the
    tail value is returned with ``side_condition_met=False``.

    Unbounded chain (``Mq``, ``q``, ``eta`` known, no ``D``, d >= 3): the
    moment corollary with threshold (eps/2)^p per side.
    """
    if params is None:
        return UNAVAILABLE_NO_PARAMS
    p = params.p
    notes = ()
    if eps <= 0:
        return Bound(1.0, "trivial", True, None)
    if params.D is not None:
        term, why = expectation_term(n, params)
        if term is not None and params.d is not None and params.d >= 3 and params.kappa_is_default:
            notes = ("kappa is the default placeholder 1.0; bound is conditional on it",)
        # same 1e-12 relative slack as the sample-size calculators
        met = term is not None and term <= 0.5 * (eps / 2.0) ** p * (1 + 1e-12)
        value = two_sample_null_bound(n, eps, params.D, p)
        if not met:
            reason = why or (
                f"expectation term {term:.6g} exceeds {(0.5 * (eps / 2.0) ** p):.6g}; n too small"
            )
            if require_side_condition:
                return Bound(None, "bounded", False, reason, notes)
            return Bound(value, "bounded", False, reason, notes)
        return Bound(value, "bounded", True, None, notes)
    if params.Mq is not None and params.eta is not None and params.q is not None:
        try:
            level, _ = corollary_tail_d3(n, 0.0, params)
        except ValueError as e:
            return Bound(None, "unbounded", False, str(e))
        if params.kappa_is_default:
            notes = ("kappa is the default placeholder 1.0; bound is conditional on it",)
        t = (eps / 2.0) ** p - level
        if t <= 0:
            return Bound(
                None, "unbounded", False,
                f"moment level {level:.6g} exceeds (eps/2)^p = {(eps / 2.0) ** p:.6g}", notes,
            )
        _, tail = corollary_tail_d3(n, t, params)
        return Bound(_clamp(2.0 * tail), "unbounded", True, None, notes)
    return Bound(None, reason="need D (bounded chain) or Mq, q, eta (unbounded chain)")
