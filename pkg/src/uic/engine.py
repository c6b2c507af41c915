"""Orbits, milestone schedules, the constant M_x and a-priori error bounds.

Given a map ``T`` with a certificate ``(k, N(x, y), N(x))`` the milestones of a
start point ``x`` are ``p_0 = 0`` and ``p_{n+1} = p_n + N(T^{p_n} x)``.  Along
them the distance to the limit ``alpha`` obeys

    rho(alpha, T^{p_n} x) <= k**n * M_x
    sup_{i >= p_n} rho(alpha, T^i x) <= 2 * k**n * M_x

where ``M_x`` is computed from the first ``N(x)`` iterates by
:func:`compute_Mx`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, EscapedDomain, IndexOverflow, UICError
from .metric import SpaceId, check_point, distance, interpolate

DEFAULT_BUDGET = 10 ** 6
CAUCHY_WINDOW = 10
TAIL_FRACTION = 0.25


def _everywhere(_point) -> bool:
    return True


@dataclass(frozen=True)
class MapHandle:
    """A self-map of one metric space.

    ``power(x, n)``, when given, must return ``T^n x`` without ``n``
    sequential evaluations; milestone schedules then skip ahead with it.
    """

    space: SpaceId
    eval: Callable
    domain_predicate: Callable = _everywhere
    power: Optional[Callable] = None
    name: str = "custom"

    def __call__(self, x):
        return self.eval(x)

    def apply(self, x, n: int):
        """``T^n x``, skipping ahead when a power function is available."""
        if n < 0:
            raise DomainError("iterate count must be nonnegative")
        if self.power is not None:
            return self.power(x, n)
        for _ in range(n):
            x = self.eval(x)
        return x

    def distance(self, a, b) -> float:
        return distance(self.space, a, b)


@dataclass
class Orbit:
    start: object
    iterates: list

    @property
    def length(self) -> int:
        return len(self.iterates)


class Status(enum.Enum):
    CONVERGED = "ConvergedToFixedPoint"
    BUDGET_EXHAUSTED = "BudgetExhausted"
    ESCAPED_DOMAIN = "EscapedDomain"
    LIMIT_OUTSIDE_DOMAIN = "LimitOutsideDomain"


@dataclass(frozen=True)
class ConvergenceVerdict:
    status: Status
    witness: object = None
    residual: Optional[float] = None
    remaining: Optional[float] = None
    steps: int = 0


@dataclass(frozen=True)
class MilestoneTrace:
    p: tuple
    milestone_points: tuple
    Mx: float
    k: float
    start: object = None


@dataclass(frozen=True)
class ErrorBoundRow:
    n: int
    p_n: int
    point: object
    bound_alpha: float
    bound_sup: float


def iterate(map: MapHandle, x0, n: int) -> Orbit:
    """The orbit ``[x0, T x0, ..., T^n x0]`` by sequential evaluation."""
    if n < 0:
        raise DomainError("iterate count must be nonnegative")
    check_point(map.space, x0)
    if not map.domain_predicate(x0):
        raise DomainError(f"start point {x0!r} is outside the map's domain")
    points = [x0]
    x = x0
    for step in range(1, n + 1):
        x = map.eval(x)
        if not map.domain_predicate(x):
            raise EscapedDomain(f"iterate {step} left the domain: {x!r}", step=step, point=x)
        points.append(x)
    return Orbit(x0, points)


def _positive_index(value, what: str) -> int:
    index = int(value)
    if index < 1 or index != value:
        raise UICError(f"{what} must be a positive integer, got {value!r}")
    return index


def compute_Mx(map: MapHandle, cert, x, budget: int = DEFAULT_BUDGET) -> float:
    """``max({rho(x, T^m x): 1 <= m < N(x)} U {rho(T^N x, x) / (1 - k)})``."""
    n_self = _positive_index(cert.self_index(x), "self index")
    if n_self > budget:
        raise IndexOverflow(f"self index {n_self} exceeds the iteration budget {budget}")
    best = 0.0
    y = x
    for _ in range(1, n_self):
        y = map.eval(y)
        best = max(best, map.distance(x, y))
    y = map.eval(y)
    return max(best, map.distance(y, x) / (1.0 - cert.k))


def milestones(map: MapHandle, cert, x0, count: int, budget: int = DEFAULT_BUDGET) -> MilestoneTrace:
    """Milestone indices ``p_0..p_count``, the points ``T^{p_n} x0`` and ``M_x``.

    Sequential maps count every evaluation against ``budget``; maps with a
    power function skip ahead and only the ``M_x`` computation is budgeted.
    """
    if count < 0:
        raise DomainError("milestone count must be nonnegative")
    check_point(map.space, x0)
    p = [0]
    points = [x0]
    x = x0
    for _ in range(count):
        gap = _positive_index(cert.self_index(x), "self index")
        if map.power is None:
            if p[-1] + gap > budget:
                raise IndexOverflow(f"milestone p={p[-1] + gap} exceeds the iteration budget {budget}")
            for _ in range(gap):
                x = map.eval(x)
        else:
            x = map.power(x, gap)
        p.append(p[-1] + gap)
        points.append(x)
    return MilestoneTrace(tuple(p), tuple(points), compute_Mx(map, cert, x0, budget), cert.k, x0)


def error_bounds(trace: MilestoneTrace) -> list:
    rows = []
    for n, (p_n, point) in enumerate(zip(trace.p, trace.milestone_points)):
        alpha = trace.k ** n * trace.Mx
        rows.append(ErrorBoundRow(n, p_n, point, alpha, 2.0 * alpha))
    return rows


# -- convergence diagnosis ---------------------------------------------------

def _extrapolate(space, tail) -> tuple:
    """Estimate the limit of an orbit tail and the travel still ahead.

    Step lengths ``d_m`` are modelled as ``C (m + c)**(-s)`` or ``C rho**m``;
    both make ``w_m = d_m / (d_m - d_{m+1})`` affine in ``m`` with slope
    ``beta = 1/s`` (zero for geometric decay).  The remaining travel past
    the last iterate is ``d * ((w - (1 + beta)/2) / (1 - beta) - 1/2)``.
    Returns ``(limit, remaining, uncertainty)``; ``limit`` is ``None`` when
    the tail does not look summable.
    """
    steps = np.array([distance(space, a, b) for a, b in zip(tail[:-1], tail[1:])])
    last = tail[-1]
    if steps.size == 0:
        return last, 0.0, 0.0
    scale = 1.0 + _magnitude(space, last)
    floor = 64.0 * np.finfo(float).eps * scale
    d_last = steps[-1]
    if np.all(steps[-3:] <= floor):
        # stalled at rounding level
        stall = float(steps[-3:].max())
        return last, stall, stall
    diffs = steps[:-1] - steps[1:]
    usable = (diffs > 0) & (steps[:-1] > floor)
    if usable.sum() < 8 or d_last <= 0.0:
        return None, math.inf, math.inf
    idx = np.arange(steps.size - 1, dtype=float)[usable]
    w = steps[:-1][usable] / diffs[usable]
    beta, intercept = np.polyfit(idx, w, 1)
    if not 0.0 <= beta < 1.0 - 1e-9:
        if beta < 0.0 and abs(beta) * steps.size < 1.0:
            beta = 0.0
        else:
            return None, math.inf, math.inf
    w_last = intercept + beta * (steps.size - 1)
    remaining = d_last * ((w_last - 0.5 * (1.0 + beta)) / (1.0 - beta) - 0.5)
    if not math.isfinite(remaining) or remaining < 0.0:
        return None, math.inf, math.inf
    prev = tail[-2]
    if len(tail) >= 3 and space is SpaceId.REAL_LINE and (tail[-1] - tail[-2]) * (tail[-2] - tail[-3]) < 0:
        # alternating approach: the limit lies between the last two iterates
        ratio = min(d_last / steps[-2], 1.0) if steps[-2] > 0 else 0.0
        limit = interpolate(space, prev, last, 1.0 - ratio / (1.0 + ratio))
    else:
        limit = interpolate(space, prev, last, 1.0 + remaining / d_last)
    return limit, float(remaining), float(d_last)


def _snap(space, value, scale: float):
    digits = 12
    quantum = 10.0 ** (math.floor(math.log10(max(scale, 1e-300))) - digits)

    def rnd(v):
        return round(v / quantum) * quantum

    if space is SpaceId.REAL_LINE:
        return rnd(value)
    if space is SpaceId.EUCLIDEAN_PLANE:
        return type(value)(rnd(value.x), rnd(value.y))
    return value.map_offsets(lambda _i, c: rnd(c))


def _limit_in_domain(map: MapHandle, limit, anchor, uncertainty: float) -> tuple:
    """Classify an extrapolated limit against the domain predicate.

    A limit whose uncertainty ball straddles the domain boundary is moved to
    the boundary crossing, rounded to 12 significant digits, and classified
    there; this keeps closed boundaries inside and open ones outside.
    """
    gap = map.distance(anchor, limit)
    if gap == 0.0 or uncertainty == 0.0:
        return map.domain_predicate(limit), limit
    t_unc = uncertainty / gap
    lo = interpolate(map.space, anchor, limit, 1.0 - t_unc)
    hi = interpolate(map.space, anchor, limit, 1.0 + t_unc)
    inside = [map.domain_predicate(p) for p in (lo, limit, hi)]
    if all(inside) or not any(inside):
        return inside[1], limit
    a, b = 1.0 - t_unc, 1.0 + t_unc
    a_in = inside[0]
    for _ in range(200):
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        if map.domain_predicate(interpolate(map.space, anchor, limit, mid)) == a_in:
            a = mid
        else:
            b = mid
    crossing = interpolate(map.space, anchor, limit, 0.5 * (a + b))
    scale = max(map.distance(anchor, limit), _magnitude(map.space, crossing), 1e-300)
    snapped = _snap(map.space, crossing, scale)
    return map.domain_predicate(snapped), snapped


def _magnitude(space, point) -> float:
    if space is SpaceId.REAL_LINE:
        return abs(point)
    if space is SpaceId.EUCLIDEAN_PLANE:
        return math.hypot(point.x, point.y)
    return point.offset_norm()


def detect_fixed_point(map: MapHandle, orbit: Orbit, tol: float,
                       window: int = CAUCHY_WINDOW, tail_fraction: float = TAIL_FRACTION) -> ConvergenceVerdict:
    """Classify the end of an orbit.

    * ``EscapedDomain`` if some iterate fails the domain predicate;
    * ``LimitOutsideDomain`` if the extrapolated cluster point of the final
      ``tail_fraction`` of the orbit fails it;
    * ``ConvergedToFixedPoint`` if ``rho(last, T last) <= tol``, the last
      ``window`` iterates are pairwise within ``tol`` and the extrapolated
      travel still ahead is at most ``tol``;
    * ``BudgetExhausted`` otherwise.
    """
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    points = orbit.iterates
    steps = len(points) - 1
    for p in points:
        if not map.domain_predicate(p):
            return ConvergenceVerdict(Status.ESCAPED_DOMAIN, p, None, None, steps)
    last = points[-1]
    try:
        residual = map.distance(last, map.eval(last))
    except UICError:
        residual = math.inf

    tail = points[-max(int(len(points) * tail_fraction), 2 * window, 3):]
    limit, remaining, uncertainty = _extrapolate(map.space, tail) if len(tail) > 2 else (None, math.inf, math.inf)
    if limit is not None:
        inside, cluster = _limit_in_domain(map, limit, last, max(uncertainty, remaining * 1e-6))
        if not inside:
            return ConvergenceVerdict(Status.LIMIT_OUTSIDE_DOMAIN, cluster, map.distance(last, cluster), remaining, steps)

    recent = points[-window:]
    cauchy = all(map.distance(a, b) <= tol for i, a in enumerate(recent) for b in recent[i + 1:])
    if residual <= tol and cauchy and remaining <= tol:
        return ConvergenceVerdict(Status.CONVERGED, last, residual, remaining, steps)
    return ConvergenceVerdict(Status.BUDGET_EXHAUSTED, last, residual, remaining, steps)


def run_until_verdict(map: MapHandle, x0, tol: float, budget: int = DEFAULT_BUDGET,
                      first_check: int = 64) -> tuple:
    """Iterate with doubling checkpoints until a definite verdict or the budget.

    Returns ``(orbit, verdict)``.  Stops early on convergence or on a limit
    outside the domain; an escaping iterate ends the run at once.
    """
    check_point(map.space, x0)
    points = [x0]
    x = x0
    checkpoint = min(first_check, budget)
    while True:
        while len(points) - 1 < checkpoint:
            x = map.eval(x)
            points.append(x)
            if not map.domain_predicate(x):
                orbit = Orbit(x0, points)
                return orbit, ConvergenceVerdict(Status.ESCAPED_DOMAIN, x, None, None, len(points) - 1)
        orbit = Orbit(x0, points)
        verdict = detect_fixed_point(map, orbit, tol)
        if verdict.status is not Status.BUDGET_EXHAUSTED or checkpoint >= budget:
            return orbit, verdict
        checkpoint = min(2 * checkpoint, budget)


def long_run_limit(map: MapHandle, cert, x0, gap_tol: float = 1e-12, max_milestones: int = 200,
                   budget: int = DEFAULT_BUDGET):
    """Reference limit: follow milestones until successive ones are within ``gap_tol``."""
    x = x0
    used = 0
    for _ in range(max_milestones):
        gap = _positive_index(cert.self_index(x), "self index")
        if map.power is None:
            used += gap
            if used > budget:
                raise IndexOverflow("reference iteration exceeded its budget")
        nxt = map.apply(x, gap)
        if map.distance(x, nxt) < gap_tol:
            return nxt
        x = nxt
    raise IndexOverflow(f"no milestone gap below {gap_tol} after {max_milestones} milestones")
