"""Sampled checks of classical contraction conditions and the l1 counterexamples.

A check can only falsify: it evaluates the chosen inequality on a finite
sample of pairs and reports every pair that breaks it by more than a small
slack.  The three generators at the bottom build, for the l1 map Ex2, pairs
that break the Meir-Keeler, Hardy-Rogers and Sehgal conditions for any choice
of their constants.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .certificates import UICCertificate
from .engine import MapHandle
from .errors import DomainError, EmptySampleSet, SearchExhausted, SpaceMismatch
from .maps import eval_ex2
from .metric import L1Point, PlanePoint, SpaceId, distance, space_of

VIOLATION_SLACK = 1e-12
SEARCH_CAP = 10 ** 6
UIC_SELF_HORIZON = 50


def _unit(value: float, what: str) -> float:
    value = float(value)
    if not 0.0 <= value < 1.0:
        raise DomainError(f"{what} must lie in [0, 1), got {value}")
    return value


# -- condition specs ---------------------------------------------------------

@dataclass(frozen=True)
class HardyRogers:
    k1: float
    k2: float
    k3: float

    def __post_init__(self):
        for name in ("k1", "k2", "k3"):
            object.__setattr__(self, name, _unit(getattr(self, name), name))
        if self.k1 + self.k2 + self.k3 >= 1.0:
            raise DomainError(f"k1 + k2 + k3 must be below 1, got {self.k1 + self.k2 + self.k3}")

    @property
    def name(self) -> str:
        return "hardy-rogers"

    def weights(self) -> tuple:
        return self.k1, self.k2, self.k3


@dataclass(frozen=True)
class Banach:
    k: float

    def __post_init__(self):
        object.__setattr__(self, "k", _unit(self.k, "k"))

    name = "banach"

    def weights(self) -> tuple:
        return self.k, 0.0, 0.0


@dataclass(frozen=True)
class Kannan:
    k: float

    def __post_init__(self):
        object.__setattr__(self, "k", _unit(self.k, "k"))

    name = "kannan"

    def weights(self) -> tuple:
        return 0.0, self.k, 0.0


@dataclass(frozen=True)
class Chatterjea:
    k: float

    def __post_init__(self):
        object.__setattr__(self, "k", _unit(self.k, "k"))

    name = "chatterjea"

    def weights(self) -> tuple:
        return 0.0, 0.0, self.k


@dataclass(frozen=True)
class MeirKeeler:
    eps_grid: tuple
    delta: float

    def __post_init__(self):
        grid = tuple(float(e) for e in self.eps_grid)
        if not grid or any(not (e > 0.0 and math.isfinite(e)) for e in grid):
            raise DomainError(f"eps grid must be nonempty and positive, got {self.eps_grid}")
        if not (self.delta > 0.0 and math.isfinite(self.delta)):
            raise DomainError(f"delta must be positive, got {self.delta}")
        object.__setattr__(self, "eps_grid", grid)
        object.__setattr__(self, "delta", float(self.delta))

    name = "meir-keeler"


@dataclass(frozen=True)
class IterateContraction:
    k: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "k", _unit(self.k, "k"))
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"iterate count must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    name = "iterate-contraction"


@dataclass(frozen=True)
class UIC:
    cert: UICCertificate
    n_max: int = UIC_SELF_HORIZON

    name = "uic"


ConditionSpec = (HardyRogers, Banach, Kannan, Chatterjea, MeirKeeler, IterateContraction, UIC)


def describe(spec) -> dict:
    """Plain-data view of a spec for reports."""
    if isinstance(spec, UIC):
        return {"kind": spec.name, "k": spec.cert.k, "certificate": spec.cert.label, "n_max": spec.n_max}
    if isinstance(spec, MeirKeeler):
        return {"kind": spec.name, "eps_grid": list(spec.eps_grid), "delta": spec.delta}
    if isinstance(spec, IterateContraction):
        return {"kind": spec.name, "k": spec.k, "n": spec.n}
    if isinstance(spec, HardyRogers):
        return {"kind": spec.name, "k1": spec.k1, "k2": spec.k2, "k3": spec.k3}
    return {"kind": spec.name, "k": spec.k}


# -- reports -----------------------------------------------------------------

@dataclass(frozen=True)
class Counterexample:
    """A pair breaking a condition, ``margin = lhs - rhs``.

    ``n`` is the iterate count of a UIC self check (then ``y == x``) and
    ``eps`` the Meir-Keeler level.
    """

    x: object
    y: object
    lhs: float
    rhs: float
    margin: float
    detail: str = ""
    n: Optional[int] = None
    eps: Optional[float] = None


@dataclass(frozen=True)
class CheckReport:
    condition: object
    pairs_tested: int
    violations: tuple = ()
    points_tested: int = 0

    @property
    def verdict(self) -> str:
        return "Falsified" if self.violations else "NoViolationFound"


# -- direct evaluation -------------------------------------------------------

def hardy_rogers_sides(map: MapHandle, weights, x, y) -> tuple:
    """``(rho(Tx, Ty), k1 rho(x,y) + k2/2 (rho(x,Tx) + rho(y,Ty)) + k3/2 (rho(x,Ty) + rho(y,Tx)))``."""
    k1, k2, k3 = weights
    tx, ty = map.eval(x), map.eval(y)
    d = map.distance
    rhs = k1 * d(x, y) + 0.5 * k2 * (d(x, tx) + d(y, ty)) + 0.5 * k3 * (d(x, ty) + d(y, tx))
    return d(tx, ty), rhs


def iterate_sides(map: MapHandle, k: float, n: int, x, y) -> tuple:
    return map.distance(map.apply(x, n), map.apply(y, n)), k * map.distance(x, y)


def uic_pair_sides(map: MapHandle, cert: UICCertificate, x, y) -> tuple:
    N = cert.pair_index(x, y)
    return map.distance(map.apply(x, N), map.apply(y, N)), cert.k * map.distance(x, y)


def _uic_self_rows(map: MapHandle, cert: UICCertificate, x, n_max: int):
    """``(n, rho(T^N x, T^{N+n} x), k rho(x, T^n x))`` for ``n = 1..n_max``."""
    N = cert.self_index(x)
    head = map.apply(x, N)
    if map.power is not None:
        for n in range(1, n_max + 1):
            yield n, map.distance(head, map.apply(x, N + n)), cert.k * map.distance(x, map.apply(x, n))
        return
    ahead, near = head, x
    for n in range(1, n_max + 1):
        ahead, near = map.eval(ahead), map.eval(near)
        yield n, map.distance(head, ahead), cert.k * map.distance(x, near)


def uic_self_sides(map: MapHandle, cert: UICCertificate, x, n: int) -> tuple:
    N = cert.self_index(x)
    return map.distance(map.apply(x, N), map.apply(x, N + n)), cert.k * map.distance(x, map.apply(x, n))


def reevaluate(map: MapHandle, spec, cex: Counterexample) -> tuple:
    """Recompute ``(lhs, rhs)`` of a counterexample from the raw map."""
    if isinstance(spec, (HardyRogers, Banach, Kannan, Chatterjea)):
        return hardy_rogers_sides(map, spec.weights(), cex.x, cex.y)
    if isinstance(spec, MeirKeeler):
        return map.distance(map.eval(cex.x), map.eval(cex.y)), cex.eps
    if isinstance(spec, IterateContraction):
        return iterate_sides(map, spec.k, spec.n, cex.x, cex.y)
    if isinstance(spec, UIC):
        if cex.n is not None:
            return uic_self_sides(map, spec.cert, cex.x, cex.n)
        return uic_pair_sides(map, spec.cert, cex.x, cex.y)
    raise TypeError(f"unknown condition {spec!r}")


# -- sampled checks ----------------------------------------------------------

def _same(a, b) -> bool:
    return a == b


def _pair_violations(map: MapHandle, spec, x, y, slack: float) -> list:
    out = []
    if isinstance(spec, MeirKeeler):
        d = map.distance(x, y)
        image = None
        for eps in spec.eps_grid:
            if eps <= d < eps + spec.delta:
                if image is None:
                    image = map.distance(map.eval(x), map.eval(y))
                # the strict "<" fails once lhs - eps exceeds -slack
                if image - eps > -slack:
                    out.append(Counterexample(x, y, image, eps, image - eps, f"eps={eps!r}", eps=eps))
        return out
    if _same(x, y):
        return out
    if isinstance(spec, UIC):
        lhs, rhs = uic_pair_sides(map, spec.cert, x, y)
        detail = "pair index"
    elif isinstance(spec, IterateContraction):
        lhs, rhs = iterate_sides(map, spec.k, spec.n, x, y)
        detail = f"n={spec.n}"
    else:
        lhs, rhs = hardy_rogers_sides(map, spec.weights(), x, y)
        detail = spec.name
    if lhs - rhs > slack:
        out.append(Counterexample(x, y, lhs, rhs, lhs - rhs, detail))
    return out


def _self_violations(map: MapHandle, spec: UIC, x, slack: float) -> list:
    out = []
    for n, lhs, rhs in _uic_self_rows(map, spec.cert, x, spec.n_max):
        if lhs - rhs > slack:
            out.append(Counterexample(x, x, lhs, rhs, lhs - rhs, f"self index, n={n}", n=n))
    return out


def _distinct(points) -> list:
    seen, out = set(), []
    for p in points:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def _validate(map: MapHandle, points) -> None:
    for p in points:
        if space_of(p) is not map.space:
            raise SpaceMismatch(f"sample point {p!r} is not in {map.space.name}")
        if not map.domain_predicate(p):
            raise DomainError(f"sample point {p!r} is outside the map's domain")


def check_condition(map: MapHandle, spec, pairs: Sequence, slack: float = VIOLATION_SLACK,
                    workers: int = 1, points: Optional[Sequence] = None) -> CheckReport:
    """Evaluate ``spec`` on every pair and collect the violations.

    For UIC the pair inequality runs on ``pairs`` and the self inequality
    (``n = 1..spec.n_max``) on ``points``, defaulting to the distinct first
    members of the pairs.  With ``workers > 1`` pairs are evaluated on a
    thread pool; violations are still reported in sample order.
    """
    pairs = list(pairs)
    if not pairs:
        raise EmptySampleSet("no sample pairs given")
    flat = [p for pair in pairs for p in pair]
    _validate(map, flat)
    self_points = []
    if isinstance(spec, UIC):
        self_points = _distinct(p for p, _ in pairs) if points is None else list(points)
        _validate(map, self_points)

    def run(job):
        kind, item = job
        if kind == "pair":
            return _pair_violations(map, spec, item[0], item[1], slack)
        return _self_violations(map, spec, item, slack)

    jobs = [("pair", pair) for pair in pairs] + [("self", p) for p in self_points]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    violations = tuple(v for found in results for v in found)
    return CheckReport(spec, len(pairs), violations, len(self_points))


# -- sample sets -------------------------------------------------------------

def _real_pairs(rng, count: int, lo: float, hi: float) -> list:
    n_uniform = count - 2 * (count // 3)
    n_near = count - n_uniform
    xs = rng.uniform(lo, hi, size=n_uniform + n_near)
    ys = rng.uniform(lo, hi, size=n_uniform)
    gaps = rng.uniform(-1e-3, 1e-3, size=n_near)
    out = [(float(a), float(b)) for a, b in zip(xs[:n_uniform], ys)]
    for a, g in zip(xs[n_uniform:], gaps):
        b = min(max(a + g, lo), hi)
        out.append((float(a), float(b)))
    return out


def _random_l1(rng, max_index: int) -> L1Point:
    size = int(rng.integers(0, 5))
    indices = rng.choice(np.arange(1, max_index + 1), size=size, replace=False)
    return L1Point.from_mapping({int(i): float(rng.uniform(-1.0, 1.0)) for i in indices}, centered=True)


def _l1_pairs(rng, count: int, max_index: int = 30) -> list:
    third = count // 3
    out = []
    for _ in range(count - 2 * third):
        out.append((_random_l1(rng, max_index), _random_l1(rng, max_index)))
    for _ in range(third):
        x = _random_l1(rng, max_index)
        i = int(rng.integers(1, max_index + 1))
        out.append((x, x.shifted({i: float(rng.uniform(1e-6, 1e-3))})))
    for _ in range(third):
        # basis-vector perturbations, reaching far indices
        x = _random_l1(rng, max_index)
        i = int(math.exp(rng.uniform(0.0, math.log(1000.0))))
        out.append((x, x.shifted({i: float(rng.uniform(0.1, 2.0))})))
    return out


def _plane_pairs(rng, count: int, y: Optional[float], r: Optional[float]) -> list:
    out = []
    third = count // 3
    for j in range(count):
        yy = float(rng.uniform(0.01, 1.0)) if y is None else y
        top = 0.999 if r is None else r
        a = float(rng.uniform(0.0, top))
        if j < count - third:
            b = float(rng.uniform(0.0, top))
        else:
            b = min(max(a + float(rng.uniform(-1e-3, 1e-3)), 0.0), top)
        out.append((PlanePoint(a, yy), PlanePoint(b, yy)))
    return out


def sample_pairs(map_id: str, count: int, seed: int, restrict: Optional[tuple] = None) -> list:
    """Deterministic sample pairs for a built-in map.

    ``restrict`` is an interval ``(lo, hi)`` for the real maps and a slice
    ``(y, r)`` for Ex3; it is ignored for Ex2.  Mixture: uniform pairs,
    near-diagonal pairs (gap below 1e-3) and, on l1, basis-vector
    perturbations ``x + c e_i``.
    """
    if count < 1:
        raise EmptySampleSet("sample size must be at least 1")
    rng = np.random.default_rng(seed)
    if map_id == "ex1":
        lo, hi = restrict if restrict is not None else (-20.0, 20.0)
        return _real_pairs(rng, count, float(lo), float(hi))
    if map_id == "ex2":
        return _l1_pairs(rng, count)
    if map_id == "ex3":
        y, r = restrict if restrict is not None else (None, None)
        return _plane_pairs(rng, count, y, r)
    if map_id == "ex4":
        lo, hi = restrict if restrict is not None else (0.5, 1.0 - 1e-9)
        return _real_pairs(rng, count, max(float(lo), 0.5), min(float(hi), 1.0 - 1e-9))
    raise DomainError(f"no sampler for map {map_id!r}")


# -- l1 counterexamples ------------------------------------------------------

def _least_index(test, what: str) -> int:
    for N in range(1, SEARCH_CAP + 1):
        if test(N):
            return N
    raise SearchExhausted(f"no index N <= {SEARCH_CAP} satisfies the {what} construction")


def _ex2_handle() -> MapHandle:
    return MapHandle(SpaceId.L1_OFFSET, eval_ex2, lambda p: p.centered, None, "ex2")


def counterexample_meir_keeler_l1(eps: float, delta: float, x: Optional[L1Point] = None) -> Counterexample:
    """``y = x + (eps + delta/2) e_N`` with ``2**(-1/N) (eps + delta/2) >= eps + delta/4``.

    Then ``eps < |x - y| < eps + delta`` while ``|Tx - Ty| >= eps``.
    """
    if not eps > 0.0 or not delta > 0.0:
        raise DomainError(f"eps and delta must be positive, got {eps}, {delta}")
    x = L1Point.center() if x is None else x
    c = eps + 0.5 * delta
    N = _least_index(lambda n: 2.0 ** (-1.0 / n) * c >= eps + 0.25 * delta
                     and 2.0 ** (-1.0 / n) * c - eps > VIOLATION_SLACK, "Meir-Keeler")
    y = x.shifted({N: c})
    handle = _ex2_handle()
    lhs = handle.distance(handle.eval(x), handle.eval(y))
    return Counterexample(x, y, lhs, eps, lhs - eps, f"N={N}", eps=eps)


def counterexample_hardy_rogers_l1(k1: float, k2: float, k3: float) -> Counterexample:
    """``x = x*``, ``y = x* + e_N`` with ``2**(-1/N) >= 3/4 + k/4``, ``k = k1 + k2 + k3``.

    With ``k = 0`` the right side vanishes and ``N = 1`` already works.  In
    all three generators ``N`` is the least index that also leaves a margin
    above ``VIOLATION_SLACK``.
    """
    spec = HardyRogers(k1, k2, k3)
    k = spec.k1 + spec.k2 + spec.k3
    if k == 0.0:
        N = 1
    else:
        k1, k2, k3 = spec.weights()

        def works(n):
            q = 2.0 ** (-1.0 / n)
            rhs = k1 + 0.5 * k2 * (1.0 - q) + 0.5 * k3 * (1.0 + q)
            return q >= 0.75 + 0.25 * k and q - rhs > VIOLATION_SLACK

        N = _least_index(works, "Hardy-Rogers")
    x = L1Point.center()
    y = x.shifted({N: 1.0})
    lhs, rhs = hardy_rogers_sides(_ex2_handle(), spec.weights(), x, y)
    return Counterexample(x, y, lhs, rhs, lhs - rhs, f"N={N}")


def counterexample_sehgal_l1(x: L1Point, k: float, n_of_x: int) -> Counterexample:
    """``y = x + e_N`` with ``2**(-n/N) > k``: ``|T^n x - T^n y| > k |x - y|``."""
    k = _unit(k, "k")
    if int(n_of_x) != n_of_x or n_of_x < 1:
        raise DomainError(f"n(x) must be a positive integer, got {n_of_x}")
    n = int(n_of_x)
    # the margin must also clear the float slack, e.g. k = 0 with large n
    N = _least_index(lambda m: 2.0 ** (-n / m) - k > VIOLATION_SLACK, "Sehgal")
    y = x.shifted({N: 1.0})
    handle = _ex2_handle()
    lhs, rhs = iterate_sides(handle, k, n, x, y)
    return Counterexample(x, y, lhs, rhs, lhs - rhs, f"N={N}", n=n)
