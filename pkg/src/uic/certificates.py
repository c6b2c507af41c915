"""Contraction certificates: a factor ``k`` plus iterate indices.

A certificate for ``T`` holds ``0 < k < 1`` and two index functions:

* ``pair_index(x, y) = N`` with ``rho(T^N x, T^N y) <= k rho(x, y)``;
* ``self_index(x) = N`` with ``rho(T^N x, T^{N+n} x) <= k rho(x, T^n x)``
  for every ``n >= 1``.

Both indices are positive integers.  The module also certifies iterate
contraction of interval maps from a grid supremum of derivative products,
and implements the closed-form indices of the bundled example maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, EqualPoints, NotSelfMap
from .metric import L1Point, PlanePoint, l1_difference, l1_tail_bound
from .maps import ex3_displacement

SAFETY_FACTOR = 1.001
CEIL_SLACK = 1e-12
SELF_MAP_SLACK = 1e-12


@dataclass(frozen=True)
class UICCertificate:
    k: float
    pair_index: Callable
    self_index: Callable
    label: str = ""

    def __post_init__(self):
        if not 0.0 < self.k < 1.0:
            raise DomainError(f"contraction factor must lie in (0, 1), got {self.k}")


@dataclass(frozen=True)
class DerivativeProductReport:
    interval: tuple
    n: int
    grid_max: float
    grid_points: int
    certified_k: Optional[float] = None


def _vectorised(func):
    def call(values):
        try:
            out = np.asarray(func(values), dtype=float)
            if out.shape == values.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.array([func(float(v)) for v in values], dtype=float)
    return call


def _grid(interval, grid: int):
    a, b = (float(v) for v in interval)
    if not a < b:
        raise DomainError(f"interval must satisfy a < b, got {interval}")
    if grid < 2:
        raise DomainError("grid needs at least two points")
    return a, b, np.linspace(a, b, int(grid))


def _check_self_map(values, a: float, b: float) -> None:
    if np.any(values < a - SELF_MAP_SLACK) or np.any(values > b + SELF_MAP_SLACK):
        worst = values[np.argmax(np.maximum(a - values, values - b))]
        raise NotSelfMap(f"image {worst} leaves [{a}, {b}]")


def _report(interval, n, products, grid, safety) -> DerivativeProductReport:
    grid_max = float(np.max(np.abs(products)))
    certified = grid_max * safety if grid_max * safety < 1.0 else None
    return DerivativeProductReport((float(interval[0]), float(interval[1])), n, grid_max, int(grid), certified)


def derivative_product_bound(f, df, interval, n: int, grid: int, safety: float = SAFETY_FACTOR) -> DerivativeProductReport:
    """Grid maximum of ``|prod_{i<n} f'(f^i(x))|`` over ``interval``.

    The grid is uniform with both endpoints.  This is a numerical estimate
    of the supremum, not a rigorous enclosure; ``certified_k`` is the grid
    maximum inflated by ``safety`` and is only set when that stays below 1.
    """
    if n < 1:
        raise DomainError("iterate count must be at least 1")
    a, b, xs = _grid(interval, grid)
    f_vec, df_vec = _vectorised(f), _vectorised(df)
    product = np.ones_like(xs)
    current = xs
    for _ in range(n):
        product *= df_vec(current)
        current = f_vec(current)
        _check_self_map(current, a, b)
    return _report(interval, n, product, grid, safety)


def certify_iterate_contraction(f, df, interval, target_k: float, n_max: int,
                                grid: int = 10_000, safety: float = SAFETY_FACTOR):
    """Smallest ``n <= n_max`` whose certified product bound is ``<= target_k``.

    Returns ``(n, report)`` or ``None``.
    """
    if not 0.0 < target_k < 1.0:
        raise DomainError(f"target factor must lie in (0, 1), got {target_k}")
    a, b, xs = _grid(interval, grid)
    f_vec, df_vec = _vectorised(f), _vectorised(df)
    product = np.ones_like(xs)
    current = xs
    for n in range(1, n_max + 1):
        product = product * df_vec(current)
        current = f_vec(current)
        _check_self_map(current, a, b)
        report = _report(interval, n, product, grid, safety)
        if report.certified_k is not None and report.certified_k <= target_k:
            return n, report
    return None


# -- Ex1 ---------------------------------------------------------------------

EX1_CORE = (-1.0, 3.0)
EX1_K = 0.62
EX1_GLOBAL_SLOPE = 1.25
EX1_DRIFT = 0.99


def example1_entry_index(x: float) -> int:
    """Steps after which the Ex1 orbit of ``x`` is inside [-1, 3]: the least
    ``i`` with ``0.99 i >= dist(x, [-1, 3])``, or 0 inside the interval."""
    lo, hi = EX1_CORE
    gap = max(lo - x, x - hi, 0.0)
    if gap == 0.0:
        return 0
    i = max(1, math.ceil(gap / EX1_DRIFT))
    while i > 1 and EX1_DRIFT * (i - 1) >= gap:
        i -= 1
    while EX1_DRIFT * i < gap:
        i += 1
    return i


def _ex1_term(entry: int) -> int:
    # log_{0.62}(0.62 / 1.25**N) without forming 1.25**N
    log_k = math.log(EX1_K)
    value = (log_k - entry * math.log(EX1_GLOBAL_SLOPE)) / log_k
    return entry + math.ceil(value - CEIL_SLACK)


def example1_pair_index(a: float, b: float) -> int:
    """``P(a, b) = max_{e in {a, b}} N_e + ceil(log_{0.62}(0.62 / 1.25**N_e))``."""
    if a > EX1_CORE[0] or b < EX1_CORE[1]:
        raise DomainError(f"P(a, b) needs a <= -1 and b >= 3, got ({a}, {b})")
    return max(_ex1_term(example1_entry_index(a)), _ex1_term(example1_entry_index(b)))


def example1_certificate() -> UICCertificate:
    lo, hi = EX1_CORE

    def pair(x, y):
        return example1_pair_index(min(x, y, lo), max(x, y, hi))

    def self_(x):
        return example1_pair_index(min(x, lo), max(x, hi))

    return UICCertificate(EX1_K, pair, self_, "ex1")


# -- Ex2 ---------------------------------------------------------------------

EX2_K = 0.5


def _suffix_sums(values):
    out = [0.0] * (len(values) + 1)
    for j in range(len(values) - 1, -1, -1):
        out[j] = out[j + 1] + values[j]
    return out


def example2_pair_index(x: L1Point, y: L1Point) -> int:
    """``2 J`` with ``J`` the least index such that the part of ``|x - y|``
    beyond ``J`` is at most a quarter of the part up to ``J``."""
    diff = l1_difference(x, y)
    if not diff:
        raise EqualPoints("pair index is undefined for equal points")
    indices = list(diff)
    mags = [abs(diff[i]) for i in indices]
    suffix = _suffix_sums(mags)
    head = 0.0
    for j, index in enumerate(indices):
        head += mags[j]
        if suffix[j + 1] <= 0.25 * head:
            return 2 * index
    raise AssertionError("unreachable: the full support always qualifies")


def _centered_self_index(x: L1Point) -> int:
    indices = list(x.support)
    mags = [abs(c) for _, c in x.offsets]
    suffix = _suffix_sums(mags)
    head = 0.0
    for j, index in enumerate(indices):
        head += mags[j]
        if suffix[j + 1] <= 0.25 * head:
            # J_x = index + 1, so N = 2 (J_x - 1)
            return 2 * index
    raise AssertionError("unreachable: the full support always qualifies")


def _uncentered_self_index(x: L1Point, max_index: int = 10 ** 7) -> int:
    coeffs = x.as_dict()
    stored = sorted(coeffs)
    dev = {i: abs(coeffs[i] - 1.0 / i ** 2) for i in stored}
    stored_suffix = dict(zip(stored, _suffix_sums([dev[i] for i in stored])))
    head = 0.0
    pos = 0
    for J in range(2, max_index):
        i = J - 1
        head += dev[i] if i in dev else 1.0 / i ** 2
        while pos < len(stored) and stored[pos] < J:
            pos += 1
        stored_tail = stored_suffix[stored[pos]] if pos < len(stored) else 0.0
        if stored_tail + l1_tail_bound(J) <= 0.25 * head:
            return 2 * (J - 1)
    raise DomainError("no admissible J below the search cap")


def example2_self_index(x: L1Point) -> int:
    """``2 (J_x - 1)`` where ``J_x`` is the least index whose tail deviation
    from ``x*`` is at most a quarter of the head.  Uncentered points bound
    the unstored tail by ``1/(J - 1)``.  The fixed point gets index 1."""
    if x.centered:
        if not x.offsets:
            return 1
        return _centered_self_index(x)
    return _uncentered_self_index(x)


def example2_certificate() -> UICCertificate:
    return UICCertificate(EX2_K, example2_pair_index, example2_self_index, "ex2")


# -- Ex3 ---------------------------------------------------------------------

EX3_K = 0.5


def _check_slice(x: float, y: float, r: float) -> None:
    if not 0.0 < y <= 1.0:
        raise DomainError(f"slice height must lie in (0, 1], got {y}")
    if not 0.0 < r < 1.0:
        raise DomainError(f"slice width must lie in (0, 1), got {r}")
    if not 0.0 <= x <= r:
        raise DomainError(f"first coordinate {x} is outside [0, {r}]")


def _ceil_positive(value: Fraction) -> int:
    return max(1, math.ceil(value))


def example3_pair_index(x1: float, x2: float, y: float, r: float) -> int:
    """``ceil(2 / (|x1 - x2| 5 y cos(pi r / 2)))`` on the slice ``S_r^y``."""
    _check_slice(x1, y, r)
    _check_slice(x2, y, r)
    if x1 == x2:
        raise EqualPoints("pair index is undefined for equal points")
    denom = Fraction(abs(x1 - x2)) * Fraction(5.0 * y * math.cos(0.5 * math.pi * r))
    return _ceil_positive(Fraction(2) / denom)


def example3_self_index(x: float, y: float, r: float) -> int:
    """``ceil(2 / (|f_y(x) - x| 5 y cos(pi r / 2)))``, or 1 when ``f_y(x) = x``.

    The displacement is evaluated without cancellation and the ratio in
    exact rationals, so tiny ``x`` still gets its (huge) index.
    """
    _check_slice(x, y, r)
    if x == 0.0:
        return 1
    cx = math.cos(0.5 * math.pi * x)
    cr = math.cos(0.5 * math.pi * r)
    disp = ex3_displacement(x, y)
    if disp > 0.0 and math.isfinite(2.0 / (disp * 5.0 * y * cr)):
        return _ceil_positive(Fraction(2.0 / (disp * 5.0 * y * cr)))
    # displacement 5 y cx x^2 / (1 + 5 y cx x) underflows: keep x^2 exact
    scale = Fraction(2.0 * (1.0 + 5.0 * y * cx * x) / (25.0 * y * y * cx * cr))
    return _ceil_positive(scale / Fraction(x) ** 2)


def example3_slice_width(x0: float) -> float:
    """Slice width ``r`` used for a start with first coordinate ``x0``."""
    if not 0.0 <= x0 < 1.0:
        raise DomainError(f"start must satisfy 0 <= x < 1, got {x0}")
    if x0 < 0.999:
        return min(0.999, x0 + 0.01)
    return 0.5 * (1.0 + x0)


def example3_certificate(y: float, r: float) -> UICCertificate:
    """Certificate of Ex3 restricted to ``S_r^y = [0, r] x {y}``."""
    _check_slice(0.0, y, r)

    def on_slice(s: PlanePoint) -> float:
        if s.y != y:
            raise DomainError(f"point {tuple(s)} is not on the slice y={y}")
        return s.x

    def pair(s1, s2):
        return example3_pair_index(on_slice(s1), on_slice(s2), y, r)

    def self_(s):
        return example3_self_index(on_slice(s), y, r)

    return UICCertificate(EX3_K, pair, self_, f"ex3[y={y!r}, r={r!r}]")
