"""Closed forms of the four example maps, their derivatives and domains.

Ex1  T(x) = 1.5 + x - 3 / (1 + exp(-x)) + 0.5 cos(x / 2) on the real line.
Ex2  x_i -> 2**(-1/i) x_i + (1 - 2**(-1/i)) / i**2 on l1.
Ex3  T(x, y) = (f_y(x), y), f_y(x) = x / (1 + 5 x y cos(pi x / 2)) on the plane.
Ex4  T(x) = x - 2 (x - 1)**2 / (2x - 3) sin(pi / (1 - x)), studied on [1/2, 1).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import CenterMismatch, DomainError, SingularInput
from .metric import L1Point, PlanePoint


# -- Ex1 ---------------------------------------------------------------------

def _sigmoid(x: float) -> float:
    return 0.5 * (1.0 + math.tanh(0.5 * x))


def eval_ex1(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"Ex1 needs a finite argument, got {x}")
    return 1.5 + x - 3.0 * _sigmoid(x) + 0.5 * math.cos(0.5 * x)


def ex1_derivative(x: float) -> float:
    s = _sigmoid(float(x))
    return 1.0 - 3.0 * s * (1.0 - s) - 0.25 * math.sin(0.5 * x)


def ex1_array(x):
    """Vectorised :func:`eval_ex1` for numpy grids."""
    x = np.asarray(x, dtype=float)
    return 1.5 + x - 1.5 * (1.0 + np.tanh(0.5 * x)) + 0.5 * np.cos(0.5 * x)


def ex1_derivative_array(x):
    x = np.asarray(x, dtype=float)
    s = 0.5 * (1.0 + np.tanh(0.5 * x))
    return 1.0 - 3.0 * s * (1.0 - s) - 0.25 * np.sin(0.5 * x)


# -- Ex2 ---------------------------------------------------------------------

def _require_centered(x: L1Point) -> None:
    # T of an uncentered point has infinite support, so it has no finite offset form.
    if not x.centered:
        raise CenterMismatch("Ex2 is evaluated on centered points only (x* + finite offset)")


def eval_ex2(x: L1Point) -> L1Point:
    _require_centered(x)
    return x.map_offsets(lambda i, c: c * 2.0 ** (-1.0 / i))


def ex2_power(x: L1Point, steps: int) -> L1Point:
    """``T^steps x`` in closed form: offsets decay like ``2**(-steps/i)``."""
    _require_centered(x)
    steps = int(steps)
    if steps < 0:
        raise DomainError("steps must be nonnegative")
    if steps == 0:
        return x
    return x.map_offsets(lambda i, c: c * 2.0 ** (-steps / i))


# -- Ex3 ---------------------------------------------------------------------

def ex3_f(x: float, y: float) -> float:
    return x / (1.0 + 5.0 * x * y * math.cos(0.5 * math.pi * x))


def ex3_displacement(x: float, y: float) -> float:
    """``x - f_y(x)`` without cancellation."""
    c = 5.0 * y * math.cos(0.5 * math.pi * x)
    return c * x * x / (1.0 + c * x)


def in_ex3_closure(p: PlanePoint) -> bool:
    return 0.0 <= p.x <= 1.0 and 0.0 <= p.y <= 1.0


def in_ex3_domain(p: PlanePoint) -> bool:
    """Membership in U = {0 <= x < 1, 0 < y <= 1}."""
    return 0.0 <= p.x < 1.0 and 0.0 < p.y <= 1.0


def eval_ex3(p: PlanePoint) -> PlanePoint:
    if not in_ex3_closure(p):
        raise DomainError(f"Ex3 is defined on the closure of U, got {tuple(p)}")
    return PlanePoint(ex3_f(p.x, p.y), p.y)


# Beyond this reciprocal the orbit is summed blockwise instead of stepped.
_EX3_SWITCH = 1.0e3
_EX3_OVERFLOW = 1.0e300


def _cos_gap(v: float) -> float:
    # 1 - cos(pi / (2v)), stable for large v
    s = math.sin(0.25 * math.pi / v)
    return 2.0 * s * s


def _cos_gap_integral(lo: float, hi: float) -> float:
    # integral of 1 - cos(pi/(2v)) dv over [lo, hi], two series terms
    c2 = math.pi ** 2 / 8.0
    c4 = math.pi ** 4 / 1152.0
    return c2 * (1.0 / lo - 1.0 / hi) - c4 * (lo ** -3 - hi ** -3)


def ex3_power(p: PlanePoint, steps: int) -> PlanePoint:
    """``T^steps p`` for arbitrarily large ``steps``.

    The reciprocal ``u = 1/x`` obeys ``u' = u + 5y cos(pi / (2u))`` exactly.
    Once ``u`` is large the increments are ``5y`` minus a tiny, smooth
    deficit, which is summed per block with the Euler-Maclaurin formula.
    Results below 1e-300 are flushed to zero.
    """
    if not in_ex3_closure(p):
        raise DomainError(f"Ex3 is defined on the closure of U, got {tuple(p)}")
    steps = int(steps)
    if steps < 0:
        raise DomainError("steps must be nonnegative")
    x, y = float(p.x), float(p.y)
    if steps == 0 or x == 0.0 or y == 0.0:
        return PlanePoint(x, y)
    while steps and x * _EX3_SWITCH > 1.0:
        x = ex3_f(x, y)
        steps -= 1
    if not steps:
        return PlanePoint(x, y)
    a = 5.0 * y
    u = 1.0 / x
    while steps:
        block = min(steps, max(1, int(u / a)))
        end = u + a * block
        if end > _EX3_OVERFLOW:
            return PlanePoint(0.0, y)
        deficit = _cos_gap_integral(u, end) / a + 0.5 * (_cos_gap(u) - _cos_gap(end))
        u = end - a * deficit
        steps -= block
    return PlanePoint(1.0 / u, y)


# -- Ex4 ---------------------------------------------------------------------

def _sinpi(t: float) -> float:
    # sin(pi t) with the period removed first, exact zeros at integers
    n = round(t)
    value = math.sin(math.pi * (t - n))
    return -value if n % 2 else value


def eval_ex4(x: float) -> float:
    x = float(x)
    if x == 1.0 or x == 1.5:
        raise SingularInput(f"Ex4 is singular at {x}")
    if not math.isfinite(x):
        raise DomainError(f"Ex4 needs a finite argument, got {x}")
    return x - 2.0 * (x - 1.0) ** 2 / (2.0 * x - 3.0) * _sinpi(1.0 / (1.0 - x))


def in_ex4_domain(x: float) -> bool:
    """Membership in I = [1/2, 1)."""
    return 0.5 <= x < 1.0
