"""Points and exact distances for the three supported metric spaces.

* the real line with ``|a - b|`` (points are plain floats),
* the Euclidean plane with ``||a - b||_2`` (points are :class:`PlanePoint`),
* the sequence space l1 with ``||a - b||_1`` (points are :class:`L1Point`).

An :class:`L1Point` stores a finitely supported offset, optionally relative to
the center ``x* = sum_i e_i / i**2``.  Distances between two points sharing
the same center flag only involve the finite supports, so they are exact up to
double rounding.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Union

from .errors import CenterMismatch, DomainError, SpaceMismatch


class SpaceId(enum.Enum):
    REAL_LINE = "real"
    EUCLIDEAN_PLANE = "plane"
    L1_OFFSET = "l1"


class PlanePoint(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class L1Point:
    """Finitely supported element of l1, optionally shifted by ``x*``.

    ``offsets`` is a tuple of ``(index, coefficient)`` pairs with strictly
    increasing positive indices and nonzero finite coefficients.  With
    ``centered=True`` the point denotes ``x* + sum c_i e_i``.
    """

    offsets: tuple = ()
    centered: bool = False

    def __post_init__(self):
        offsets = tuple((int(i), float(c)) for i, c in self.offsets)
        previous = 0
        for i, c in offsets:
            if i <= previous:
                raise DomainError(f"indices must be positive and strictly increasing, got {i} after {previous}")
            if c == 0.0 or not math.isfinite(c):
                raise DomainError(f"coefficient at index {i} must be nonzero and finite, got {c}")
            previous = i
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "centered", bool(self.centered))

    @classmethod
    def from_mapping(cls, coefficients: Mapping[int, float] | Iterable, centered: bool = False) -> "L1Point":
        """Build a point from ``{index: coefficient}``, dropping zeros."""
        items = coefficients.items() if isinstance(coefficients, Mapping) else coefficients
        merged: dict[int, float] = {}
        for i, c in items:
            merged[int(i)] = merged.get(int(i), 0.0) + float(c)
        return cls(tuple(sorted((i, c) for i, c in merged.items() if c != 0.0)), centered)

    @classmethod
    def center(cls) -> "L1Point":
        """The point ``x* = sum e_i / i**2`` itself."""
        return cls((), True)

    def as_dict(self) -> dict[int, float]:
        return dict(self.offsets)

    def coefficient(self, index: int) -> float:
        return self.as_dict().get(index, 0.0)

    @property
    def support(self) -> tuple:
        return tuple(i for i, _ in self.offsets)

    def shifted(self, coefficients: Mapping[int, float]) -> "L1Point":
        """Return ``self + sum c_i e_i`` with the same center flag."""
        merged = self.as_dict()
        for i, c in coefficients.items():
            merged[int(i)] = merged.get(int(i), 0.0) + float(c)
        return L1Point.from_mapping(merged, self.centered)

    def map_offsets(self, func) -> "L1Point":
        """Apply ``func(index, coefficient)`` to every stored coefficient."""
        return L1Point.from_mapping({i: func(i, c) for i, c in self.offsets}, self.centered)

    def offset_norm(self) -> float:
        return math.fsum(abs(c) for _, c in self.offsets)


Point = Union[float, PlanePoint, L1Point]


def space_of(point) -> SpaceId:
    if isinstance(point, L1Point):
        return SpaceId.L1_OFFSET
    if isinstance(point, PlanePoint):
        return SpaceId.EUCLIDEAN_PLANE
    if isinstance(point, (int, float)) and not isinstance(point, bool):
        return SpaceId.REAL_LINE
    raise SpaceMismatch(f"unsupported point type {type(point).__name__}")


def check_point(space: SpaceId, point) -> None:
    """Raise unless ``point`` is a valid, finite member of ``space``."""
    actual = space_of(point)
    if actual is not space:
        raise SpaceMismatch(f"expected a point of {space.name}, got {actual.name}")
    if actual is SpaceId.REAL_LINE and not math.isfinite(point):
        raise DomainError(f"real point must be finite, got {point}")
    if actual is SpaceId.EUCLIDEAN_PLANE and not (math.isfinite(point.x) and math.isfinite(point.y)):
        raise DomainError(f"plane point must be finite, got {point}")


def l1_difference(a: L1Point, b: L1Point) -> dict[int, float]:
    """Coefficients of ``a - b``; both points must share the center flag."""
    if a.centered != b.centered:
        raise CenterMismatch("cannot subtract a centered and an uncentered l1 point")
    diff = a.as_dict()
    for i, c in b.offsets:
        diff[i] = diff.get(i, 0.0) - c
    return {i: c for i, c in sorted(diff.items()) if c != 0.0}


def distance(space: SpaceId, a, b) -> float:
    """Metric distance between ``a`` and ``b`` in ``space``."""
    check_point(space, a)
    check_point(space, b)
    if space is SpaceId.REAL_LINE:
        return abs(float(a) - float(b))
    if space is SpaceId.EUCLIDEAN_PLANE:
        return math.hypot(a.x - b.x, a.y - b.y)
    return math.fsum(abs(c) for c in l1_difference(a, b).values())


def l1_tail_bound(J: int) -> float:
    """Upper bound ``1/(J-1)`` for ``sum_{i >= J} 1/i**2``.

    Follows from comparing the sum with ``integral_{J-1}^inf dt/t**2``.
    """
    if int(J) != J or J < 2:
        raise DomainError(f"tail bound needs an integer J >= 2, got {J}")
    return 1.0 / (J - 1)


def interpolate(space: SpaceId, a, b, t: float):
    """The point ``a + t (b - a)``; used to extrapolate orbit tails."""
    if space is SpaceId.REAL_LINE:
        return float(a) + t * (float(b) - float(a))
    if space is SpaceId.EUCLIDEAN_PLANE:
        return PlanePoint(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
    return a.shifted({i: -t * c for i, c in l1_difference(a, b).items()})
