"""Registry of the four bundled example maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

from scipy.optimize import bisect

from . import maps
from .certificates import (
    UICCertificate,
    example1_certificate,
    example2_certificate,
    example3_certificate,
    example3_slice_width,
)
from .engine import MapHandle
from .errors import DomainError
from .metric import L1Point, PlanePoint, SpaceId

MAP_IDS = ("ex1", "ex2", "ex3", "ex4")
KINDS = {"ex1": "Ex1Sigmoid", "ex2": "Ex2L1Affine", "ex3": "Ex3PlaneDamping", "ex4": "Ex4Oscillator"}


@dataclass(frozen=True)
class BuiltinMap:
    id: str
    handle: MapHandle
    certificate: Optional[UICCertificate] = None
    certificate_factory: Optional[Callable] = None
    reference_fixed_points: tuple = field(default_factory=tuple)

    @property
    def kind(self) -> str:
        return KINDS[self.id]

    def certificate_for(self, start) -> Optional[UICCertificate]:
        """The certificate that covers the orbit of ``start``.

        Ex3 is only certified slice by slice, so its certificate depends on
        the start point; Ex4 has none.
        """
        if self.certificate_factory is not None:
            return self.certificate_factory(start)
        return self.certificate


def ex1_fixed_point(xtol: float = 1e-14) -> float:
    """Root of ``T(x) - x`` on [-1, 3] by bisection."""
    return bisect(lambda x: maps.eval_ex1(x) - x, -1.0, 3.0, xtol=xtol, maxiter=400)


def _ex3_certificate(start: PlanePoint) -> UICCertificate:
    return example3_certificate(start.y, example3_slice_width(start.x))


@lru_cache(maxsize=None)
def get_builtin(map_id: str) -> BuiltinMap:
    if map_id == "ex1":
        handle = MapHandle(SpaceId.REAL_LINE, maps.eval_ex1, name="ex1")
        refs = ((0.653697, "REFERENCE"), (ex1_fixed_point(), "DERIVED"))
        return BuiltinMap("ex1", handle, example1_certificate(), None, refs)
    if map_id == "ex2":
        handle = MapHandle(SpaceId.L1_OFFSET, maps.eval_ex2, lambda p: p.centered, maps.ex2_power, "ex2")
        return BuiltinMap("ex2", handle, example2_certificate(), None, ((L1Point.center(), "REFERENCE"),))
    if map_id == "ex3":
        handle = MapHandle(SpaceId.EUCLIDEAN_PLANE, maps.eval_ex3, maps.in_ex3_domain, maps.ex3_power, "ex3")
        # every (0, y) with 0 < y <= 1 is fixed; one representative per family
        return BuiltinMap("ex3", handle, None, _ex3_certificate, ((PlanePoint(0.0, 1.0), "REFERENCE"),))
    if map_id == "ex4":
        handle = MapHandle(SpaceId.REAL_LINE, maps.eval_ex4, maps.in_ex4_domain, name="ex4")
        return BuiltinMap("ex4", handle)
    raise DomainError(f"unknown builtin map {map_id!r}; choose from {', '.join(MAP_IDS)}")
